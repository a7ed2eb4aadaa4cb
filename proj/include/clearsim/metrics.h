//
// Binary segmentation scores: accuracy, F1, precision, recall and IoU, per
// frame and aggregated over a dataset either as a frame mean or over pooled
// pixel counts.
//

#ifndef CLEARSIM_METRICS_H_
#define CLEARSIM_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clearsim/image.h"

namespace clearsim {

struct confusion_matrix {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  uint64_t total() const { return tp + fp + fn + tn; }
  confusion_matrix& operator+=(const confusion_matrix& o) {
    tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
    return *this;
  }
  friend bool operator==(const confusion_matrix&, const confusion_matrix&) = default;
};

// Nonzero pixels are positive. Throws domain_error on a shape mismatch.
confusion_matrix confusion(const image<uint8_t>& pred, const image<uint8_t>& gt);
image<uint8_t> binarize(const image<uint16_t>& mask);

struct metric_scores {
  double accuracy = 0, f1 = 0, precision = 0, recall = 0, iou = 0;
};

// A ratio with a zero denominator is 1 when neither side has positives and
// 0 otherwise. Throws domain_error for an empty matrix.
metric_scores compute_metrics(const confusion_matrix& cm);

enum class aggregation_mode : uint8_t { mean_over_frames, pooled_pixels };
aggregation_mode parse_aggregation_mode(const std::string& name);  // "mean" | "pooled"

struct frame_score {
  std::string frame;  // path relative to the dataset root
  confusion_matrix cm;
  metric_scores scores;
};

struct eval_report {
  aggregation_mode mode = aggregation_mode::mean_over_frames;
  std::vector<frame_score> frames;  // sorted by frame
  metric_scores aggregate;
  std::vector<std::string> missing_predictions;
};

metric_scores aggregate_scores(const std::vector<frame_score>& frames, aggregation_mode mode);

// Pairs every `mask.png` under gt_dir with the same relative path under
// pred_dir. Throws io_error when no frame pairs up.
eval_report evaluate_dataset(
    const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir, aggregation_mode mode);

// Tab-separated rows in the column order accuracy, f1, precision, recall,
// iou, followed by the aggregate row and any missing frames.
std::string format_report(const eval_report& report);

}  // namespace clearsim

#endif
