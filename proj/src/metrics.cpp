#include "clearsim/metrics.h"

#include <algorithm>
#include <cstdio>

#include "clearsim/error.h"
#include "clearsim/image_io.h"

namespace clearsim {

confusion_matrix confusion(const image<uint8_t>& pred, const image<uint8_t>& gt) {
  if (!pred.same_shape(gt))
    throw domain_error("confusion: prediction is " + std::to_string(pred.width) + "x" +
                       std::to_string(pred.height) + ", ground truth is " + std::to_string(gt.width) +
                       "x" + std::to_string(gt.height));
  auto cm = confusion_matrix{};
  for (size_t i = 0; i < pred.pixels.size(); i++) {
    auto p = pred.pixels[i] != 0, g = gt.pixels[i] != 0;
    if (p && g) {
      cm.tp++;
    } else if (p) {
      cm.fp++;
    } else if (g) {
      cm.fn++;
    } else {
      cm.tn++;
    }
  }
  return cm;
}

image<uint8_t> binarize(const image<uint16_t>& mask) {
  auto out = image<uint8_t>(mask.width, mask.height);
  for (size_t i = 0; i < mask.pixels.size(); i++) out.pixels[i] = mask.pixels[i] != 0;
  return out;
}

namespace {

double ratio(uint64_t num, uint64_t den, bool no_positives) {
  if (den == 0) return no_positives ? 1.0 : 0.0;
  return double(num) / double(den);
}

}  // namespace

metric_scores compute_metrics(const confusion_matrix& cm) {
  if (cm.total() == 0) throw domain_error("compute_metrics: empty confusion matrix");
  auto no_positives = cm.tp + cm.fp + cm.fn == 0;
  auto m = metric_scores{};
  m.accuracy = double(cm.tp + cm.tn) / double(cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp, no_positives);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, no_positives);
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, no_positives);
  m.iou = ratio(cm.tp, cm.tp + cm.fp + cm.fn, no_positives);
  return m;
}

aggregation_mode parse_aggregation_mode(const std::string& name) {
  if (name == "mean") return aggregation_mode::mean_over_frames;
  if (name == "pooled") return aggregation_mode::pooled_pixels;
  throw validation_error("mode", "expected mean or pooled, got '" + name + "'");
}

metric_scores aggregate_scores(const std::vector<frame_score>& frames, aggregation_mode mode) {
  if (frames.empty()) throw domain_error("aggregate_scores: no frames");
  if (mode == aggregation_mode::pooled_pixels) {
    auto total = confusion_matrix{};
    for (auto& f : frames) total += f.cm;
    return compute_metrics(total);
  }
  auto sum = metric_scores{};
  for (auto& f : frames) {
    sum.accuracy += f.scores.accuracy;
    sum.f1 += f.scores.f1;
    sum.precision += f.scores.precision;
    sum.recall += f.scores.recall;
    sum.iou += f.scores.iou;
  }
  auto n = double(frames.size());
  return {sum.accuracy / n, sum.f1 / n, sum.precision / n, sum.recall / n, sum.iou / n};
}

eval_report evaluate_dataset(
    const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir, aggregation_mode mode) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(gt_dir)) throw io_error("ground-truth directory not found: " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw io_error("prediction directory not found: " + pred_dir.string());
  auto gt_masks = std::vector<fs::path>{};
  for (auto& entry : fs::recursive_directory_iterator(gt_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "mask.png")
      gt_masks.push_back(fs::relative(entry.path(), gt_dir));
  }
  std::sort(gt_masks.begin(), gt_masks.end());
  auto report = eval_report{};
  report.mode = mode;
  for (auto& rel : gt_masks) {
    auto frame = rel.parent_path().generic_string();
    if (frame.empty()) frame = ".";
    auto pred_path = pred_dir / rel;
    if (!fs::exists(pred_path)) {
      report.missing_predictions.push_back(frame);
      continue;
    }
    auto gt = binarize(decode_png16(read_file(gt_dir / rel)));
    auto pred = binarize(decode_png16(read_file(pred_path)));
    auto score = frame_score{frame, confusion(pred, gt), {}};
    score.scores = compute_metrics(score.cm);
    report.frames.push_back(std::move(score));
  }
  if (report.frames.empty())
    throw io_error("no prediction matches a ground-truth frame under " + gt_dir.string());
  report.aggregate = aggregate_scores(report.frames, mode);
  return report;
}

std::string format_report(const eval_report& report) {
  auto out = std::string("frame\taccuracy\tf1\tprecision\trecall\tiou\ttp\tfp\tfn\ttn\n");
  char buf[512];
  for (auto& f : report.frames) {
    auto& s = f.scores;
    std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%llu\t%llu\t%llu\t%llu\n",
        f.frame.c_str(), s.accuracy, s.f1, s.precision, s.recall, s.iou,
        (unsigned long long)f.cm.tp, (unsigned long long)f.cm.fp, (unsigned long long)f.cm.fn,
        (unsigned long long)f.cm.tn);
    out += buf;
  }
  auto& a = report.aggregate;
  std::snprintf(buf, sizeof(buf), "# aggregate (%s)\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
      report.mode == aggregation_mode::mean_over_frames ? "mean" : "pooled", a.accuracy, a.f1,
      a.precision, a.recall, a.iou);
  out += buf;
  for (auto& m : report.missing_predictions) out += "# missing\t" + m + "\n";
  return out;
}

}  // namespace clearsim
