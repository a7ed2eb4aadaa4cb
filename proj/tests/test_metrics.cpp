#include <cmath>
#include <random>

#include "clearsim/error.h"
#include "clearsim/image_io.h"
#include "clearsim/metrics.h"
#include "doctest.h"
#include "fixtures.h"

using namespace clearsim;

namespace {

// Reference scores straight from per-pixel counts.
struct reference {
  double tp = 0, fp = 0, fn = 0, tn = 0;
  void add(const image<uint8_t>& pred, const image<uint8_t>& gt) {
    for (int y = 0; y < gt.height; y++) {
      for (int x = 0; x < gt.width; x++) {
        auto p = pred(x, y) != 0, g = gt(x, y) != 0;
        if (p && g) tp++;
        if (p && !g) fp++;
        if (!p && g) fn++;
        if (!p && !g) tn++;
      }
    }
  }
  double ratio(double num, double den) const {
    if (den > 0) return num / den;
    return (tp + fp + fn == 0) ? 1.0 : 0.0;
  }
  metric_scores scores() const {
    auto m = metric_scores{};
    m.accuracy = (tp + tn) / (tp + fp + fn + tn);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
    m.iou = ratio(tp, tp + fp + fn);
    return m;
  }
};

image<uint8_t> random_mask(std::mt19937_64& gen, int w, int h, double density) {
  auto img = image<uint8_t>(w, h);
  auto u = std::uniform_real_distribution<double>(0, 1);
  for (auto& p : img.pixels) p = u(gen) < density ? 1 : 0;
  return img;
}

image<uint16_t> as_ids(const image<uint8_t>& m, uint16_t id) {
  auto out = image<uint16_t>(m.width, m.height);
  for (size_t i = 0; i < m.size(); i++) out.pixels[i] = m.pixels[i] ? id : 0;
  return out;
}

void put(const std::filesystem::path& path, const byte_buffer& bytes) {
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, bytes);
}

void check_identity(const metric_scores& s) {
  CHECK(s.f1 == doctest::Approx(2 * s.iou / (1 + s.iou)).epsilon(1e-12));
  CHECK(s.iou <= s.f1 + 1e-15);
  CHECK(s.f1 <= 1);
}

void check_equal(const metric_scores& a, const metric_scores& b) {
  CHECK(a.accuracy == doctest::Approx(b.accuracy).epsilon(1e-12));
  CHECK(a.precision == doctest::Approx(b.precision).epsilon(1e-12));
  CHECK(a.recall == doctest::Approx(b.recall).epsilon(1e-12));
  CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
  CHECK(a.iou == doctest::Approx(b.iou).epsilon(1e-12));
}

}  // namespace

TEST_CASE("confusion on the 2x2 example") {
  auto pred = image<uint8_t>(2, 2), gt = image<uint8_t>(2, 2);
  pred(0, 0) = pred(0, 1) = 1;
  gt(0, 1) = gt(1, 1) = 1;
  auto cm = confusion(pred, gt);
  CHECK(cm == confusion_matrix{1, 1, 1, 1});
  auto m = compute_metrics(cm);
  CHECK(m.accuracy == 0.5);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 0.5);
  CHECK(m.f1 == 0.5);
  CHECK(m.iou == doctest::Approx(1.0 / 3));
}

TEST_CASE("perfect and all-negative predictions") {
  auto ones = image<uint8_t>(5, 4, 1);
  auto cm = confusion(ones, ones);
  CHECK(cm.tp == 20);
  CHECK(cm.total() == 20);
  auto m = compute_metrics(cm);
  CHECK(m.accuracy == 1);
  CHECK(m.f1 == 1);
  CHECK(m.iou == 1);

  auto zeros = image<uint8_t>(5, 4);
  auto z = confusion(zeros, zeros);
  CHECK(z.tn == 20);
  auto mz = compute_metrics(z);
  CHECK(mz.precision == 1);
  CHECK(mz.recall == 1);
  CHECK(mz.f1 == 1);
  CHECK(mz.iou == 1);

  auto miss = compute_metrics(confusion(zeros, ones));
  CHECK(miss.precision == 0);
  CHECK(miss.recall == 0);
  CHECK(miss.iou == 0);
  CHECK(miss.f1 == 0);
}

TEST_CASE("shape mismatch and empty matrices are domain errors") {
  CHECK_THROWS_AS(confusion(image<uint8_t>(2, 2), image<uint8_t>(2, 3)), domain_error);
  CHECK_THROWS_AS(compute_metrics(confusion_matrix{}), domain_error);
  CHECK_THROWS_AS(parse_aggregation_mode("median"), validation_error);
  CHECK(parse_aggregation_mode("pooled") == aggregation_mode::pooled_pixels);
}

TEST_CASE("first row of the segmentation table is self-consistent") {
  auto cm = confusion_matrix{};
  cm.tp = 8818;
  cm.fn = 1182;
  cm.fp = 22;
  // tn solving (tp + tn) / total = 0.9924
  cm.tn = static_cast<uint64_t>(std::llround((0.9924 * (cm.tp + cm.fn + cm.fp) - cm.tp) / (1 - 0.9924)));
  auto m = compute_metrics(cm);
  CHECK(std::abs(m.accuracy - 0.9924) <= 5e-3);
  CHECK(std::abs(m.f1 - 0.9361) <= 5e-3);
  CHECK(std::abs(m.precision - 0.9975) <= 5e-3);
  CHECK(std::abs(m.recall - 0.8818) <= 5e-3);
  CHECK(std::abs(m.iou - 0.8801) <= 5e-3);
  check_identity(m);
}

TEST_CASE("random mask pairs match the pixel-loop reference") {
  auto gen = std::mt19937_64(11);
  auto density = std::uniform_real_distribution<double>(0, 0.6);
  for (int i = 0; i < 100; i++) {
    auto pred = random_mask(gen, 64, 64, density(gen));
    auto gt = random_mask(gen, 64, 64, density(gen));
    auto ref = reference{};
    ref.add(pred, gt);
    auto cm = confusion(pred, gt);
    CHECK(cm.tp == ref.tp);
    CHECK(cm.fp == ref.fp);
    CHECK(cm.fn == ref.fn);
    CHECK(cm.tn == ref.tn);
    auto m = compute_metrics(cm);
    check_equal(m, ref.scores());
    check_identity(m);

    // swapping roles swaps precision and recall
    auto swapped = compute_metrics(confusion(gt, pred));
    CHECK(swapped.precision == doctest::Approx(m.recall));
    CHECK(swapped.recall == doctest::Approx(m.precision));
    CHECK(swapped.iou == doctest::Approx(m.iou));
    CHECK(swapped.f1 == doctest::Approx(m.f1));
    CHECK(swapped.accuracy == m.accuracy);

    // inverting both masks swaps tp with tn and fp with fn
    auto inv = [](image<uint8_t> img) {
      for (auto& p : img.pixels) p = p ? 0 : 1;
      return img;
    };
    auto c = confusion(inv(pred), inv(gt));
    CHECK(c.tp == cm.tn);
    CHECK(c.tn == cm.tp);
    CHECK(c.fp == cm.fn);
    CHECK(c.fn == cm.fp);
    CHECK(compute_metrics(c).accuracy == m.accuracy);
  }
}

TEST_CASE("binarize treats any id as positive") {
  auto m = image<uint16_t>(3, 1);
  m.pixels = {0, 1, 65535};
  CHECK(binarize(m).pixels == std::vector<uint8_t>{0, 1, 1});
}

TEST_CASE("dataset evaluation matches the reference in both modes") {
  auto pred_dir = fixtures::temp_dir("pred");
  auto gt_dir = fixtures::temp_dir("gt");
  auto gen = std::mt19937_64(12);
  auto pooled = reference{};
  auto frame_scores = std::vector<metric_scores>{};
  for (int i = 0; i < 6; i++) {
    auto pred = random_mask(gen, 64, 64, 0.3);
    auto gt = random_mask(gen, 64, 64, 0.2 + 0.05 * i);
    auto rel = std::filesystem::path("scene_" + std::to_string(i)) / "frame_a" / "mask.png";
    put(pred_dir.path / rel, encode_png16(as_ids(pred, 7)));
    put(gt_dir.path / rel, encode_png16(as_ids(gt, 3)));
    pooled.add(pred, gt);
    auto single = reference{};
    single.add(pred, gt);
    frame_scores.push_back(single.scores());
  }

  auto pooled_report = evaluate_dataset(pred_dir.path, gt_dir.path, aggregation_mode::pooled_pixels);
  CHECK(pooled_report.frames.size() == 6);
  check_equal(pooled_report.aggregate, pooled.scores());

  auto mean_report = evaluate_dataset(pred_dir.path, gt_dir.path, aggregation_mode::mean_over_frames);
  auto mean = metric_scores{};
  for (auto& s : frame_scores) {
    mean.accuracy += s.accuracy / 6;
    mean.precision += s.precision / 6;
    mean.recall += s.recall / 6;
    mean.f1 += s.f1 / 6;
    mean.iou += s.iou / 6;
  }
  check_equal(mean_report.aggregate, mean);
  for (size_t i = 0; i < 6; i++) {
    check_equal(mean_report.frames[i].scores, frame_scores[i]);
    check_identity(mean_report.frames[i].scores);
  }

  auto text = format_report(mean_report);
  CHECK(text.find("accuracy\tf1\tprecision\trecall\tiou") != std::string::npos);
}

TEST_CASE("self evaluation is perfect and a single frame aggregates to itself") {
  auto dir = fixtures::temp_dir("self");
  auto gen = std::mt19937_64(13);
  put(dir.path / "f" / "mask.png", encode_png16(as_ids(random_mask(gen, 32, 32, 0.4), 1)));
  for (auto mode : {aggregation_mode::mean_over_frames, aggregation_mode::pooled_pixels}) {
    auto report = evaluate_dataset(dir.path, dir.path, mode);
    REQUIRE(report.frames.size() == 1);
    CHECK(report.aggregate.iou == 1);
    CHECK(report.aggregate.f1 == 1);
    CHECK(report.aggregate.accuracy == 1);
    check_equal(report.aggregate, report.frames[0].scores);
  }
}

TEST_CASE("missing predictions are reported and no overlap is an io error") {
  auto pred = fixtures::temp_dir("pred_missing");
  auto gt = fixtures::temp_dir("gt_missing");
  auto mask = encode_png16(image<uint16_t>(4, 4, 1));
  put(gt.path / "a" / "mask.png", mask);
  put(gt.path / "b" / "mask.png", mask);
  put(pred.path / "a" / "mask.png", mask);
  auto report = evaluate_dataset(pred.path, gt.path, aggregation_mode::mean_over_frames);
  CHECK(report.frames.size() == 1);
  REQUIRE(report.missing_predictions.size() == 1);
  CHECK(report.missing_predictions[0].find("b") != std::string::npos);

  auto empty = fixtures::temp_dir("pred_empty");
  CHECK_THROWS_AS(evaluate_dataset(empty.path, gt.path, aggregation_mode::pooled_pixels), io_error);
}
