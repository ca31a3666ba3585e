#include <doctest.h>

#include <cstdlib>
#include <map>
#include <set>

#include "plkit/errors.hpp"
#include "plkit/rng.hpp"
#include "plkit/synth_eval.hpp"

using namespace plkit;

namespace {

PseudoLabelSet labels_from(const ImageRecord& record) {
  PseudoLabelSet set;
  for (const Instance& inst : *record.full_annotations) {
    set.labels.push_back({inst.class_id, *inst.box, 1.0});
  }
  return set;
}

}  // namespace

TEST_CASE("generated scenes are valid, seeded, and inside the canvas") {
  SceneConfig cfg;
  rng::Mt64 a(21), b(21);
  const ImageRecord r1 = generate_scene(cfg, "s", a);
  const ImageRecord r2 = generate_scene(cfg, "s", b);
  CHECK(r1 == r2);
  CHECK(validate_record(r1, cfg.class_count).empty());
  REQUIRE(r1.is_fully_annotated());
  const std::size_t count = r1.full_annotations->size();
  CHECK(count >= std::size_t(cfg.instance_count.lo));
  CHECK(count <= std::size_t(cfg.instance_count.hi));
  for (const Instance& inst : *r1.full_annotations) {
    const double w = inst.box->x2 - inst.box->x1;
    CHECK(w >= cfg.box_size.lo);
    CHECK(w <= cfg.box_size.hi);
    CHECK(inst.box->x2 <= cfg.width);
    CHECK(inst.box->y2 <= cfg.height);
  }
}

TEST_CASE("disallowed overlap keeps instances apart") {
  SceneConfig cfg;
  cfg.overlap_allowed = false;
  cfg.instance_count = {4, 6};
  rng::Mt64 rng(33);
  for (int i = 0; i < 20; ++i) {
    const ImageRecord r = generate_scene(cfg, "s", rng);
    const auto& inst = *r.full_annotations;
    for (std::size_t a = 0; a < inst.size(); ++a) {
      for (std::size_t b = a + 1; b < inst.size(); ++b) {
        CHECK(iou(*inst[a].box, *inst[b].box) < 0.3);
      }
    }
  }
}

TEST_CASE("impossible placement exhausts the retry budget") {
  SceneConfig cfg;
  cfg.width = 130;
  cfg.height = 130;
  cfg.box_size = {120, 130};
  cfg.instance_count = {4, 4};
  cfg.overlap_allowed = false;
  rng::Mt64 rng(1);
  CHECK_THROWS_AS(generate_scene(cfg, "s", rng), GenerationError);
}

TEST_CASE("scene config is validated") {
  rng::Mt64 rng(1);
  SceneConfig cfg;
  cfg.width = 0;
  CHECK_THROWS_AS(generate_scene(cfg, "s", rng), ValidationError);
  cfg = {};
  cfg.box_size = {200, 100};
  CHECK_THROWS_AS(generate_scene(cfg, "s", rng), ValidationError);
  cfg = {};
  cfg.box_size = {20, 5000};
  CHECK_THROWS_AS(generate_scene(cfg, "s", rng), ValidationError);
  cfg = {};
  cfg.class_count = 0;
  CHECK_THROWS_AS(generate_scene(cfg, "s", rng), ValidationError);
}

TEST_CASE("a noiseless detector echoes the ground truth") {
  SceneConfig cfg;
  rng::Mt64 scene_rng(55);
  const ImageRecord r = generate_scene(cfg, "s", scene_rng);
  rng::Mt64 det_rng(7);
  const auto dets = simulate_detector(r, {}, det_rng);
  REQUIRE(dets.size() == r.full_annotations->size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Instance& gt = (*r.full_annotations)[i];
    CHECK(dets[i].box == *gt.box);
    const double s = dets[i].class_scores[std::size_t(gt.class_id)];
    CHECK(s > 0.999);  // sigmoid(logit(clamped 1)) just under one
    for (std::size_t k = 0; k < dets[i].class_scores.size(); ++k) {
      if (int(k) != gt.class_id) CHECK(dets[i].class_scores[k] == 0.0);
    }
  }
}

TEST_CASE("raising the miss rate only deletes detections") {
  SceneConfig cfg;
  cfg.instance_count = {8, 12};
  rng::Mt64 scene_rng(56);
  const ImageRecord r = generate_scene(cfg, "s", scene_rng);
  DetectorNoise lo, hi;
  lo.miss_rate = 0.2;
  hi.miss_rate = 0.6;
  rng::Mt64 r1(99), r2(99);
  const auto kept_lo = simulate_detector(r, lo, r1);
  const auto kept_hi = simulate_detector(r, hi, r2);
  CHECK(kept_hi.size() <= kept_lo.size());
  // with zero jitter boxes identify instances; every survivor at the high
  // rate also survived at the low rate
  std::set<std::pair<double, double>> lo_corners;
  for (const Detection& d : kept_lo) lo_corners.insert({d.box.x1, d.box.y1});
  for (const Detection& d : kept_hi) {
    CHECK(lo_corners.count({d.box.x1, d.box.y1}) == 1);
  }
}

TEST_CASE("false positives carry low scores and valid boxes") {
  SceneConfig cfg;
  cfg.instance_count = {0, 0};
  rng::Mt64 scene_rng(57);
  const ImageRecord r = generate_scene(cfg, "empty", scene_rng);
  DetectorNoise noise;
  noise.false_positive_rate = 6.0;
  rng::Mt64 det_rng(58);
  const auto dets = simulate_detector(r, noise, det_rng);
  CHECK(!dets.empty());
  for (const Detection& d : dets) {
    double best = 0;
    for (const double s : d.class_scores) best = std::max(best, s);
    CHECK(best > 0.0);
    CHECK(best <= 0.5);
    CHECK(d.box.x2 <= cfg.width);
    CHECK(d.box.y2 <= cfg.height);
  }
}

TEST_CASE("duplicates fire per emitted instance") {
  SceneConfig cfg;
  cfg.instance_count = {6, 10};
  rng::Mt64 scene_rng(59);
  const ImageRecord r = generate_scene(cfg, "s", scene_rng);
  DetectorNoise noise;
  noise.duplicate_rate = 1.0;
  rng::Mt64 det_rng(60);
  const auto dets = simulate_detector(r, noise, det_rng);
  CHECK(dets.size() == 2 * r.full_annotations->size());
}

TEST_CASE("detector noise is validated") {
  SceneConfig cfg;
  rng::Mt64 rng(61);
  const ImageRecord r = generate_scene(cfg, "s", rng);
  DetectorNoise bad;
  bad.miss_rate = 1.5;
  CHECK_THROWS_AS(simulate_detector(r, bad, rng), ValidationError);
  bad = {};
  bad.localization_sigma = -1;
  CHECK_THROWS_AS(simulate_detector(r, bad, rng), ValidationError);
  ImageRecord weak = r;
  weak.full_annotations.reset();
  CHECK_THROWS_AS(simulate_detector(weak, {}, rng), ValidationError);
}

TEST_CASE("perfect labels score perfectly") {
  SceneConfig cfg;
  cfg.overlap_allowed = false;
  rng::Mt64 rng(62);
  const ImageRecord r = generate_scene(cfg, "s", rng);
  const QualityReport rep = match_and_score(labels_from(r), r, 0.5);
  CHECK(rep.precision == 1.0);
  CHECK(rep.recall == 1.0);
  CHECK(rep.f1 == 1.0);
  CHECK(rep.mean_matched_iou == doctest::Approx(1.0));
  CHECK(rep.fp == 0);
  CHECK(rep.fn == 0);
  CHECK(rep.tp == r.full_annotations->size());
}

TEST_CASE("matching is greedy by score within a class") {
  ImageRecord r;
  r.image_id = "m";
  r.width = 100;
  r.height = 100;
  r.weak_labels = WeakLabels(std::size_t{1});
  r.weak_labels.set(0);
  r.full_annotations = {Instance::foreground(0, Box(0, 0, 10, 10))};
  PseudoLabelSet set;
  set.labels.push_back({0, Box(1, 0, 11, 10), 0.4});  // iou 9/11
  set.labels.push_back({0, Box(0, 0, 10, 9), 0.9});   // iou 0.9, higher score
  const QualityReport rep = match_and_score(set, r, 0.5);
  CHECK(rep.tp == 1);
  CHECK(rep.fp == 1);  // the weaker label finds the gt already claimed
  CHECK(rep.fn == 0);
  CHECK(rep.mean_matched_iou == doctest::Approx(0.9));
  CHECK(rep.matched_score_mean == doctest::Approx(0.9));
}

TEST_CASE("unmatched ground truth counts as misses") {
  ImageRecord r;
  r.image_id = "m";
  r.width = 100;
  r.height = 100;
  r.weak_labels = WeakLabels(std::size_t{2});
  r.weak_labels.set(0);
  r.weak_labels.set(1);
  r.full_annotations = {Instance::foreground(0, Box(0, 0, 10, 10)),
                        Instance::foreground(1, Box(40, 40, 60, 60))};
  const QualityReport rep = match_and_score({}, r, 0.5);
  CHECK(rep.tp == 0);
  CHECK(rep.fn == 2);
  CHECK(rep.precision == 1.0);  // vacuous
  CHECK(rep.recall == 0.0);
  CHECK(rep.f1 == 0.0);
  CHECK(rep.per_class.size() == 2);
  CHECK(rep.per_class[0].fn == 1);
  CHECK(rep.per_class[1].fn == 1);

  PseudoLabelSet wrong_class;
  wrong_class.labels.push_back({2, Box(0, 0, 10, 10), 0.9});
  CHECK_THROWS_AS(match_and_score(wrong_class, r, 0.5), ValidationError);
  CHECK_THROWS_AS(match_and_score({}, r, 0.0), ValidationError);
}

TEST_CASE("strategy comparison is deterministic and thread-count invariant") {
  SceneConfig cfg;
  Dataset ds;
  ds.categories = {"a", "b", "c"};
  rng::Mt64 scene_rng(70);
  for (int i = 0; i < 6; ++i) {
    ds.records.push_back(generate_scene(cfg, "img-" + std::to_string(i),
                                        scene_rng));
  }
  DetectorNoise noise;
  noise.localization_sigma = 1.5;
  noise.miss_rate = 0.1;
  noise.false_positive_rate = 1.0;
  const std::vector<NamedStrategy> strategies = {
      {"rps", {Strategy::rps, 0.9, 0.5}},
      {"threshold", {Strategy::threshold, 0.5, 0.5}},
      {"top1", {Strategy::top1, 0.9, 0.5}},
  };
  const auto rows = compare_strategies(ds, noise, strategies, 8, 0.5, 1234);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].name == "rps");
  CHECK(rows[0].trials == 8);
  // deterministic strategies cannot vary across trials
  CHECK(rows[1].precision.stddev == 0.0);
  CHECK(rows[2].recall.stddev == 0.0);
  for (const StrategySummary& row : rows) {
    CHECK(row.precision.mean >= 0.0);
    CHECK(row.precision.mean <= 1.0);
    CHECK(row.recall.mean >= 0.0);
    CHECK(row.recall.mean <= 1.0);
  }

  setenv("PSEUDOLABEL_KIT_THREADS", "1", 1);
  const auto serial = compare_strategies(ds, noise, strategies, 8, 0.5, 1234);
  setenv("PSEUDOLABEL_KIT_THREADS", "3", 1);
  const auto threaded = compare_strategies(ds, noise, strategies, 8, 0.5, 1234);
  unsetenv("PSEUDOLABEL_KIT_THREADS");
  for (std::size_t s = 0; s < rows.size(); ++s) {
    CHECK(serial[s].precision.mean == threaded[s].precision.mean);
    CHECK(serial[s].recall.mean == threaded[s].recall.mean);
    CHECK(serial[s].f1.stddev == threaded[s].f1.stddev);
    CHECK(serial[s].precision.mean == rows[s].precision.mean);
  }
}

TEST_CASE("file-based comparison consumes supplied detections") {
  SceneConfig cfg;
  Dataset ds;
  ds.categories = {"a", "b", "c"};
  rng::Mt64 scene_rng(71);
  ds.records.push_back(generate_scene(cfg, "only", scene_rng));
  std::map<std::string, std::vector<Detection>> dets;
  rng::Mt64 det_rng(72);
  dets["only"] = simulate_detector(ds.records[0], {}, det_rng);
  const std::vector<NamedStrategy> strategies = {
      {"threshold", {Strategy::threshold, 0.5, 0.5}}};
  const auto rows = compare_strategies(ds, dets, strategies, 2, 0.5, 1);
  REQUIRE(rows.size() == 1);
  // noiseless detections under a mild threshold recover everything
  CHECK(rows[0].precision.mean == 1.0);
  CHECK(rows[0].recall.mean == 1.0);

  // an image with no detections row yields empty labels, not an error
  const std::map<std::string, std::vector<Detection>> empty;
  const auto none = compare_strategies(ds, empty, strategies, 1, 0.5, 1);
  CHECK(none[0].recall.mean == 0.0);
  CHECK_THROWS_AS(compare_strategies(ds, dets, strategies, 0, 0.5, 1),
                  ValidationError);
}
