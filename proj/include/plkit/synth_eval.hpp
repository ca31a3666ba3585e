#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plkit/model.hpp"
#include "plkit/pseudolabel.hpp"
#include "plkit/rng.hpp"

namespace plkit {

// Closed integer interval.
struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct SceneConfig {
  int width = 640;
  int height = 480;
  IntRange instance_count{1, 5};
  std::size_t class_count = 3;
  IntRange box_size{20, 120};    // edge lengths in pixels
  bool overlap_allowed = true;   // when false, placed boxes keep IoU < 0.3
};

// Per-instance placement attempts before giving up on a crowded canvas.
inline constexpr std::size_t kPlacementRetryBudget = 100;

struct DetectorNoise {
  double localization_sigma = 0.0;   // Gaussian corner jitter, pixels
  double score_slope = 1.0;          // logit-space calibration of TP scores
  double score_offset = 0.0;
  double false_positive_rate = 0.0;  // expected spurious detections per image
  double miss_rate = 0.0;
  double duplicate_rate = 0.0;
};

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const ClassCounts&) const = default;
};

// Pseudo-label quality at one IoU operating point. The 0/0 cases of
// precision and recall are defined as 1 (empty against empty is perfect);
// f1 is 0 when precision + recall is 0. Matched means come back 0 when
// nothing matched.
struct QualityReport {
  double iou_thr = 0.5;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  double mean_matched_iou = 0.0;
  double matched_score_mean = 0.0;
  std::vector<ClassCounts> per_class;
};

// Places uniformly sized, uniformly positioned axis-aligned instances on the
// canvas and derives consistent image-level flags. Integer corner
// coordinates. Draw order: instance count, then per instance class, width,
// height, x, y (repeated per placement retry). Throws ValidationError on a
// bad config and GenerationError when a placement exhausts its retries.
ImageRecord generate_scene(const SceneConfig& cfg, const std::string& image_id,
                           rng::Source& rng);

// Simulated detector over a fully-annotated record. Takes one 64-bit draw
// from rng as the run's base; every instance then works from its own
// substream derived from (base, instance index): a miss draw, four corner
// jitters (Gaussian, re-ordered and clamped to the canvas), a duplicate
// draw, and four more jitters when a duplicate fires. A final substream
// drives Poisson(false_positive_rate) spurious detections, each with a
// uniform box, a uniform class, and a score in (0, 1/2]. A true positive
// scores sigmoid(slope * logit(p) + offset) on its class, with p the
// clamped IoU between the jittered and true boxes; every other class
// scores 0. The substreams keep instances independent, so raising
// miss_rate alone can only delete detections. Throws ValidationError on a
// record without annotations or out-of-range noise parameters.
std::vector<Detection> simulate_detector(const ImageRecord& record,
                                         const DetectorNoise& noise,
                                         rng::Source& rng);

// Greedy per-class matching: pseudo labels in descending score order (ties
// by position), each taking the unmatched same-class instance of highest
// IoU when that IoU >= iou_thr. Throws ValidationError on a record without
// annotations.
QualityReport match_and_score(const PseudoLabelSet& pseudo,
                              const ImageRecord& record, double iou_thr);

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // population deviation over trials
};

struct StrategySummary {
  std::string name;
  std::size_t trials = 0;
  MetricStat precision;
  MetricStat recall;
  MetricStat f1;
  MetricStat mean_matched_iou;
  MetricStat matched_score_mean;
};

struct NamedStrategy {
  std::string name;
  StrategySpec spec;
};

// Runs every strategy against identical per-image detections and reports
// per-trial micro-aggregated metrics as mean/stddev over trials. Detections
// are simulated once per image from a stream derived from (seed, image id)
// and reused across trials, so deterministic strategies have zero variance;
// stochastic strategies draw from streams derived from (seed, image id,
// trial, strategy). Images fan out across worker threads; aggregation is in
// image order, so results do not depend on thread count.
std::vector<StrategySummary> compare_strategies(
    const Dataset& dataset, const DetectorNoise& noise,
    const std::vector<NamedStrategy>& strategies, std::size_t trials,
    double iou_thr, std::uint64_t seed);

// Same comparison over externally supplied detections instead of simulated
// ones. Records missing from the map see an empty detection list.
std::vector<StrategySummary> compare_strategies(
    const Dataset& dataset,
    const std::map<std::string, std::vector<Detection>>& detections,
    const std::vector<NamedStrategy>& strategies, std::size_t trials,
    double iou_thr, std::uint64_t seed);

}  // namespace plkit
