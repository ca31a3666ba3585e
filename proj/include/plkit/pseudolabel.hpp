#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "plkit/geometry.hpp"
#include "plkit/model.hpp"
#include "plkit/rng.hpp"

namespace plkit {

// A mined box label on a weakly-annotated image. score is the raw class
// score of the source detection, never a renormalized one.
struct PseudoLabel {
  int class_id = 0;
  Box box{0.0, 0.0, 1.0, 1.0};
  double score = 0.0;

  bool operator==(const PseudoLabel&) const = default;
};

struct PseudoLabelSet {
  std::string image_id;  // left empty by the strategies; callers attach it
  std::vector<PseudoLabel> labels;
  std::string strategy_tag;

  bool operator==(const PseudoLabelSet&) const = default;
};

struct RpsConfig {
  double iou_thr = 0.5;          // grouped-suppression threshold
  std::size_t sample_count = 1;  // independent passes callers may request
};

// Random pseudo-label sampling. For each class k with flags[k] = 1, clusters
// the class-k detections with nms_group, then per cluster draws u1: the
// cluster is skipped when u1 > max of its scores, otherwise one member is
// drawn by a second uniform against the sum-normalized score vector. Emits
// (class, box, raw score) in ascending-class then cluster order. Consumes
// exactly one uniform per skipped cluster and two per kept one, so scripted
// sources reproduce runs draw for draw. A cluster whose best score is 0 is
// always skipped (draws are in (0,1]), which keeps the normalization total.
PseudoLabelSet rps_sample(const std::vector<Detection>& dets,
                          const WeakLabels& labels, const RpsConfig& cfg,
                          rng::Source& rng);

// Baseline: per class (restricted to flagged classes when labels are given,
// every class when absent), runs plain nms at iou_thr and keeps heads whose
// class score is >= tau. Throws ValidationError unless 0 < tau < 1.
PseudoLabelSet hard_threshold(const std::vector<Detection>& dets,
                              const std::optional<WeakLabels>& labels,
                              double tau, double iou_thr = 0.5);

// Baseline: per flagged class, emits the single highest-scoring detection
// (ties by ascending index). No suppression, no threshold.
PseudoLabelSet top1_per_label(const std::vector<Detection>& dets,
                              const WeakLabels& labels);

enum class Strategy { rps, threshold, top1 };

struct StrategySpec {
  Strategy kind = Strategy::rps;
  double tau = 0.9;     // threshold strategy
  double iou_thr = 0.5; // rps grouping and threshold-side nms
};

// Accepts exactly "rps", "threshold", or "top1"; throws FormatError otherwise.
Strategy parse_strategy(const std::string& name);
const char* strategy_name(Strategy s);

// Dispatches to the strategy named in spec. Deterministic strategies do not
// touch rng.
PseudoLabelSet run_strategy(const StrategySpec& spec,
                            const std::vector<Detection>& dets,
                            const WeakLabels& labels, rng::Source& rng);

}  // namespace plkit
