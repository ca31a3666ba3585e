#include "plkit/pseudolabel.hpp"

#include <utility>

#include "plkit/errors.hpp"
#include "plkit/format.hpp"
#include "plkit/suppression.hpp"

namespace plkit {
namespace {

void check_detections(const std::vector<Detection>& dets,
                      std::size_t category_count) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Detection& d = dets[i];
    if (d.class_scores.size() != category_count) {
      v.push_back("detection " + std::to_string(i) + ": " +
                  std::to_string(d.class_scores.size()) +
                  " class scores, expected " + std::to_string(category_count));
      continue;
    }
    for (const double s : d.class_scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        v.push_back("detection " + std::to_string(i) + ": class score " +
                    format_double(s) + " outside [0,1]");
        break;
      }
    }
    if (d.objectness && !(*d.objectness >= 0.0 && *d.objectness <= 1.0)) {
      v.push_back("detection " + std::to_string(i) + ": objectness " +
                  format_double(*d.objectness) + " outside [0,1]");
    }
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

// Shared category count for label-free calls; 0 for an empty list.
std::size_t infer_category_count(const std::vector<Detection>& dets) {
  return dets.empty() ? 0 : dets.front().class_scores.size();
}

}  // namespace

PseudoLabelSet rps_sample(const std::vector<Detection>& dets,
                          const WeakLabels& labels, const RpsConfig& cfg,
                          rng::Source& rng) {
  check_detections(dets, labels.size());
  if (cfg.sample_count == 0) {
    throw ValidationError({"sample count must be positive"});
  }
  PseudoLabelSet out;
  out.strategy_tag = strategy_name(Strategy::rps);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (!labels.is_set(k)) continue;
    const auto [boxes, scores] = class_view(dets, k);
    if (boxes.empty()) continue;
    const auto groups = nms_group(boxes, scores, cfg.iou_thr);
    for (const NmsGroup& g : groups) {
      const double max_score = scores[g.indices.front()];
      const double u_keep = rng.uniform();
      if (u_keep > max_score) continue;

      double sum = 0.0;
      for (const std::size_t idx : g.indices) sum += scores[idx];
      const double u_pick = rng.uniform();
      std::size_t pick = g.indices.back();
      double cumulative = 0.0;
      for (const std::size_t idx : g.indices) {
        cumulative += scores[idx] / sum;
        if (cumulative >= u_pick) {
          pick = idx;
          break;
        }
      }
      out.labels.push_back(PseudoLabel{static_cast<int>(k), boxes[pick],
                                       scores[pick]});
    }
  }
  return out;
}

PseudoLabelSet hard_threshold(const std::vector<Detection>& dets,
                              const std::optional<WeakLabels>& labels,
                              double tau, double iou_thr) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError({"tau " + format_double(tau) + " outside (0,1)"});
  }
  const std::size_t c =
      labels ? labels->size() : infer_category_count(dets);
  check_detections(dets, c);
  PseudoLabelSet out;
  out.strategy_tag = strategy_name(Strategy::threshold);
  for (std::size_t k = 0; k < c; ++k) {
    if (labels && !labels->is_set(k)) continue;
    const auto [boxes, scores] = class_view(dets, k);
    if (boxes.empty()) continue;
    for (const std::size_t head : nms(boxes, scores, iou_thr)) {
      if (scores[head] >= tau) {
        out.labels.push_back(PseudoLabel{static_cast<int>(k), boxes[head],
                                         scores[head]});
      }
    }
  }
  return out;
}

PseudoLabelSet top1_per_label(const std::vector<Detection>& dets,
                              const WeakLabels& labels) {
  check_detections(dets, labels.size());
  PseudoLabelSet out;
  out.strategy_tag = strategy_name(Strategy::top1);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (!labels.is_set(k)) continue;
    if (dets.empty()) continue;
    std::size_t best = 0;
    for (std::size_t i = 1; i < dets.size(); ++i) {
      if (dets[i].class_scores[k] > dets[best].class_scores[k]) best = i;
    }
    out.labels.push_back(PseudoLabel{static_cast<int>(k), dets[best].box,
                                     dets[best].class_scores[k]});
  }
  return out;
}

Strategy parse_strategy(const std::string& name) {
  if (name == "rps") return Strategy::rps;
  if (name == "threshold") return Strategy::threshold;
  if (name == "top1") return Strategy::top1;
  throw FormatError("unknown strategy '" + name +
                    "' (expected rps, threshold, or top1)");
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::rps:
      return "rps";
    case Strategy::threshold:
      return "threshold";
    case Strategy::top1:
      return "top1";
  }
  return "unknown";
}

PseudoLabelSet run_strategy(const StrategySpec& spec,
                            const std::vector<Detection>& dets,
                            const WeakLabels& labels, rng::Source& rng) {
  switch (spec.kind) {
    case Strategy::rps:
      return rps_sample(dets, labels, RpsConfig{spec.iou_thr, 1}, rng);
    case Strategy::threshold:
      return hard_threshold(dets, labels, spec.tau, spec.iou_thr);
    case Strategy::top1:
      return top1_per_label(dets, labels);
  }
  throw FormatError("unknown strategy enumerator");
}

}  // namespace plkit
