#include "plkit/suppression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plkit/errors.hpp"
#include "plkit/format.hpp"
#include "plkit/kernels.hpp"

namespace plkit {
namespace {

void check_inputs(const std::vector<Box>& boxes,
                  const std::vector<double>& scores, double iou_thr) {
  std::vector<std::string> v;
  if (boxes.size() != scores.size()) {
    v.push_back("boxes/scores length mismatch: " +
                std::to_string(boxes.size()) + " vs " +
                std::to_string(scores.size()));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      v.push_back("non-finite score at index " + std::to_string(i));
      break;
    }
  }
  if (!(iou_thr > 0.0 && iou_thr <= 1.0)) {
    v.push_back("iou threshold " + format_double(iou_thr) +
                " outside (0,1]");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

// Visit order of the greedy sweep: descending score, ties by ascending index.
std::vector<std::size_t> score_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

struct Soa {
  std::vector<double> x1, y1, x2, y2;

  void push(const Box& b) {
    x1.push_back(b.x1);
    y1.push_back(b.y1);
    x2.push_back(b.x2);
    y2.push_back(b.y2);
  }
  std::size_t size() const { return x1.size(); }
};

}  // namespace

std::vector<std::size_t> nms(const std::vector<Box>& boxes,
                             const std::vector<double>& scores,
                             double iou_thr) {
  check_inputs(boxes, scores, iou_thr);
  const auto order = score_order(scores);
  std::vector<std::size_t> kept;
  Soa kept_soa;
  std::vector<double> ious;
  for (const std::size_t i : order) {
    const Box& b = boxes[i];
    ious.resize(kept_soa.size());
    kernels::ops().iou_one_vs_many(b.x1, b.y1, b.x2, b.y2, kept_soa.x1.data(),
                                   kept_soa.y1.data(), kept_soa.x2.data(),
                                   kept_soa.y2.data(), kept_soa.size(),
                                   ious.data());
    bool suppressed = false;
    for (const double v : ious) {
      if (v >= iou_thr) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) {
      kept.push_back(i);
      kept_soa.push(b);
    }
  }
  return kept;
}

std::vector<NmsGroup> nms_group(const std::vector<Box>& boxes,
                                const std::vector<double>& scores,
                                double iou_thr) {
  check_inputs(boxes, scores, iou_thr);
  const auto order = score_order(scores);
  std::vector<char> claimed(boxes.size(), 0);
  std::vector<NmsGroup> groups;
  std::vector<std::size_t> pending;
  Soa pending_soa;
  std::vector<double> ious;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t head = order[pos];
    if (claimed[head]) continue;
    claimed[head] = 1;
    NmsGroup g;
    g.indices.push_back(head);

    pending.clear();
    pending_soa = Soa{};
    for (std::size_t later = pos + 1; later < order.size(); ++later) {
      const std::size_t cand = order[later];
      if (claimed[cand]) continue;
      pending.push_back(cand);
      pending_soa.push(boxes[cand]);
    }
    const Box& hb = boxes[head];
    ious.resize(pending.size());
    kernels::ops().iou_one_vs_many(hb.x1, hb.y1, hb.x2, hb.y2,
                                   pending_soa.x1.data(), pending_soa.y1.data(),
                                   pending_soa.x2.data(), pending_soa.y2.data(),
                                   pending.size(), ious.data());
    for (std::size_t j = 0; j < pending.size(); ++j) {
      if (ious[j] >= iou_thr) {
        claimed[pending[j]] = 1;
        g.indices.push_back(pending[j]);
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace plkit
