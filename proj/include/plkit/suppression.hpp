#pragma once

#include <cstddef>
#include <vector>

#include "plkit/geometry.hpp"

namespace plkit {

// One suppression cluster. indices[0] is the head (the box plain NMS keeps);
// the rest are the boxes that head suppressed, in descending score order
// with ties broken by ascending input index.
struct NmsGroup {
  std::vector<std::size_t> indices;

  std::size_t head() const { return indices.front(); }

  bool operator==(const NmsGroup&) const = default;
};

// Greedy non-maximum suppression. Repeatedly keeps the highest-scoring
// remaining box (score ties broken by ascending input index) and discards
// every remaining box with IoU >= iou_thr against it. Kept indices come back
// in keep order (descending score). Throws ValidationError on length
// mismatch, non-finite scores, or iou_thr outside (0,1].
std::vector<std::size_t> nms(const std::vector<Box>& boxes,
                             const std::vector<double>& scores,
                             double iou_thr = 0.5);

// Same greedy sweep, but each suppressed box is recorded in the group of the
// first head that suppressed it instead of being dropped. Group heads, in
// order, equal nms() on the same input, and the groups partition the input
// indices. Same validation as nms.
std::vector<NmsGroup> nms_group(const std::vector<Box>& boxes,
                                const std::vector<double>& scores,
                                double iou_thr = 0.5);

}  // namespace plkit
