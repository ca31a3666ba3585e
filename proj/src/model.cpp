#include "plkit/model.hpp"

#include <stdexcept>

#include "plkit/format.hpp"

namespace plkit {

bool WeakLabels::any() const {
  for (const auto f : flags) {
    if (f != 0) return true;
  }
  return false;
}

std::vector<std::string> validate_record(const ImageRecord& r,
                                         std::size_t category_count) {
  std::vector<std::string> v;
  const std::string who = "image '" + r.image_id + "': ";
  if (r.width <= 0 || r.height <= 0) {
    v.push_back(who + "nonpositive canvas " + std::to_string(r.width) + "x" +
                std::to_string(r.height));
  }
  if (r.weak_labels.size() != category_count) {
    v.push_back(who + "weak label length " +
                std::to_string(r.weak_labels.size()) + ", expected " +
                std::to_string(category_count));
  }
  if (!r.full_annotations) return v;

  std::vector<std::uint8_t> present(category_count, 0);
  for (std::size_t i = 0; i < r.full_annotations->size(); ++i) {
    const Instance& inst = (*r.full_annotations)[i];
    const std::string ann = who + "annotation " + std::to_string(i) + ": ";
    if (!inst.is_foreground()) {
      if (inst.class_id != kBackgroundClass) {
        v.push_back(ann + "boxless instance with class id " +
                    std::to_string(inst.class_id));
      }
      continue;
    }
    if (inst.class_id < 0 ||
        static_cast<std::size_t>(inst.class_id) >= category_count) {
      v.push_back(ann + "class id " + std::to_string(inst.class_id) +
                  " out of range [0," + std::to_string(category_count) + ")");
    } else {
      present[static_cast<std::size_t>(inst.class_id)] = 1;
    }
    const Box& b = *inst.box;
    if (b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > static_cast<double>(r.width) ||
        b.y2 > static_cast<double>(r.height)) {
      v.push_back(ann + "box (" + format_double(b.x1) + "," +
                  format_double(b.y1) + "," + format_double(b.x2) + "," +
                  format_double(b.y2) + ") out of bounds");
    }
  }
  if (r.weak_labels.size() == category_count) {
    for (std::size_t k = 0; k < category_count; ++k) {
      const bool flagged = r.weak_labels.is_set(k);
      if (flagged && !present[k]) {
        v.push_back(who + "label inconsistency: class " + std::to_string(k) +
                    " flagged but not annotated");
      } else if (!flagged && present[k]) {
        v.push_back(who + "label inconsistency: class " + std::to_string(k) +
                    " annotated but not flagged");
      }
    }
  }
  return v;
}

std::pair<std::vector<Box>, std::vector<double>> class_view(
    const std::vector<Detection>& dets, std::size_t k) {
  std::vector<Box> boxes;
  std::vector<double> scores;
  boxes.reserve(dets.size());
  scores.reserve(dets.size());
  for (const Detection& d : dets) {
    if (k >= d.class_scores.size()) {
      throw std::out_of_range("class index " + std::to_string(k) +
                              " out of range for a detection with " +
                              std::to_string(d.class_scores.size()) +
                              " class scores");
    }
    boxes.push_back(d.box);
    scores.push_back(d.class_scores[k]);
  }
  return {std::move(boxes), std::move(scores)};
}

}  // namespace plkit
