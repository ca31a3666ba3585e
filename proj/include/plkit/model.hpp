#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plkit/geometry.hpp"

namespace plkit {

// Image-level multilabels: flags[k] == 1 when category k is known present.
// The all-zeros vector is a valid label set (nothing known foreground).
struct WeakLabels {
  std::vector<std::uint8_t> flags;

  WeakLabels() = default;
  explicit WeakLabels(std::vector<std::uint8_t> f) : flags(std::move(f)) {}
  explicit WeakLabels(std::size_t category_count) : flags(category_count, 0) {}

  std::size_t size() const { return flags.size(); }
  bool is_set(std::size_t k) const { return flags[k] != 0; }
  bool any() const;
  void set(std::size_t k) { flags[k] = 1; }

  bool operator==(const WeakLabels&) const = default;
};

inline constexpr int kBackgroundClass = -1;

// A ground-truth or predicted instance; background carries no box.
struct Instance {
  int class_id = kBackgroundClass;
  std::optional<Box> box;

  static Instance foreground(int class_id, const Box& b) { return {class_id, b}; }
  static Instance background() { return {kBackgroundClass, std::nullopt}; }

  bool is_foreground() const { return box.has_value(); }

  bool operator==(const Instance&) const = default;
};

// One proposal's detector output.
struct Detection {
  Box box;
  std::vector<double> class_scores;  // length C, each in [0,1]
  std::optional<double> objectness;  // in [0,1] when present

  bool operator==(const Detection&) const = default;
};

// An image plus its annotation state. Records with full_annotations form the
// fully-annotated split; the rest are the weakly-annotated split.
struct ImageRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  WeakLabels weak_labels;
  std::optional<std::vector<Instance>> full_annotations;

  bool is_fully_annotated() const { return full_annotations.has_value(); }

  bool operator==(const ImageRecord&) const = default;
};

struct Dataset {
  std::vector<std::string> categories;
  std::vector<ImageRecord> records;

  std::size_t category_count() const { return categories.size(); }

  bool operator==(const Dataset&) const = default;
};

// One entry per violated record invariant; empty means valid. Never throws.
std::vector<std::string> validate_record(const ImageRecord& r, std::size_t category_count);

// Parallel (boxes, class-k scores) view of a detection list, input order
// preserved, no filtering. Throws std::out_of_range when k is not a valid
// class index for every detection.
std::pair<std::vector<Box>, std::vector<double>> class_view(
    const std::vector<Detection>& dets, std::size_t k);

}  // namespace plkit
