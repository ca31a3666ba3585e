#include <doctest.h>

#include <algorithm>

#include "plkit/model.hpp"

using namespace plkit;

namespace {

ImageRecord annotated_record() {
  ImageRecord r;
  r.image_id = "img-1";
  r.width = 100;
  r.height = 80;
  r.weak_labels = WeakLabels(std::size_t{2});
  r.weak_labels.set(0);
  r.full_annotations = {Instance::foreground(0, Box(10, 10, 40, 30))};
  return r;
}

bool mentions(const std::vector<std::string>& problems, const char* needle) {
  return std::any_of(problems.begin(), problems.end(), [&](const std::string& p) {
    return p.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("a consistent record validates clean") {
  CHECK(validate_record(annotated_record(), 2).empty());
}

TEST_CASE("validate_record flags each broken invariant") {
  SUBCASE("empty canvas") {
    ImageRecord r = annotated_record();
    r.width = 0;
    CHECK(mentions(validate_record(r, 2), "canvas"));
  }
  SUBCASE("weak label length mismatch") {
    ImageRecord r = annotated_record();
    CHECK_FALSE(validate_record(r, 5).empty());
  }
  SUBCASE("class id out of range") {
    ImageRecord r = annotated_record();
    (*r.full_annotations)[0].class_id = 9;
    CHECK_FALSE(validate_record(r, 2).empty());
  }
  SUBCASE("box outside the canvas") {
    ImageRecord r = annotated_record();
    (*r.full_annotations)[0].box = Box(10, 10, 150, 30);
    CHECK(mentions(validate_record(r, 2), "out of bounds"));
  }
  SUBCASE("instance class missing from the flags") {
    ImageRecord r = annotated_record();
    r.full_annotations->push_back(Instance::foreground(1, Box(0, 0, 5, 5)));
    CHECK_FALSE(validate_record(r, 2).empty());
  }
  SUBCASE("flag set with no matching instance") {
    ImageRecord r = annotated_record();
    r.weak_labels.set(1);
    CHECK_FALSE(validate_record(r, 2).empty());
  }
  SUBCASE("weak-only records skip the cross check") {
    ImageRecord r = annotated_record();
    r.full_annotations.reset();
    r.weak_labels.set(1);  // no instances to agree with; fine
    CHECK(validate_record(r, 2).empty());
  }
}

TEST_CASE("class_view extracts one class column") {
  std::vector<Detection> dets;
  dets.push_back({Box(0, 0, 10, 10), {0.9, 0.1}, std::nullopt});
  dets.push_back({Box(5, 5, 15, 15), {0.2, 0.7}, 0.8});
  const auto [boxes, scores] = class_view(dets, 1);
  REQUIRE(boxes.size() == 2);
  CHECK(scores[0] == 0.1);
  CHECK(scores[1] == 0.7);
  CHECK(boxes[1].x1 == 5);
  CHECK_THROWS_AS(class_view(dets, 2), std::out_of_range);
}

TEST_CASE("weak label helpers") {
  WeakLabels w(std::size_t{3});
  CHECK_FALSE(w.any());
  w.set(2);
  CHECK(w.any());
  CHECK(w.is_set(2));
  CHECK_FALSE(w.is_set(0));
}
