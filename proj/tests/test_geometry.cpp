#include <doctest.h>

#include "plkit/errors.hpp"
#include "plkit/geometry.hpp"
#include "plkit/rng.hpp"

using namespace plkit;

TEST_CASE("box construction validates corner order and finiteness") {
  CHECK_NOTHROW(Box(0, 0, 10, 10));
  CHECK_NOTHROW(Box(3, 3, 3, 3));  // zero area is a valid box
  CHECK_THROWS_AS(Box(10, 0, 0, 10), ValidationError);
  CHECK_THROWS_AS(Box(0, 10, 10, 0), ValidationError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Box(nan, 0, 1, 1), ValidationError);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Box(0, 0, inf, 1), ValidationError);
}

TEST_CASE("from_xywh converts to corner convention") {
  const Box b = Box::from_xywh(10, 20, 30, 40);
  CHECK(b.x1 == 10);
  CHECK(b.y1 == 20);
  CHECK(b.x2 == 40);
  CHECK(b.y2 == 60);
  CHECK_THROWS_AS(Box::from_xywh(0, 0, -1, 5), ValidationError);
}

TEST_CASE("area and intersection") {
  CHECK(area(Box(0, 0, 10, 10)) == 100.0);
  CHECK(area(Box(5, 5, 5, 9)) == 0.0);
  CHECK(intersection_area(Box(0, 0, 10, 10), Box(5, 5, 15, 15)) == 25.0);
  CHECK(intersection_area(Box(0, 0, 10, 10), Box(20, 20, 30, 30)) == 0.0);
  // touching edges intersect with zero area
  CHECK(intersection_area(Box(0, 0, 10, 10), Box(10, 0, 20, 10)) == 0.0);
}

TEST_CASE("iou fixed values") {
  const Box a(0, 0, 10, 10);
  const Box b(1, 0, 11, 10);
  // inter 9*10 = 90, union 100+100-90 = 110
  CHECK(iou(a, b) == 90.0 / 110.0);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box(50, 50, 60, 60)) == 0.0);
  // both degenerate: zero union reports zero overlap
  CHECK(iou(Box(3, 3, 3, 3), Box(3, 3, 3, 3)) == 0.0);
}

TEST_CASE("iou is symmetric and bounded on random boxes") {
  rng::Mt64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const double ax = rng.uniform() * 100, ay = rng.uniform() * 100;
    const double bx = rng.uniform() * 100, by = rng.uniform() * 100;
    const Box a(ax, ay, ax + rng.uniform() * 50, ay + rng.uniform() * 50);
    const Box b(bx, by, bx + rng.uniform() * 50, by + rng.uniform() * 50);
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(b, a) == v);
  }
}
