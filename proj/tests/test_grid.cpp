#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "lookback/grid.hpp"

using namespace lookback;

TEST_CASE("aligned grid hits every anchor exactly") {
  const Grid g = build_aligned_grid(0.0, 3.0, {0.5, 1.0, 1.5, 2.0, 2.5}, 7);
  REQUIRE(g.size() == 7);
  const double expect[] = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  for (int i = 0; i < 7; ++i) CHECK(g.points[i] == expect[i]);
  CHECK(g.delta_max == doctest::Approx(0.5));
}

TEST_CASE("anchors equal to the bounds are absorbed") {
  const Grid g = build_aligned_grid(0.0, 2.0, {0.0, 1.0, 2.0}, 9);
  CHECK(g.lower() == 0.0);
  CHECK(g.upper() == 2.0);
  CHECK_NOTHROW(g.index_of(1.0));
}

TEST_CASE("bad anchors are rejected") {
  CHECK_THROWS_AS(build_aligned_grid(0.0, 1.0, {0.5, 0.5}, 9),
                  std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(build_aligned_grid(0.0, 1.0, {1.5}, 9),
                  std::invalid_argument);  // outside
  CHECK_THROWS_AS(build_aligned_grid(1.0, 1.0, {}, 9),
                  std::invalid_argument);  // empty interval
  CHECK_THROWS_AS(build_aligned_grid(0.0, 1.0, {0.3, 0.6}, 3),
                  std::invalid_argument);  // target below anchors + 2
}

TEST_CASE("allocation only grows past the target") {
  // awkward segment ratios force rounding; the result may exceed the target
  // but never undershoots, and every anchor stays a grid point bit for bit
  const std::vector<double> anchors = {0.013, 0.27, 0.2701, 1.9};
  for (std::size_t target : {16u, 37u, 100u, 401u}) {
    const Grid g = build_aligned_grid(0.0, 2.0, anchors, target);
    CHECK(g.size() >= target);
    for (double a : anchors) CHECK(g.points[g.index_of(a)] == a);
    for (std::size_t i = 1; i < g.size(); ++i)
      CHECK(g.points[i] > g.points[i - 1]);
  }
}

TEST_CASE("refinement is nested bit for bit") {
  const Grid g = build_aligned_grid(0.0, 2.0, {0.3, 1.1}, 33);
  const Grid f = refine(g);
  REQUIRE(f.size() == 2 * g.size() - 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(f.points[2 * i] == g.points[i]);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    CHECK(f.points[2 * i + 1] ==
          doctest::Approx(0.5 * (g.points[i] + g.points[i + 1])));
  CHECK(f.delta_max == doctest::Approx(0.5 * g.delta_max));
}

TEST_CASE("index_of is exact-match only") {
  const Grid g = build_aligned_grid(0.0, 1.0, {0.5}, 5);
  CHECK(g.index_of(0.5) > 0);
  CHECK_THROWS_AS(g.index_of(0.5 + 1e-13), std::invalid_argument);
  CHECK_THROWS_AS(g.index_of(7.0), std::invalid_argument);
}

TEST_CASE("neighbor lookups respect the boundary") {
  const Grid g = build_aligned_grid(0.0, 1.0, {0.5}, 5);
  CHECK(right_neighbor(g, 0.49) == 0.5);
  CHECK(left_neighbor(g, 0.51) == 0.5);
  CHECK_THROWS_AS(left_neighbor(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(right_neighbor(g, 1.0), std::invalid_argument);
}
