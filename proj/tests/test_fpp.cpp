#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <memory>

#include "lookback/fpp.hpp"

using namespace lookback;

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(geometric Brownian motion started at x crosses y before tau)
double gbm_hit_prob(double sigma, double b, double x, double y, double tau) {
  const double h = std::log(y / x);
  const double nu = b - 0.5 * sigma * sigma;
  const double rt = sigma * std::sqrt(tau);
  if (y > x)
    return norm_cdf((-h + nu * tau) / rt) +
           std::exp(2.0 * nu * h / (sigma * sigma)) *
               norm_cdf((-h - nu * tau) / rt);
  return norm_cdf((h - nu * tau) / rt) +
         std::exp(2.0 * nu * h / (sigma * sigma)) *
             norm_cdf((h + nu * tau) / rt);
}

}  // namespace

TEST_CASE("upward survival matches the reflection formula") {
  const double sigma = 0.3, r = 0.05, d = 0.02;
  ModelSpec spec{BlackScholes{sigma}, r, d};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.25, 2.5, {1.0, 1.5}, 800));
  Generator gen = build_generator(spec, grid);
  const double got = survival_up(gen, 1.5, 1.0, 1.0);
  const double want = 1.0 - gbm_hit_prob(sigma, r - d, 1.0, 1.5, 1.0);
  CHECK(got == doctest::Approx(want).epsilon(5e-4));
}

TEST_CASE("downward survival matches the reflection formula") {
  const double sigma = 0.25, r = 0.03, d = 0.0;
  ModelSpec spec{BlackScholes{sigma}, r, d};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.25, 2.5, {0.8, 1.0}, 800));
  Generator gen = build_generator(spec, grid);
  const double got = survival_down(gen, 0.8, 1.0, 0.75);
  const double want = 1.0 - gbm_hit_prob(sigma, r, 1.0, 0.8, 0.75);
  CHECK(got == doctest::Approx(want).epsilon(5e-4));
}

TEST_CASE("survival decreases with the horizon") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.5, 2.0, {1.0, 1.3}, 300));
  Generator gen = build_generator(spec, grid);
  double prev = 1.0;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const double s = survival_up(gen, 1.3, 1.0, t);
    CHECK(s < prev);
    CHECK(s > 0.0);
    prev = s;
  }
}

TEST_CASE("zero horizon survives surely") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.5, 2.0, {1.0, 1.3}, 100));
  Generator gen = build_generator(spec, grid);
  CHECK(survival_up(gen, 1.3, 1.0, 0.0) == 1.0);
}

TEST_CASE("profile exposes every alive start at once") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.5, 2.0, {1.0, 1.4}, 200));
  Generator gen = build_generator(spec, grid);
  const std::size_t jb = grid->index_of(1.4);

  SurvivalProfile up = survival_profile(gen, 1.4, Passage::up, 0.8);
  CHECK(up.lo == 0);
  CHECK(up.hi == jb - 1);
  CHECK(up.values.size() == (up.hi - up.lo + 1));
  for (double v : up.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
  // starts closer to the barrier are more likely to cross
  for (std::size_t k = up.lo + 1; k <= up.hi; ++k)
    CHECK(up.at_index(k) <= up.at_index(k - 1) + 1e-12);

  // the single-start helper reads the same number
  CHECK(survival_up(gen, 1.4, 1.0, 0.8) == up.at(*grid, 1.0));
  CHECK(up.at(*grid, 1.0) == up.at_index(grid->index_of(1.0)));

  SurvivalProfile dn = survival_profile(gen, 1.0, Passage::down, 0.8);
  CHECK(dn.lo == grid->index_of(1.0) + 1);
  CHECK(dn.hi == grid->size() - 1);
  for (std::size_t k = dn.lo + 1; k <= dn.hi; ++k)
    CHECK(dn.at_index(k) >= dn.at_index(k - 1) - 1e-12);
}

TEST_CASE("regimes carry their own survival") {
  ModelSpec spec{
      RegimeSwitchingBS{{0.15, 0.45}, {{-0.75, 0.75}, {0.25, -0.25}}}, 0.05,
      0.02};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.5, 2.0, {1.0, 1.4}, 250));
  Generator gen = build_generator(spec, grid);
  SurvivalProfile up = survival_profile(gen, 1.4, Passage::up, 1.0);
  CHECK(up.regimes == 2);
  CHECK(up.values.size() == 2 * (up.hi - up.lo + 1));
  const double calm = up.at(*grid, 1.0, 0);
  const double wild = up.at(*grid, 1.0, 1);
  // the calm regime crosses less often even though it may switch later
  CHECK(calm > wild);
  CHECK(survival_up(gen, 1.4, 1.0, 1.0, 1) == wild);
}

TEST_CASE("rejects off-grid and out-of-region arguments") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = std::make_shared<const Grid>(
      build_aligned_grid(0.5, 2.0, {1.0, 1.4}, 100));
  Generator gen = build_generator(spec, grid);
  CHECK_THROWS_AS(survival_up(gen, 1.41, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(survival_up(gen, 1.4, 1.4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(survival_up(gen, 1.4, 1.7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(survival_down(gen, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(survival_down(gen, 1.0, 0.8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(survival_up(gen, 1.4, 1.0, -0.5), std::invalid_argument);
  SurvivalProfile up = survival_profile(gen, 1.4, Passage::up, 1.0);
  CHECK_THROWS_AS(up.at_index(grid->index_of(1.4)), std::invalid_argument);
}
