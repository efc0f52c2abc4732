#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstddef>
#include <memory>
#include <random>
#include <vector>

#include "lookback/expm.hpp"

using namespace lookback;

namespace {

std::shared_ptr<const Grid> uniform_grid(double a, double b, std::size_t n) {
  return std::make_shared<const Grid>(build_aligned_grid(a, b, {}, n));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("uniformization agrees with scaling and squaring") {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int trial = 0; trial < 12; ++trial) {
    const double sig = 0.1 + 0.5 * u(rng);
    const double r = 0.1 * u(rng);
    const double d = 0.1 * u(rng);
    ModelSpec spec{BlackScholes{sig}, r, d};
    if (trial % 3 == 1) {
      const double q12 = 0.2 + u(rng), q21 = 0.2 + u(rng);
      spec.dynamics = RegimeSwitchingBS{{sig, sig + 0.2 * u(rng)},
                                        {{-q12, q12}, {q21, -q21}}};
    } else if (trial % 3 == 2) {
      spec.dynamics = Kou{sig, 1.0 + 2.0 * u(rng), 0.4, 0.6,
                                       0.08 + 0.05 * u(rng),
                                       0.08 + 0.05 * u(rng)};
    }
    const std::size_t n = 40 + static_cast<std::size_t>(20.0 * u(rng));
    auto grid = uniform_grid(0.7, 1.6, n);
    Generator gen = build_generator(spec, grid);

    // random window, total dimension capped at 50
    const int regimes = gen.regimes;
    const std::size_t maxw = static_cast<std::size_t>(50 / regimes);
    std::size_t lo = static_cast<std::size_t>(u(rng) * 5.0);
    std::size_t w = 10 + static_cast<std::size_t>(u(rng) * (maxw - 10.0));
    std::size_t hi = std::min(lo + w - 1, grid->size() - 1);
    SubGenerator sub{&gen, lo, hi};
    REQUIRE(sub.dim() <= 50);

    const double t = 0.05 + 1.5 * u(rng);
    auto v = random_vec(rng, sub.dim());

    auto a = expm_action(sub, t, v, {ExpmMethod::uniformization, 1e-13});
    auto b = expm_action(sub, t, v, {ExpmMethod::scaling_squaring, 1e-13});
    CHECK(max_abs_diff(a, b) < 1e-10);
  }
}

TEST_CASE("conservative generator preserves the ones vector") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = uniform_grid(0.5, 2.0, 80);
  Generator gen = build_generator(spec, grid);
  SubGenerator sub = whole(gen);
  std::vector<double> ones(sub.dim(), 1.0);
  auto w = expm_action(sub, 1.0, ones);
  for (double x : w) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("strict sub-generator loses mass") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = uniform_grid(0.5, 2.0, 80);
  Generator gen = build_generator(spec, grid);
  SubGenerator sub = restrict_below(gen, grid->points[60]);
  std::vector<double> ones(sub.dim(), 1.0);
  auto w = expm_action(sub, 1.0, ones);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] <= 1.0 + 1e-12);
    CHECK(w[i] >= 0.0);
  }
  // states adjacent to the removed barrier must have leaked noticeably
  CHECK(w.back() < 0.9);
}

TEST_CASE("semigroup property") {
  ModelSpec spec{RegimeSwitchingBS{{0.2, 0.4}, {{-0.75, 0.75}, {0.25, -0.25}}},
                 0.05, 0.02};
  auto grid = uniform_grid(0.6, 1.8, 50);
  Generator gen = build_generator(spec, grid);
  SubGenerator sub = restrict_below(gen, grid->points[40]);
  std::mt19937_64 rng(7);
  auto v = random_vec(rng, sub.dim());
  const double s = 0.35, t = 0.85;
  auto direct = expm_action(sub, s + t, v);
  auto stepped = expm_action(sub, s, expm_action(sub, t, v));
  CHECK(max_abs_diff(direct, stepped) < 1e-9);
}

TEST_CASE("zero horizon is the identity") {
  ModelSpec spec{BlackScholes{0.25}, 0.03, 0.0};
  auto grid = uniform_grid(0.8, 1.4, 30);
  Generator gen = build_generator(spec, grid);
  SubGenerator sub = whole(gen);
  std::mt19937_64 rng(11);
  auto v = random_vec(rng, sub.dim());
  auto w = expm_action(sub, 0.0, v);
  CHECK(w == v);
}

TEST_CASE("uniformization keeps probabilities nonnegative") {
  ModelSpec spec{Kou{0.3, 3.0, 0.5, 0.5, 0.1, 0.1}, 0.05, 0.0};
  auto grid = uniform_grid(0.5, 2.0, 120);
  Generator gen = build_generator(spec, grid);
  SubGenerator sub = restrict_below(gen, grid->points[100]);
  std::vector<double> v(sub.dim(), 0.0);
  v[sub.dim() / 2] = 1.0;
  auto w = expm_action(sub, 2.0, v);
  for (double x : w) CHECK(x >= -1e-14);
}

TEST_CASE("method names parse") {
  CHECK(expm_method_from_string("uniformization") ==
        ExpmMethod::uniformization);
  CHECK(expm_method_from_string("scaling_squaring") ==
        ExpmMethod::scaling_squaring);
  CHECK_THROWS_AS(expm_method_from_string("pade"), std::invalid_argument);
}

TEST_CASE("rejects bad arguments") {
  ModelSpec spec{BlackScholes{0.3}, 0.05, 0.02};
  auto grid = uniform_grid(0.8, 1.4, 20);
  Generator gen = build_generator(spec, grid);
  SubGenerator sub = whole(gen);
  std::vector<double> v(sub.dim(), 1.0);
  CHECK_THROWS_AS(expm_action(sub, -0.5, v), std::invalid_argument);
  std::vector<double> wrong(sub.dim() + 1, 1.0);
  CHECK_THROWS_AS(expm_action(sub, 1.0, wrong), std::invalid_argument);
}
