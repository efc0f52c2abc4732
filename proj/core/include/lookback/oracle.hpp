#pragma once

#include <cstdint>

#include "lookback/model.hpp"
#include "lookback/pricer.hpp"

namespace lookback {

// Black-Scholes floating-strike lookback put, continuous monitoring,
// seasoned running max; handles r == d
double bs_closed_form_floating_put(const LookbackContract& c,
                                   const ModelSpec& model);

struct McConfig {
  std::size_t paths = 1'000'000;
  int steps_per_year = 2000;
  std::uint64_t seed = 12345;
  bool antithetic = true;
  int threads = 1;
};

struct McResult {
  double price = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  int steps = 0;
};

// pathwise simulation with discretely monitored extrema; results are
// bitwise independent of the thread count
McResult mc_price(const LookbackContract& c, const ModelSpec& model,
                  const McConfig& cfg = {});

// allowance for the discrete-monitoring bias of mc_price, derived from the
// expected extremum implied by a reference price for the same contract
double mc_bias_allowance(const LookbackContract& c, const ModelSpec& model,
                         double reference_price, int steps_per_year);

struct FdConfig {
  int n_x = 400;
  int n_t = 200;
  double m_bar = 3.0;  // upper edge of the price/max lattice
};

// Crank-Nicolson sweep on the triangular (price, running max) lattice;
// floating put under a one-dimensional diffusion. x and the running max must
// land on lattice points.
double fd_price_floating_put(const LookbackContract& c, const ModelSpec& model,
                             const FdConfig& cfg = {});

// P(diffusion started at x hits `lower` before `upper`), via the scale
// function computed by adaptive quadrature of the scale density
double scale_hitting_prob(const ModelSpec& model, double lower, double upper,
                          double x, double abs_tol = 1e-10);

}  // namespace lookback
