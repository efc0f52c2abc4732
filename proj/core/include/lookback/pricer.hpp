#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lookback/expm.hpp"
#include "lookback/grid.hpp"
#include "lookback/model.hpp"
#include "lookback/quad.hpp"

namespace lookback {

enum class OptionKind { floating_put, floating_call, fixed_put, fixed_call };

OptionKind option_kind_from_string(const std::string& s);
std::string to_string(OptionKind k);

// lookback contract seen at valuation time t with running extremum M (max,
// floating_put / fixed_call) or m (min, floating_call / fixed_put)
struct LookbackContract {
  OptionKind kind = OptionKind::floating_put;
  double t = 0.0;
  double maturity = 1.0;
  double x = 1.0;  // spot
  double running_max = std::numeric_limits<double>::quiet_NaN();
  double running_min = std::numeric_limits<double>::quiet_NaN();
  double strike = std::numeric_limits<double>::quiet_NaN();

  double tau() const { return maturity - t; }
  bool max_type() const {
    return kind == OptionKind::floating_put || kind == OptionKind::fixed_call;
  }
  void validate() const;
};

struct PricingConfig {
  std::size_t n = 400;  // target grid size
  QuadKind quad = QuadKind::gauss_legendre;
  int quad_n = 11;
  double truncation = std::numeric_limits<double>::quiet_NaN();  // auto
  double grid_lower = std::numeric_limits<double>::quiet_NaN();  // auto
  double grid_upper = std::numeric_limits<double>::quiet_NaN();  // auto
  double truncation_mult = 8.0;  // sigma multiples in the auto bounds
  ExpmOptions expm;
  int regime0 = 0;
  int threads = 1;
};

struct PriceResult {
  double price = 0.0;
  std::size_t grid_points = 0;
  int expm_calls = 0;
  double wall_seconds = 0.0;
  double grid_lower = 0.0, grid_upper = 0.0;
  double floor_strip = 0.0;  // exact contribution below the grid (min kinds)
  std::vector<double> nodes;       // quadrature nodes (price space)
  std::vector<double> survivals;   // first-passage survival at each node
};

// quadrature interval and grid geometry for a contract; resolution-dependent
// alignment points are chosen at plan time so refined grids stay nested
struct PricingPlan {
  Grid grid;
  bool log_space = false;
  double quad_a = 0.0, quad_b = 0.0;
  double floor_strip = 0.0;
};

PricingPlan plan_pricing(const LookbackContract& c, const ModelSpec& model,
                         const PricingConfig& cfg);

PriceResult price_on_grid(const LookbackContract& c, const ModelSpec& model,
                          const PricingConfig& cfg, const Grid& grid);

PriceResult price(const LookbackContract& c, const ModelSpec& model,
                  const PricingConfig& cfg = {});

// spatially homogeneous models only: every node's survival read off one
// passage problem with the barrier at log-ratio zero (one expm total)
PriceResult price_levy_fastpath(const LookbackContract& c,
                                const ModelSpec& model,
                                const PricingConfig& cfg = {});

// textbook evaluation of the uniform-grid floating-put sum; the chain grid
// must be uniform across the quadrature range
PriceResult price_under_ctmc_direct(const LookbackContract& c,
                                    const ModelSpec& model,
                                    const PricingConfig& cfg = {});

double richardson2(double u_n, double u_2n);

struct Extrapolation3 {
  bool ok = false;
  double order = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();
};
// three dyadic resolutions; falls back to the finest value when the
// differences do not contract
Extrapolation3 extrapolate3(double u_n, double u_2n, double u_4n);

// least-squares slope of log|error| against log n, sign-flipped; zero errors
// are dropped with a warning
double estimate_order(const std::vector<std::pair<double, double>>& n_and_err);

}  // namespace lookback
