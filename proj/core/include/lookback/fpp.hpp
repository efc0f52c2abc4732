#pragma once

#include <cstddef>
#include <vector>

#include "lookback/ctmc.hpp"
#include "lookback/expm.hpp"

namespace lookback {

enum class Passage { up, down };

// survival probabilities P(first passage past `barrier` > horizon) for every
// start state that is still alive, from a single matrix-exponential action
struct SurvivalProfile {
  std::size_t lo = 0, hi = 0;  // surviving price-state window
  int regimes = 1;
  std::vector<double> values;  // regime-major over the window

  double at(const Grid& grid, double start, int regime = 0) const;
  double at_index(std::size_t state, int regime = 0) const;
};

SurvivalProfile survival_profile(const Generator& gen, double barrier,
                                 Passage dir, double horizon,
                                 const ExpmOptions& opts = {});

// single-start conveniences; barrier must be on-grid and the start strictly
// inside the surviving region (start < barrier for up, > for down)
double survival_up(const Generator& gen, double barrier, double start,
                   double horizon, int regime = 0, const ExpmOptions& = {});
double survival_down(const Generator& gen, double barrier, double start,
                     double horizon, int regime = 0, const ExpmOptions& = {});

}  // namespace lookback
