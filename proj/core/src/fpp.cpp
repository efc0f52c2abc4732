#include "lookback/fpp.hpp"

#include <stdexcept>

namespace lookback {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("fpp: " + msg);
}

}  // namespace

double SurvivalProfile::at_index(std::size_t state, int regime) const {
  if (state < lo || state > hi) fail("start outside the surviving window");
  if (regime < 0 || regime >= regimes) fail("regime out of range");
  return values[static_cast<std::size_t>(regime) * (hi - lo + 1) +
                (state - lo)];
}

double SurvivalProfile::at(const Grid& grid, double start, int regime) const {
  return at_index(grid.index_of(start), regime);
}

SurvivalProfile survival_profile(const Generator& gen, double barrier,
                                 Passage dir, double horizon,
                                 const ExpmOptions& opts) {
  if (horizon < 0.0) fail("negative horizon");
  SubGenerator sub = dir == Passage::up ? restrict_below(gen, barrier)
                                        : restrict_above(gen, barrier);
  std::vector<double> ones(sub.dim(), 1.0);
  SurvivalProfile p;
  p.lo = sub.lo;
  p.hi = sub.hi;
  p.regimes = gen.regimes;
  p.values = expm_action(sub, horizon, std::move(ones), opts);
  return p;
}

double survival_up(const Generator& gen, double barrier, double start,
                   double horizon, int regime, const ExpmOptions& opts) {
  const std::size_t ix = gen.grid->index_of(start);
  const std::size_t j = gen.grid->index_of(barrier);
  if (ix >= j) fail("start must lie strictly below an up barrier");
  return survival_profile(gen, barrier, Passage::up, horizon, opts)
      .at_index(ix, regime);
}

double survival_down(const Generator& gen, double barrier, double start,
                     double horizon, int regime, const ExpmOptions& opts) {
  const std::size_t ix = gen.grid->index_of(start);
  const std::size_t j = gen.grid->index_of(barrier);
  if (ix <= j) fail("start must lie strictly above a down barrier");
  return survival_profile(gen, barrier, Passage::down, horizon, opts)
      .at_index(ix, regime);
}

}  // namespace lookback
