#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "lookback/grid.hpp"
#include "lookback/model.hpp"

namespace lookback {

// Markov-chain generator on a state grid. Diffusion/local terms are stored as
// a tridiagonal band per regime; the diagonal already carries jump and
// regime-switching out-rates, so full rows sum to zero (boundary rows are
// reflecting). Regime coupling moves probability between identical price
// states. States are ordered regime-major: index = regime * n + state.
struct Generator {
  std::shared_ptr<const Grid> grid;
  int regimes = 1;
  bool log_space = false;

  std::vector<std::vector<double>> lo, di, up;  // [regime][state]
  std::vector<std::vector<double>> regime_q;    // regimes x regimes, rows sum 0

  enum class Jumps { none, double_exponential, dense } jumps = Jumps::none;

  // scan data for double-exponential jumps: O(n) matvec via prefix recursions
  struct ExpScan {
    double lam_up = 0.0, lam_dn = 0.0;
    double eta_up = 0.0, eta_dn = 0.0;
    std::vector<double> exit_up;   // e^{-(b_i - z_i)/eta_up}; 0 at the top
    std::vector<double> entry_dn;  // e^{-(z_i - a_i)/eta_dn}; 0 at the bottom
    std::vector<double> decay_up, cellmass_up;  // per-cell width factors
    std::vector<double> decay_dn, cellmass_dn;
  } scan;

  std::vector<double> dense_rates;  // n x n row-major, zero diagonal

  std::size_t states() const { return grid->size(); }
  std::size_t dim() const { return states() * regimes; }

  // y = G v restricted to price states [wlo, whi] (all regimes); v and y are
  // regime-major over the window. Entries equal the full generator's.
  void apply_window(const double* v, double* y, std::size_t wlo,
                    std::size_t whi) const;
  double max_diag_mag(std::size_t wlo, std::size_t whi) const;
  std::vector<double> window_dense(std::size_t wlo, std::size_t whi) const;
};

// principal-submatrix view: rows/columns for price states [lo, hi]
struct SubGenerator {
  const Generator* base = nullptr;
  std::size_t lo = 0, hi = 0;

  std::size_t width() const { return hi - lo + 1; }
  std::size_t dim() const { return width() * base->regimes; }
  void matvec(const double* v, double* y) const {
    base->apply_window(v, y, lo, hi);
  }
  double max_diag_mag() const { return base->max_diag_mag(lo, hi); }
  std::vector<double> to_dense() const { return base->window_dense(lo, hi); }
};

Generator build_generator(const ModelSpec& model, std::shared_ptr<const Grid> grid);

// spatially homogeneous models on a log-price grid; accepts the flat-vol
// model too, so the one-passage evaluation can run it through the same door
Generator build_log_generator(const ModelSpec& model,
                              std::shared_ptr<const Grid> grid);

SubGenerator whole(const Generator& g);
SubGenerator restrict_below(const Generator& g, double barrier);  // states < barrier
SubGenerator restrict_above(const Generator& g, double barrier);  // states > barrier

// P(chain started at x hits the `lower` state before the `upper` state).
// All three must be grid points with lower < x < upper.
double hitting_prob_lower(const Generator& g, double lower, double upper,
                          double x, int regime = 0);

}  // namespace lookback
