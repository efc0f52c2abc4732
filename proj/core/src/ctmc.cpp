#include "lookback/ctmc.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lookback {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("ctmc: " + msg);
}

// three-point rates on a non-uniform grid; falls back to upwinding when the
// central weights would go negative
void fill_band(const std::vector<double>& z,
               const std::function<double(double)>& mu,
               const std::function<double(double)>& sig2,
               std::vector<double>& lo, std::vector<double>& di,
               std::vector<double>& up) {
  const std::size_t n = z.size();
  lo.assign(n, 0.0);
  di.assign(n, 0.0);
  up.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = z[i] - z[i - 1], hp = z[i + 1] - z[i];
    const double m = mu(z[i]), s2 = sig2(z[i]);
    double a = (s2 - m * hp) / (hm * (hm + hp));
    double c = (s2 + m * hm) / (hp * (hm + hp));
    if (a < 0.0 || c < 0.0) {
      a = s2 / (hm * (hm + hp)) + std::max(-m, 0.0) / hm;
      c = s2 / (hp * (hm + hp)) + std::max(m, 0.0) / hp;
    }
    lo[i] = a;
    up[i] = c;
    di[i] = -(a + c);
  }
  // reflecting ends
  {
    const double h0 = z[1] - z[0];
    const double m = mu(z[0]), s2 = sig2(z[0]);
    up[0] = s2 / (h0 * h0) + std::max(m, 0.0) / h0;
    di[0] = -up[0];
  }
  {
    const double h = z[n - 1] - z[n - 2];
    const double m = mu(z[n - 1]), s2 = sig2(z[n - 1]);
    lo[n - 1] = s2 / (h * h) + std::max(-m, 0.0) / h;
    di[n - 1] = -lo[n - 1];
  }
}

// upper incomplete gamma of negative order -y, y in [0, 1)
double gamma_upper_neg(double y, double t) {
  if (y == 0.0) return boost::math::expint(1, t);
  return (std::pow(t, -y) * std::exp(-t) - boost::math::tgamma(1.0 - y, t)) / y;
}

// int_alpha^beta u^{-1-y} e^{-rate u} du, 0 < alpha < beta (beta may be inf)
double tempered_cell_mass(double y, double rate, double alpha, double beta) {
  const double scale = std::pow(rate, y);
  const double hi = gamma_upper_neg(y, rate * alpha);
  const double lo = std::isinf(beta) ? 0.0 : gamma_upper_neg(y, rate * beta);
  return std::max(0.0, scale * (hi - lo));
}

void build_kou_scan(const Kou& k, const std::vector<double>& z,
                    Generator& gen) {
  const std::size_t n = z.size();
  auto& s = gen.scan;
  s.lam_up = k.lambda * k.q_up;
  s.lam_dn = k.lambda * k.q_down;
  s.eta_up = k.eta_up;
  s.eta_dn = k.eta_down;
  s.exit_up.assign(n, 0.0);
  s.entry_dn.assign(n, 0.0);
  s.decay_up.assign(n, 0.0);
  s.cellmass_up.assign(n, 1.0);
  s.decay_dn.assign(n, 0.0);
  s.cellmass_dn.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = (i == 0) ? -kInf : 0.5 * (z[i - 1] + z[i]);
    const double b = (i + 1 == n) ? kInf : 0.5 * (z[i] + z[i + 1]);
    s.exit_up[i] = (i + 1 == n) ? 0.0 : std::exp(-(b - z[i]) / k.eta_up);
    s.entry_dn[i] = (i == 0) ? 0.0 : std::exp(-(z[i] - a) / k.eta_down);
    if (std::isinf(b - a)) continue;  // end cells keep decay 0 / mass 1
    const double w = b - a;
    s.decay_up[i] = std::exp(-w / k.eta_up);
    s.cellmass_up[i] = -std::expm1(-w / k.eta_up);
    s.decay_dn[i] = std::exp(-w / k.eta_down);
    s.cellmass_dn[i] = -std::expm1(-w / k.eta_down);
  }
  // own-cell jumps are no-ops; everything else leaves the state
  for (std::size_t i = 0; i < n; ++i)
    gen.di[0][i] -= s.lam_up * s.exit_up[i] + s.lam_dn * s.entry_dn[i];
  gen.jumps = Generator::Jumps::double_exponential;
}

void build_cgmy_dense(const Cgmy& cg, const ModelSpec& model,
                      const std::vector<double>& z, Generator& gen) {
  const std::size_t n = z.size();
  std::vector<double> edge(n + 1);
  edge[0] = -kInf;
  edge[n] = kInf;
  for (std::size_t i = 1; i < n; ++i) edge[i] = 0.5 * (z[i - 1] + z[i]);

  // small-jump moments folded into the local part, cell by cell
  std::vector<double> s2_row(n), mu_row(n);
  const double drift = model.r - model.d - cgmy_kappa1(cg);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = std::isinf(edge[i]) ? kInf : z[i] - edge[i];
    const double right = std::isinf(edge[i + 1]) ? kInf : edge[i + 1] - z[i];
    const double eps = std::min(left, right);
    const double tm = cg.m * eps, tg = cg.g * eps;
    s2_row[i] = cg.c * (std::pow(cg.m, cg.y - 2.0) *
                            boost::math::tgamma_lower(2.0 - cg.y, tm) +
                        std::pow(cg.g, cg.y - 2.0) *
                            boost::math::tgamma_lower(2.0 - cg.y, tg));
    mu_row[i] = drift + cg.c * (std::pow(cg.m, cg.y - 1.0) *
                                    boost::math::tgamma_lower(1.0 - cg.y, tm) -
                                std::pow(cg.g, cg.y - 1.0) *
                                    boost::math::tgamma_lower(1.0 - cg.y, tg));
  }
  std::vector<double> zs(z);
  auto mu_fn = [&](double v) {
    return mu_row[std::lower_bound(zs.begin(), zs.end(), v) - zs.begin()];
  };
  auto s2_fn = [&](double v) {
    return s2_row[std::lower_bound(zs.begin(), zs.end(), v) - zs.begin()];
  };
  fill_band(z, mu_fn, s2_fn, gen.lo[0], gen.di[0], gen.up[0]);

  gen.dense_rates.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double rate;
      if (j > i)
        rate = cg.c * tempered_cell_mass(cg.y, cg.m, edge[j] - z[i],
                                         std::isinf(edge[j + 1])
                                             ? kInf
                                             : edge[j + 1] - z[i]);
      else
        rate = cg.c * tempered_cell_mass(
                          cg.y, cg.g, z[i] - edge[j + 1],
                          std::isinf(edge[j]) ? kInf : z[i] - edge[j]);
      gen.dense_rates[i * n + j] = rate;
      out += rate;
    }
    gen.di[0][i] -= out;
  }
  gen.jumps = Generator::Jumps::dense;
}

Generator make_base(std::shared_ptr<const Grid> grid, int regimes,
                    bool log_space) {
  if (!grid || grid->size() < 3) fail("need a grid with at least 3 points");
  Generator gen;
  gen.grid = std::move(grid);
  gen.regimes = regimes;
  gen.log_space = log_space;
  gen.lo.resize(regimes);
  gen.di.resize(regimes);
  gen.up.resize(regimes);
  return gen;
}

Generator build_homogeneous_log(const ModelSpec& model,
                                std::shared_ptr<const Grid> grid) {
  Generator gen = make_base(std::move(grid), 1, true);
  const auto& z = gen.grid->points;
  if (auto* k = std::get_if<Kou>(&model.dynamics)) {
    const double m = levy_log_drift(model);
    const double s2 = k->sigma * k->sigma;
    fill_band(z, [m](double) { return m; }, [s2](double) { return s2; },
              gen.lo[0], gen.di[0], gen.up[0]);
    if (k->lambda > 0.0) build_kou_scan(*k, z, gen);
  } else if (auto* cg = std::get_if<Cgmy>(&model.dynamics)) {
    build_cgmy_dense(*cg, model, z, gen);
  } else if (std::holds_alternative<BlackScholes>(model.dynamics)) {
    const double m = levy_log_drift(model);
    const double s2 = std::get<BlackScholes>(model.dynamics).sigma *
                      std::get<BlackScholes>(model.dynamics).sigma;
    fill_band(z, [m](double) { return m; }, [s2](double) { return s2; },
              gen.lo[0], gen.di[0], gen.up[0]);
  } else {
    fail("log-coordinate generator requires a spatially homogeneous model");
  }
  return gen;
}

}  // namespace

Generator build_log_generator(const ModelSpec& model,
                              std::shared_ptr<const Grid> grid) {
  model.validate();
  return build_homogeneous_log(model, std::move(grid));
}

Generator build_generator(const ModelSpec& model,
                          std::shared_ptr<const Grid> grid) {
  model.validate();
  if (model.is_levy()) return build_homogeneous_log(model, std::move(grid));

  if (auto* rs = std::get_if<RegimeSwitchingBS>(&model.dynamics)) {
    const int e_count = static_cast<int>(rs->sigmas.size());
    Generator gen = make_base(std::move(grid), e_count, false);
    const auto& z = gen.grid->points;
    gen.regime_q = rs->q;
    for (int e = 0; e < e_count; ++e) {
      auto lc = characteristics(model, e);
      fill_band(z, lc.mu, lc.sig2, gen.lo[e], gen.di[e], gen.up[e]);
      double out = 0.0;
      for (int e2 = 0; e2 < e_count; ++e2)
        if (e2 != e) out += rs->q[e][e2];
      for (auto& v : gen.di[e]) v -= out;
    }
    return gen;
  }

  Generator gen = make_base(std::move(grid), 1, false);
  auto lc = characteristics(model);
  fill_band(gen.grid->points, lc.mu, lc.sig2, gen.lo[0], gen.di[0], gen.up[0]);
  return gen;
}

void Generator::apply_window(const double* v, double* y, std::size_t wlo,
                             std::size_t whi) const {
  const std::size_t W = whi - wlo + 1;
  for (int e = 0; e < regimes; ++e) {
    const double* ve = v + static_cast<std::size_t>(e) * W;
    double* ye = y + static_cast<std::size_t>(e) * W;
    const auto& L = lo[e];
    const auto& D = di[e];
    const auto& U = up[e];
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t i = wlo + k;
      double acc = D[i] * ve[k];
      if (k > 0) acc += L[i] * ve[k - 1];
      if (k + 1 < W) acc += U[i] * ve[k + 1];
      ye[k] = acc;
    }
    for (int e2 = 0; e2 < regimes; ++e2) {
      if (e2 == e) continue;
      const double q = regime_q[e][e2];
      if (q == 0.0) continue;
      const double* vo = v + static_cast<std::size_t>(e2) * W;
      for (std::size_t k = 0; k < W; ++k) ye[k] += q * vo[k];
    }
  }
  if (jumps == Jumps::double_exponential) {
    const auto& s = scan;
    if (s.lam_up > 0.0) {
      double acc = 0.0;
      for (std::size_t k = W; k-- > 0;) {
        const std::size_t i = wlo + k;
        y[k] += s.lam_up * s.exit_up[i] * acc;
        acc = s.cellmass_up[i] * v[k] + s.decay_up[i] * acc;
      }
    }
    if (s.lam_dn > 0.0) {
      double acc = 0.0;
      for (std::size_t k = 0; k < W; ++k) {
        const std::size_t i = wlo + k;
        y[k] += s.lam_dn * s.entry_dn[i] * acc;
        acc = s.cellmass_dn[i] * v[k] + s.decay_dn[i] * acc;
      }
    }
  } else if (jumps == Jumps::dense) {
    const std::size_t n = states();
    for (std::size_t k = 0; k < W; ++k) {
      const double* row = dense_rates.data() + (wlo + k) * n + wlo;
      double acc = 0.0;  // diagonal rate is zero by construction
      for (std::size_t j = 0; j < W; ++j) acc += row[j] * v[j];
      y[k] += acc;
    }
  }
}

double Generator::max_diag_mag(std::size_t wlo, std::size_t whi) const {
  double m = 0.0;
  for (int e = 0; e < regimes; ++e)
    for (std::size_t i = wlo; i <= whi; ++i)
      m = std::max(m, std::abs(di[e][i]));
  return m;
}

std::vector<double> Generator::window_dense(std::size_t wlo,
                                            std::size_t whi) const {
  const std::size_t W = whi - wlo + 1;
  const std::size_t dim = W * regimes;
  std::vector<double> out(dim * dim, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& {
    return out[r * dim + c];
  };
  for (int e = 0; e < regimes; ++e) {
    const std::size_t off = static_cast<std::size_t>(e) * W;
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t i = wlo + k;
      at(off + k, off + k) = di[e][i];
      if (k > 0) at(off + k, off + k - 1) = lo[e][i];
      if (k + 1 < W) at(off + k, off + k + 1) = up[e][i];
    }
    for (int e2 = 0; e2 < regimes; ++e2) {
      if (e2 == e) continue;
      const double q = regime_q[e][e2];
      const std::size_t off2 = static_cast<std::size_t>(e2) * W;
      for (std::size_t k = 0; k < W; ++k) at(off + k, off2 + k) += q;
    }
  }
  if (jumps == Jumps::double_exponential) {
    const auto& s = scan;
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t i = wlo + k;
      double f = s.lam_up * s.exit_up[i];
      for (std::size_t k2 = k + 1; k2 < W; ++k2) {
        at(k, k2) += f * s.cellmass_up[wlo + k2];
        f *= s.decay_up[wlo + k2];
      }
      f = s.lam_dn * s.entry_dn[i];
      for (std::size_t k2 = k; k2-- > 0;) {
        at(k, k2) += f * s.cellmass_dn[wlo + k2];
        f *= s.decay_dn[wlo + k2];
      }
    }
  } else if (jumps == Jumps::dense) {
    const std::size_t n = states();
    for (std::size_t k = 0; k < W; ++k)
      for (std::size_t k2 = 0; k2 < W; ++k2)
        if (k != k2) at(k, k2) += dense_rates[(wlo + k) * n + (wlo + k2)];
  }
  return out;
}

SubGenerator whole(const Generator& g) {
  return SubGenerator{&g, 0, g.states() - 1};
}

SubGenerator restrict_below(const Generator& g, double barrier) {
  const std::size_t j = g.grid->index_of(barrier);
  if (j == 0) fail("no states below the barrier");
  return SubGenerator{&g, 0, j - 1};
}

SubGenerator restrict_above(const Generator& g, double barrier) {
  const std::size_t j = g.grid->index_of(barrier);
  if (j + 1 >= g.states()) fail("no states above the barrier");
  return SubGenerator{&g, j + 1, g.states() - 1};
}

double hitting_prob_lower(const Generator& g, double lower, double upper,
                          double x, int regime) {
  const auto& grid = *g.grid;
  const std::size_t il = grid.index_of(lower);
  const std::size_t iu = grid.index_of(upper);
  const std::size_t ix = grid.index_of(x);
  if (!(il < ix && ix < iu)) fail("need lower < x < upper on the grid");
  if (regime < 0 || regime >= g.regimes) fail("regime out of range");

  if (g.regimes == 1 && g.jumps == Generator::Jumps::none) {
    // nearest-neighbor chain: tridiagonal balance equations
    const std::size_t m = iu - il - 1;
    std::vector<double> c(m), dvec(m), rhs(m, 0.0);
    std::vector<double> a(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = il + 1 + k;
      a[k] = g.lo[0][i];
      dvec[k] = g.di[0][i];
      c[k] = g.up[0][i];
    }
    rhs[0] = -a[0];  // h(lower) = 1
    // Thomas sweep
    for (std::size_t k = 1; k < m; ++k) {
      const double w = a[k] / dvec[k - 1];
      dvec[k] -= w * c[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> h(m);
    h[m - 1] = rhs[m - 1] / dvec[m - 1];
    for (std::size_t k = m - 1; k-- > 0;)
      h[k] = (rhs[k] - c[k] * h[k + 1]) / dvec[k];
    return h[ix - il - 1];
  }

  // general case: dense linear solve on the interior window
  const std::size_t W = iu - il - 1;
  const std::size_t dim = W * g.regimes;
  if (dim > 4096) fail("interior too large for the dense hitting solver");
  std::vector<double> A = g.window_dense(il + 1, iu - 1);
  std::vector<double> rhs(dim, 0.0);
  // rates from interior rows into the absorbed lower set {state <= il}
  const std::size_t n = g.states();
  for (int e = 0; e < g.regimes; ++e) {
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t i = il + 1 + k;
      double into_low = 0.0;
      if (k == 0) into_low += g.lo[e][i];
      if (g.jumps == Generator::Jumps::dense) {
        for (std::size_t j = 0; j <= il; ++j)
          into_low += g.dense_rates[i * n + j];
      } else if (g.jumps == Generator::Jumps::double_exponential &&
                 g.scan.lam_dn > 0.0) {
        // total double-exponential mass at or below the edge above state il
        const auto& z = g.grid->points;
        const double b_il = 0.5 * (z[il] + z[il + 1]);
        into_low += g.scan.lam_dn * std::exp(-(z[i] - b_il) / g.scan.eta_dn);
      }
      rhs[static_cast<std::size_t>(e) * W + k] = -into_low;
    }
  }
  // Gaussian elimination with partial pivoting
  std::vector<double> h(dim, 0.0);
  {
    std::vector<double>& M = A;
    std::vector<std::size_t> piv(dim);
    for (std::size_t i = 0; i < dim; ++i) piv[i] = i;
    for (std::size_t col = 0; col < dim; ++col) {
      std::size_t best = col;
      for (std::size_t r = col + 1; r < dim; ++r)
        if (std::abs(M[r * dim + col]) > std::abs(M[best * dim + col]))
          best = r;
      if (best != col) {
        for (std::size_t cc = 0; cc < dim; ++cc)
          std::swap(M[col * dim + cc], M[best * dim + cc]);
        std::swap(rhs[col], rhs[best]);
      }
      const double p = M[col * dim + col];
      if (p == 0.0) fail("singular hitting system");
      for (std::size_t r = col + 1; r < dim; ++r) {
        const double w = M[r * dim + col] / p;
        if (w == 0.0) continue;
        for (std::size_t cc = col; cc < dim; ++cc)
          M[r * dim + cc] -= w * M[col * dim + cc];
        rhs[r] -= w * rhs[col];
      }
    }
    for (std::size_t r = dim; r-- > 0;) {
      double acc = rhs[r];
      for (std::size_t cc = r + 1; cc < dim; ++cc)
        acc -= M[r * dim + cc] * h[cc];
      h[r] = acc / M[r * dim + r];
    }
  }
  return h[static_cast<std::size_t>(regime) * W + (ix - il - 1)];
}

}  // namespace lookback
