#include "lookback/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

namespace lookback {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("oracle: " + msg);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct PairStats {
  double sum = 0.0, sumsq = 0.0;
  std::size_t count = 0;
};

struct PathState {
  double s;
  double extremum;  // running max or min, by contract kind
};

double payoff(const LookbackContract& c, double s_t, double ext) {
  switch (c.kind) {
    case OptionKind::floating_put: return ext - s_t;
    case OptionKind::floating_call: return s_t - ext;
    case OptionKind::fixed_call: return std::max(ext - c.strike, 0.0);
    case OptionKind::fixed_put: return std::max(c.strike - ext, 0.0);
  }
  fail("bad option kind");
}

void monitor(PathState& p, bool max_type) {
  p.extremum = max_type ? std::max(p.extremum, p.s) : std::min(p.extremum, p.s);
}

// one antithetic pair (or a single path when `anti` is false); shared event
// draws, mirrored gaussians
template <class Rng>
std::pair<double, double> simulate_pair(const LookbackContract& c,
                                        const ModelSpec& model, double tau,
                                        int steps, bool anti, Rng& rng,
                                        std::normal_distribution<double>& nd,
                                        std::uniform_real_distribution<double>& ud) {
  const bool mt = c.max_type();
  const double dt = tau / steps;
  const double start_ext = mt ? c.running_max : c.running_min;
  PathState a{c.x, start_ext}, b{c.x, start_ext};

  if (const auto* bs = std::get_if<BlackScholes>(&model.dynamics)) {
    const double mu = (model.r - model.d - 0.5 * bs->sigma * bs->sigma) * dt;
    const double vol = bs->sigma * std::sqrt(dt);
    for (int k = 0; k < steps; ++k) {
      const double z = nd(rng);
      a.s *= std::exp(mu + vol * z);
      monitor(a, mt);
      if (anti) {
        b.s *= std::exp(mu - vol * z);
        monitor(b, mt);
      }
    }
  } else if (const auto* cev = std::get_if<Cev>(&model.dynamics)) {
    const double drift = model.r - model.d;
    const double sqdt = std::sqrt(dt);
    for (int k = 0; k < steps; ++k) {
      const double z = nd(rng);
      const double va = cev->sigma * std::pow(std::max(a.s, 0.0), cev->beta + 1.0);
      a.s = std::max(a.s + drift * a.s * dt + va * sqdt * z, 0.0);
      monitor(a, mt);
      if (anti) {
        const double vb =
            cev->sigma * std::pow(std::max(b.s, 0.0), cev->beta + 1.0);
        b.s = std::max(b.s + drift * b.s * dt - vb * sqdt * z, 0.0);
        monitor(b, mt);
      }
    }
  } else if (const auto* rs = std::get_if<RegimeSwitchingBS>(&model.dynamics)) {
    // regime trajectory is shared by the pair; gaussians flip per segment
    const int m = static_cast<int>(rs->sigmas.size());
    int regime = 0;
    double t = 0.0;
    double t_next = 0.0;
    {
      const double rate = -rs->q[regime][regime];
      t_next = rate > 0.0
                   ? -std::log(1.0 - ud(rng)) / rate
                   : std::numeric_limits<double>::infinity();
    }
    for (int k = 0; k < steps; ++k) {
      double seg_end = (k + 1) * dt;
      while (t < seg_end) {
        const double upto = std::min(seg_end, t_next);
        const double h = upto - t;
        if (h > 0.0) {
          const double sig = rs->sigmas[regime];
          const double mu = (model.r - model.d - 0.5 * sig * sig) * h;
          const double vol = sig * std::sqrt(h);
          const double z = nd(rng);
          a.s *= std::exp(mu + vol * z);
          monitor(a, mt);
          if (anti) {
            b.s *= std::exp(mu - vol * z);
            monitor(b, mt);
          }
        }
        t = upto;
        if (t_next <= seg_end) {
          // jump to the next regime in proportion to the off-diagonal rates
          const double out = -rs->q[regime][regime];
          double u = ud(rng) * out;
          int next = regime;
          for (int f = 0; f < m; ++f) {
            if (f == regime) continue;
            u -= rs->q[regime][f];
            if (u <= 0.0) {
              next = f;
              break;
            }
          }
          regime = next;
          const double rate = -rs->q[regime][regime];
          t_next = t + (rate > 0.0
                            ? -std::log(1.0 - ud(rng)) / rate
                            : std::numeric_limits<double>::infinity());
        }
      }
    }
  } else if (const auto* kou = std::get_if<Kou>(&model.dynamics)) {
    const double zeta = kou_zeta(*kou);
    const double mu =
        (model.r - model.d - 0.5 * kou->sigma * kou->sigma -
         kou->lambda * zeta) *
        dt;
    const double vol = kou->sigma * std::sqrt(dt);
    std::poisson_distribution<int> pois(kou->lambda * dt);
    for (int k = 0; k < steps; ++k) {
      const double z = nd(rng);
      double jump = 0.0;
      const int nj = pois(rng);
      for (int j = 0; j < nj; ++j) {
        const double pick = ud(rng);
        const double e = -std::log(1.0 - ud(rng));
        jump += pick < kou->q_up ? kou->eta_up * e : -kou->eta_down * e;
      }
      a.s *= std::exp(mu + vol * z + jump);
      monitor(a, mt);
      if (anti) {
        b.s *= std::exp(mu - vol * z + jump);
        monitor(b, mt);
      }
    }
  } else {
    fail("no path simulation for this model");
  }

  const double pa = payoff(c, a.s, a.extremum);
  const double pb = anti ? payoff(c, b.s, b.extremum) : pa;
  return {pa, pb};
}

}  // namespace

double bs_closed_form_floating_put(const LookbackContract& c,
                                   const ModelSpec& model) {
  c.validate();
  if (c.kind != OptionKind::floating_put)
    fail("closed form covers the floating put");
  const auto* bs = std::get_if<BlackScholes>(&model.dynamics);
  if (!bs) fail("closed form needs the flat-volatility model");
  const double tau = c.tau();
  if (tau == 0.0) return c.running_max - c.x;

  const double sig = bs->sigma;
  const double b = model.r - model.d;
  const double x = c.x, big_m = c.running_max;
  const double root = sig * std::sqrt(tau);
  const double d1 = (std::log(x / big_m) + (b + 0.5 * sig * sig) * tau) / root;
  const double d2 = d1 - root;
  const double df_r = std::exp(-model.r * tau);
  const double df_d = std::exp(-model.d * tau);

  const double base =
      big_m * df_r * norm_cdf(-d2) - x * df_d * norm_cdf(-d1);
  double refl;
  if (std::abs(b) < 1e-9) {
    // b -> 0 limit of the reflection term
    refl = x * root * (d1 * norm_cdf(d1) + norm_pdf(d1));
  } else {
    const double kappa = 2.0 * b / (sig * sig);
    refl = x * (sig * sig / (2.0 * b)) *
           (std::exp(b * tau) * norm_cdf(d1) -
            std::pow(x / big_m, -kappa) *
                norm_cdf(d1 - 2.0 * b * std::sqrt(tau) / sig));
  }
  return base + df_r * refl;
}

McResult mc_price(const LookbackContract& c, const ModelSpec& model,
                  const McConfig& cfg) {
  c.validate();
  model.validate();
  if (std::holds_alternative<Cgmy>(model.dynamics))
    fail("no path simulation for infinite-activity jumps");
  if (cfg.paths < 2) fail("need at least two paths");
  const double tau = c.tau();

  McResult res;
  if (tau == 0.0) {
    const double ext = c.max_type() ? c.running_max : c.running_min;
    res.price = payoff(c, c.x, ext);
    res.paths = cfg.paths;
    return res;
  }
  const int steps =
      std::max(1, static_cast<int>(std::ceil(cfg.steps_per_year * tau)));
  const double disc = std::exp(-model.r * tau);

  constexpr int kChunks = 64;
  const std::size_t units =
      cfg.antithetic ? cfg.paths / 2 : cfg.paths;  // pairs or single paths
  if (units == 0) fail("need at least one antithetic pair");

  std::vector<PairStats> stats(kChunks);
  std::vector<std::uint64_t> chunk_seed(kChunks);
  std::uint64_t sm = cfg.seed;
  for (int i = 0; i < kChunks; ++i) chunk_seed[i] = splitmix64(sm);

  auto run_chunk = [&](int ci) {
    const std::size_t base = units / kChunks, rem = units % kChunks;
    const std::size_t mine =
        base + (static_cast<std::size_t>(ci) < rem ? 1 : 0);
    std::mt19937_64 rng(chunk_seed[ci]);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    PairStats st;
    for (std::size_t p = 0; p < mine; ++p) {
      auto [pa, pb] =
          simulate_pair(c, model, tau, steps, cfg.antithetic, rng, nd, ud);
      const double v = cfg.antithetic ? 0.5 * (pa + pb) : pa;
      st.sum += v;
      st.sumsq += v * v;
      ++st.count;
    }
    stats[ci] = st;
  };

  const int threads = std::max(1, std::min(cfg.threads, kChunks));
  if (threads == 1) {
    for (int ci = 0; ci < kChunks; ++ci) run_chunk(ci);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (int ci = t; ci < kChunks; ci += threads) run_chunk(ci);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }

  // reduce in chunk order so the result does not depend on the thread count
  double sum = 0.0, sumsq = 0.0;
  std::size_t count = 0;
  for (const auto& st : stats) {
    sum += st.sum;
    sumsq += st.sumsq;
    count += st.count;
  }
  const double mean = sum / static_cast<double>(count);
  const double var =
      std::max(0.0, sumsq / static_cast<double>(count) - mean * mean);
  res.price = disc * mean;
  res.std_error =
      disc * std::sqrt(var / static_cast<double>(count));
  res.paths = cfg.antithetic ? 2 * count : count;
  res.steps = steps;
  return res;
}

double mc_bias_allowance(const LookbackContract& c, const ModelSpec& model,
                         double reference_price, int steps_per_year) {
  const double tau = c.tau();
  if (tau == 0.0) return 0.0;
  const int steps =
      std::max(1, static_cast<int>(std::ceil(steps_per_year * tau)));
  const double dt = tau / steps;
  const double grow_r = std::exp(model.r * tau);
  const double disc_d = std::exp(-model.d * tau);

  double scale = 0.0;  // expected terminal extremum implied by the reference
  switch (c.kind) {
    case OptionKind::floating_put:
      scale = grow_r * (reference_price + disc_d * c.x);
      break;
    case OptionKind::fixed_call:
      scale = grow_r * reference_price + c.strike;
      break;
    case OptionKind::floating_call:
      scale = grow_r * (disc_d * c.x - reference_price);
      break;
    case OptionKind::fixed_put:
      scale = c.strike - grow_r * reference_price;
      break;
  }
  scale = std::max(scale, c.x);
  const double sig = effective_sigma(model, scale);
  return 0.75 * sig * scale * std::sqrt(dt) * std::exp(-model.r * tau);
}

double fd_price_floating_put(const LookbackContract& c, const ModelSpec& model,
                             const FdConfig& cfg) {
  c.validate();
  model.validate();
  if (c.kind != OptionKind::floating_put)
    fail("lattice sweep covers the floating put");
  if (model.is_levy() || model.is_regime_switching())
    fail("lattice sweep needs a one-dimensional diffusion");
  if (cfg.n_x < 8 || cfg.n_t < 1) fail("lattice too small");
  const double tau = c.tau();
  if (tau == 0.0) return c.running_max - c.x;

  const int nx = cfg.n_x, nt = cfg.n_t;
  const double smax = cfg.m_bar * std::max(c.x, c.running_max);
  const double dx = smax / nx;
  const double dt = tau / nt;

  auto lattice_index = [&](double v, const char* what) {
    const double raw = v / dx;
    const long idx = std::lround(raw);
    if (std::abs(raw - static_cast<double>(idx)) > 1e-9)
      fail(std::string(what) + " does not land on the lattice");
    return static_cast<int>(idx);
  };
  const int ix = lattice_index(c.x, "spot");
  const int jm = lattice_index(c.running_max, "running max");
  if (ix <= 0 || jm >= nx) fail("contract too close to the lattice edge");

  LocalCharacteristics lc = characteristics(model, 0);
  if (lc.log_space) fail("lattice sweep runs in price space");

  // one-dimensional operator coefficients at S_i = i dx
  std::vector<double> lo(nx, 0.0), di(nx, 0.0), up(nx, 0.0);
  for (int i = 1; i < nx; ++i) {
    const double s = i * dx;
    const double s2 = lc.sig2(s);
    const double mu = lc.mu(s);
    lo[i] = 0.5 * s2 / (dx * dx) - 0.5 * mu / dx;
    di[i] = -s2 / (dx * dx) - model.r;
    up[i] = 0.5 * s2 / (dx * dx) + 0.5 * mu / dx;
  }

  // triangular sheet: cols[j][i] = value at (S = i dx, M = j dx), i <= j
  std::vector<std::vector<double>> cols(nx + 1), prev(nx + 1);
  for (int j = 0; j <= nx; ++j) {
    cols[j].assign(j + 1, 0.0);
    for (int i = 0; i <= j; ++i) cols[j][i] = (j - i) * dx;
  }

  prev = cols;
  std::vector<double> sub(nx), diag(nx), sup(nx), rhs(nx);
  for (int k = nt - 1; k >= 0; --k) {
    // every entry of `cols` is rewritten below, so a swap suffices
    std::swap(prev, cols);
    const double t_new = k * dt;
    // top column pinned to its payoff
    for (int i = 0; i <= nx; ++i) cols[nx][i] = (nx - i) * dx;
    for (int j = nx - 1; j >= 1; --j) {
      const double bottom = std::exp(-model.r * (tau - t_new)) * j * dx;
      const double diag_bc =
          j == nx - 1 ? dx
                      : (4.0 * cols[j + 1][j] - cols[j + 2][j]) / 3.0;
      cols[j][0] = bottom;
      cols[j][j] = diag_bc;
      const int m = j - 1;  // interior unknowns i = 1..j-1
      if (m <= 0) continue;
      for (int i = 1; i <= m; ++i) {
        const double u_im = prev[j][i - 1], u_i = prev[j][i],
                     u_ip = prev[j][i + 1];
        rhs[i] = u_i + 0.5 * dt * (lo[i] * u_im + di[i] * u_i + up[i] * u_ip);
        sub[i] = -0.5 * dt * lo[i];
        diag[i] = 1.0 - 0.5 * dt * di[i];
        sup[i] = -0.5 * dt * up[i];
      }
      rhs[1] -= sub[1] * bottom;
      rhs[m] -= sup[m] * diag_bc;
      // Thomas
      for (int i = 2; i <= m; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      cols[j][m] = rhs[m] / diag[m];
      for (int i = m - 1; i >= 1; --i)
        cols[j][i] = (rhs[i] - sup[i] * cols[j][i + 1]) / diag[i];
    }
    cols[0][0] = 0.0;  // degenerate corner, never read
  }

  return cols[jm][ix];
}

namespace {

// adaptive Simpson with absolute tolerance
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double scale_hitting_prob(const ModelSpec& model, double lower, double upper,
                          double x, double abs_tol) {
  model.validate();
  if (model.is_levy() || model.is_regime_switching())
    fail("scale function needs a one-dimensional diffusion");
  if (!(lower < x && x < upper)) fail("need lower < x < upper");

  LocalCharacteristics lc = characteristics(model, 0);
  auto drift_over_var = [&](double z) {
    const double s2 = lc.sig2(z);
    if (!(s2 > 0.0)) fail("degenerate diffusion coefficient");
    return 2.0 * lc.mu(z) / s2;
  };
  auto scale_density = [&](double z) {
    return std::exp(-adaptive_simpson(drift_over_var, lower, z, 1e-12));
  };
  const double num = adaptive_simpson(scale_density, x, upper, abs_tol);
  const double den =
      num + adaptive_simpson(scale_density, lower, x, abs_tol);
  return num / den;
}

}  // namespace lookback
