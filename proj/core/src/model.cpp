#include "lookback/model.hpp"

#include <cmath>
#include <string>

namespace lookback {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("model: " + msg);
}

void check_rate_matrix(const std::vector<std::vector<double>>& q,
                       std::size_t n) {
  if (q.size() != n) fail("rate matrix has wrong row count");
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i].size() != n) fail("rate matrix is not square");
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && q[i][j] < 0.0) fail("negative off-diagonal switching rate");
      sum += q[i][j];
    }
    if (std::abs(sum) > 1e-12) fail("rate matrix rows must sum to zero");
  }
}

}  // namespace

bool ModelSpec::is_levy() const {
  return std::holds_alternative<Kou>(dynamics) ||
         std::holds_alternative<Cgmy>(dynamics);
}

bool ModelSpec::is_regime_switching() const {
  return std::holds_alternative<RegimeSwitchingBS>(dynamics);
}

int ModelSpec::regime_count() const {
  if (auto* rs = std::get_if<RegimeSwitchingBS>(&dynamics))
    return static_cast<int>(rs->sigmas.size());
  return 1;
}

void ModelSpec::validate() const {
  if (!(r > -1.0) || !std::isfinite(r)) fail("bad rate r");
  if (!(d > -1.0) || !std::isfinite(d)) fail("bad dividend yield d");
  if (auto* bs = std::get_if<BlackScholes>(&dynamics)) {
    if (!(bs->sigma > 0.0)) fail("sigma must be positive");
  } else if (auto* cev = std::get_if<Cev>(&dynamics)) {
    if (!(cev->sigma > 0.0)) fail("sigma must be positive");
    if (!std::isfinite(cev->beta)) fail("bad beta");
  } else if (auto* rs = std::get_if<RegimeSwitchingBS>(&dynamics)) {
    if (rs->sigmas.size() < 2) fail("need at least two regimes");
    for (double s : rs->sigmas)
      if (!(s > 0.0)) fail("sigma must be positive in every regime");
    check_rate_matrix(rs->q, rs->sigmas.size());
  } else if (auto* k = std::get_if<Kou>(&dynamics)) {
    if (!(k->sigma > 0.0)) fail("sigma must be positive");
    if (!(k->lambda >= 0.0)) fail("lambda must be nonnegative");
    if (!(k->q_up >= 0.0) || !(k->q_down >= 0.0) ||
        std::abs(k->q_up + k->q_down - 1.0) > 1e-12)
      fail("jump direction probabilities must be nonnegative and sum to 1");
    if (!(k->eta_up > 0.0) || k->eta_up >= 1.0)
      fail("eta_up must lie in (0, 1)");
    if (!(k->eta_down > 0.0)) fail("eta_down must be positive");
  } else if (auto* c = std::get_if<Cgmy>(&dynamics)) {
    if (!(c->c > 0.0)) fail("c must be positive");
    if (!(c->g > 0.0)) fail("g must be positive");
    if (!(c->m > 1.0)) fail("m must exceed 1");
    if (!(c->y >= 0.0) || c->y >= 1.0)
      fail("y must lie in [0, 1)");
  }
}

double kou_zeta(const Kou& k) {
  return k.q_up / (1.0 - k.eta_up) + k.q_down / (1.0 + k.eta_down) - 1.0;
}

double cgmy_kappa1(const Cgmy& c) {
  // integral of (e^z - 1) against the jump measure
  if (c.y == 0.0) {
    // reduces to exponential-integral differences; use the log limit of the
    // power form: int (e^z-1) c e^{-m z} z^{-1} dz = c ln(m/(m-1)), plus the
    // mirrored downward part c ln(g/(g+1))
    return c.c * (std::log(c.m / (c.m - 1.0)) + std::log(c.g / (c.g + 1.0)));
  }
  const double gy = std::tgamma(-c.y);  // finite for y in (0,1)
  const double up = std::pow(c.m - 1.0, c.y) - std::pow(c.m, c.y);
  const double dn = std::pow(c.g + 1.0, c.y) - std::pow(c.g, c.y);
  return c.c * gy * (up + dn);
}

double levy_log_drift(const ModelSpec& model) {
  if (auto* k = std::get_if<Kou>(&model.dynamics))
    return model.r - model.d - 0.5 * k->sigma * k->sigma -
           k->lambda * kou_zeta(*k);
  if (auto* c = std::get_if<Cgmy>(&model.dynamics))
    return model.r - model.d - cgmy_kappa1(*c);
  if (auto* bs = std::get_if<BlackScholes>(&model.dynamics))
    return model.r - model.d - 0.5 * bs->sigma * bs->sigma;
  fail("log drift only defined for spatially homogeneous models");
}

LocalCharacteristics characteristics(const ModelSpec& model,
                                     std::optional<int> regime) {
  LocalCharacteristics lc;
  const double rd = model.r - model.d;
  if (auto* bs = std::get_if<BlackScholes>(&model.dynamics)) {
    const double s2 = bs->sigma * bs->sigma;
    lc.mu = [rd](double s) { return rd * s; };
    lc.sig2 = [s2](double s) { return s2 * s * s; };
  } else if (auto* cev = std::get_if<Cev>(&model.dynamics)) {
    const double sig = cev->sigma, b = cev->beta;
    lc.mu = [rd](double s) { return rd * s; };
    lc.sig2 = [sig, b](double s) {
      const double v = sig * std::pow(s, 1.0 + b);
      return v * v;
    };
  } else if (auto* rs = std::get_if<RegimeSwitchingBS>(&model.dynamics)) {
    const int e = regime.value_or(0);
    if (e < 0 || e >= static_cast<int>(rs->sigmas.size()))
      fail("regime index out of range");
    const double s2 = rs->sigmas[e] * rs->sigmas[e];
    lc.mu = [rd](double s) { return rd * s; };
    lc.sig2 = [s2](double s) { return s2 * s * s; };
  } else if (auto* k = std::get_if<Kou>(&model.dynamics)) {
    const double m = model.r - model.d - 0.5 * k->sigma * k->sigma -
                     k->lambda * kou_zeta(*k);
    const double s2 = k->sigma * k->sigma;
    lc.mu = [m](double) { return m; };
    lc.sig2 = [s2](double) { return s2; };
    lc.log_space = true;
  } else if (auto* c = std::get_if<Cgmy>(&model.dynamics)) {
    const double m = model.r - model.d - cgmy_kappa1(*c);
    lc.mu = [m](double) { return m; };
    lc.sig2 = [](double) { return 0.0; };  // small-jump variance added per cell
    lc.log_space = true;
  }
  return lc;
}

double effective_sigma(const ModelSpec& model, double x) {
  if (auto* bs = std::get_if<BlackScholes>(&model.dynamics)) return bs->sigma;
  if (auto* cev = std::get_if<Cev>(&model.dynamics))
    return cev->sigma * std::pow(x, cev->beta);
  if (auto* rs = std::get_if<RegimeSwitchingBS>(&model.dynamics)) {
    double s = 0.0;
    for (double v : rs->sigmas) s = std::max(s, v);
    return s;
  }
  if (auto* k = std::get_if<Kou>(&model.dynamics)) {
    const double jump_var =
        k->lambda * (k->q_up * 2.0 * k->eta_up * k->eta_up +
                     k->q_down * 2.0 * k->eta_down * k->eta_down);
    return std::sqrt(k->sigma * k->sigma + jump_var);
  }
  if (auto* c = std::get_if<Cgmy>(&model.dynamics)) {
    // variance rate: int z^2 nu(dz) = c Gamma(2-y) (m^{y-2} + g^{y-2})
    const double v = c->c * std::tgamma(2.0 - c->y) *
                     (std::pow(c->m, c->y - 2.0) + std::pow(c->g, c->y - 2.0));
    return std::sqrt(v);
  }
  return 0.0;
}

}  // namespace lookback
