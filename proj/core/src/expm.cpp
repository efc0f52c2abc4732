#include "lookback/expm.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <stdexcept>

namespace lookback {

ExpmMethod expm_method_from_string(const std::string& s) {
  if (s == "uniformization") return ExpmMethod::uniformization;
  if (s == "scaling_squaring") return ExpmMethod::scaling_squaring;
  throw std::invalid_argument("expm: unknown method '" + s + "'");
}

namespace {

std::vector<double> expm_dense_action(const SubGenerator& g, double t,
                                      const std::vector<double>& v) {
  const std::size_t dim = g.dim();
  if (dim > 4096)
    throw std::invalid_argument(
        "expm: dimension too large for the dense method");
  std::vector<double> dense = g.to_dense();
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> A(dense.data(), static_cast<Eigen::Index>(dim),
                               static_cast<Eigen::Index>(dim));
  Eigen::MatrixXd E = (t * A).exp();
  Eigen::Map<const Eigen::VectorXd> x(v.data(),
                                      static_cast<Eigen::Index>(dim));
  Eigen::VectorXd y = E * x;
  return std::vector<double>(y.data(), y.data() + dim);
}

}  // namespace

std::vector<double> expm_action(const SubGenerator& g, double t,
                                std::vector<double> v,
                                const ExpmOptions& opts) {
  const std::size_t dim = g.dim();
  if (v.size() != dim)
    throw std::invalid_argument("expm: vector length mismatch");
  if (t < 0.0) throw std::invalid_argument("expm: negative horizon");
  if (t == 0.0) return v;
  if (opts.method == ExpmMethod::scaling_squaring)
    return expm_dense_action(g, t, v);

  const double lam = g.max_diag_mag();
  if (lam == 0.0) return v;  // zero generator
  const double a = lam * t;

  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (vmax == 0.0) return v;

  std::vector<double> w = v;          // P^k v
  std::vector<double> y(dim, 0.0);    // accumulated result
  std::vector<double> gw(dim, 0.0);
  const double lna = std::log(a);
  double lp = -a;  // log Poisson weight at k
  double psum = 0.0;  // retained Poisson mass, for renormalization
  const double kcap = a + 40.0 * std::sqrt(a) + 50.0;
  std::size_t k = 0;
  while (true) {
    if (lp > -745.0) {
      const double p = std::exp(lp);
      psum += p;
      for (std::size_t i = 0; i < dim; ++i) y[i] += p * w[i];
      if (static_cast<double>(k) >= a) {
        const double rho = a / static_cast<double>(k + 2);
        const double next = p * a / static_cast<double>(k + 1);
        if (next / (1.0 - rho) * vmax <= opts.tol) break;
      }
    } else if (static_cast<double>(k) > a) {
      break;  // past the mode and the weights have underflowed
    }
    if (static_cast<double>(k) >= kcap) break;
    g.matvec(w.data(), gw.data());
    const double inv = 1.0 / lam;
    for (std::size_t i = 0; i < dim; ++i) w[i] += gw[i] * inv;
    ++k;
    lp += lna - std::log(static_cast<double>(k));
    // resync against accumulated drift on very long runs
    if ((k & 0x3fffu) == 0)
      lp = -a + static_cast<double>(k) * lna -
           std::lgamma(static_cast<double>(k) + 1.0);
  }
  // the computed weights miss 1 by the truncated tail plus log-space rounding;
  // renormalizing removes that common factor (and keeps exp(Qt)1 = 1 exact for
  // conservative generators: y then accumulates the same sums as psum)
  for (std::size_t i = 0; i < dim; ++i) y[i] /= psum;
  return y;
}

}  // namespace lookback
