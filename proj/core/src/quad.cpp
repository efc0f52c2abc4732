#include "lookback/quad.hpp"

#include <cmath>
#include <stdexcept>

namespace lookback {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("quad: " + msg);
}

// Gauss-Legendre on [-1, 1]: Newton iteration on the recurrence, good to
// machine precision for the sizes used here
void gauss_legendre_ref(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[half - 1] = 0.0;
}

}  // namespace

QuadKind quad_kind_from_string(const std::string& s) {
  if (s == "rectangle") return QuadKind::rectangle;
  if (s == "rectangle_right") return QuadKind::rectangle_right;
  if (s == "trapezoid") return QuadKind::trapezoid;
  if (s == "simpson") return QuadKind::simpson;
  if (s == "gauss" || s == "gauss_legendre") return QuadKind::gauss_legendre;
  fail("unknown quadrature kind '" + s + "'");
}

std::string to_string(QuadKind k) {
  switch (k) {
    case QuadKind::rectangle: return "rectangle";
    case QuadKind::rectangle_right: return "rectangle_right";
    case QuadKind::trapezoid: return "trapezoid";
    case QuadKind::simpson: return "simpson";
    case QuadKind::gauss_legendre: return "gauss_legendre";
  }
  return "?";
}

QuadratureRule make_rule(QuadKind kind, int n, double a, double b) {
  if (n < 1) fail("need n >= 1");
  if (!(a < b)) fail("need a < b");
  QuadratureRule r;
  r.kind = kind;
  r.a = a;
  r.b = b;
  const double h = (b - a) / n;
  switch (kind) {
    case QuadKind::rectangle:
      for (int i = 0; i < n; ++i) {
        r.nodes.push_back(a + i * h);
        r.weights.push_back(h);
      }
      break;
    case QuadKind::rectangle_right:
      for (int i = 1; i <= n; ++i) {
        r.nodes.push_back(i == n ? b : a + i * h);
        r.weights.push_back(h);
      }
      break;
    case QuadKind::trapezoid:
      for (int i = 0; i <= n; ++i) {
        r.nodes.push_back(i == n ? b : a + i * h);
        r.weights.push_back((i == 0 || i == n) ? 0.5 * h : h);
      }
      break;
    case QuadKind::simpson:
      if (n % 2 != 0) fail("simpson needs an even panel count");
      for (int i = 0; i <= n; ++i) {
        r.nodes.push_back(i == n ? b : a + i * h);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        r.weights.push_back(w * h / 3.0);
      }
      break;
    case QuadKind::gauss_legendre: {
      std::vector<double> x, w;
      gauss_legendre_ref(n, x, w);
      const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
      for (int i = 0; i < n; ++i) {
        r.nodes.push_back(mid + rad * x[i]);
        r.weights.push_back(rad * w[i]);
      }
      break;
    }
  }
  return r;
}

double integrate(const QuadratureRule& rule,
                 const std::function<double(double)>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(rule.nodes[i]);
  return acc;
}

}  // namespace lookback
