#pragma once

#include <functional>
#include <string>
#include <vector>

namespace lookback {

enum class QuadKind {
  rectangle,        // left endpoints
  rectangle_right,  // right endpoints
  trapezoid,
  simpson,
  gauss_legendre,
};

QuadKind quad_kind_from_string(const std::string& s);
std::string to_string(QuadKind k);

struct QuadratureRule {
  QuadKind kind = QuadKind::gauss_legendre;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> nodes;    // ascending, inside [a, b]
  std::vector<double> weights;  // same length, sum to b - a
};

// n panels for the composite rules (simpson requires even n), n points for
// gauss_legendre. Errors on n < 1 or b <= a.
QuadratureRule make_rule(QuadKind kind, int n, double a, double b);

double integrate(const QuadratureRule& rule,
                 const std::function<double(double)>& f);

}  // namespace lookback
