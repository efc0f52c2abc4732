#pragma once

#include <string>
#include <vector>

#include "lookback/ctmc.hpp"

namespace lookback {

enum class ExpmMethod { uniformization, scaling_squaring };

ExpmMethod expm_method_from_string(const std::string& s);

struct ExpmOptions {
  ExpmMethod method = ExpmMethod::uniformization;
  double tol = 1e-12;
};

// w = exp(t G) v for a sub-generator (rows sum to <= 0), t >= 0.
// uniformization exploits the matvec-only interface; scaling_squaring
// densifies and is intended for validation and moderate dimensions.
std::vector<double> expm_action(const SubGenerator& g, double t,
                                std::vector<double> v,
                                const ExpmOptions& opts = {});

}  // namespace lookback
