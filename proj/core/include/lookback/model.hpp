#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace lookback {

struct BlackScholes {
  double sigma = 0.0;
};

// dX = (r-d) X dt + sigma X^{1+beta} dW
struct Cev {
  double sigma = 0.0;
  double beta = 0.0;
};

// Black-Scholes volatility modulated by a finite-state Markov chain.
// q is the regime-switching rate matrix (rows sum to zero).
struct RegimeSwitchingBS {
  std::vector<double> sigmas;
  std::vector<std::vector<double>> q;
};

// jump-diffusion with double-exponential jumps in the log price:
// intensity lambda, up/down probabilities q_up/q_down (sum 1), jump-size
// means eta_up/eta_down (means, not rates; eta_up < 1 keeps E[e^J] finite).
struct Kou {
  double sigma = 0.0;
  double lambda = 0.0;
  double q_up = 0.0;
  double q_down = 0.0;
  double eta_up = 0.0;
  double eta_down = 0.0;
};

// pure-jump tempered-stable process; density c * e^{-m z}/z^{1+y} (z>0),
// c * e^{-g|z|}/|z|^{1+y} (z<0). y in [0,1) here; y=1 rejected.
struct Cgmy {
  double c = 0.0;
  double g = 0.0;
  double m = 0.0;
  double y = 0.0;
};

using Dynamics = std::variant<BlackScholes, Cev, RegimeSwitchingBS, Kou, Cgmy>;

struct ModelSpec {
  Dynamics dynamics;
  double r = 0.0;  // risk-free rate
  double d = 0.0;  // dividend yield

  bool is_levy() const;        // spatially homogeneous in the log price
  bool is_regime_switching() const;
  int regime_count() const;    // 1 unless regime-switching
  void validate() const;       // throws std::invalid_argument
};

// local drift/variance of the state coordinate used by the chain.
// log_space: coordinate is ln S (Levy models); otherwise the price itself.
struct LocalCharacteristics {
  std::function<double(double)> mu;
  std::function<double(double)> sig2;
  bool log_space = false;
};

LocalCharacteristics characteristics(const ModelSpec& model,
                                     std::optional<int> regime = std::nullopt);

// volatility scale used for truncation bounds, evaluated at spot x
double effective_sigma(const ModelSpec& model, double x);

// E[e^J - 1] for the Kou jump part
double kou_zeta(const Kou& k);

// Levy-exponent value at 1 for CGMY: log E[e^{X_1}] minus the drift part.
// Finite only for m > 1.
double cgmy_kappa1(const Cgmy& c);

// drift of ln S under the pricing measure (Levy models)
double levy_log_drift(const ModelSpec& model);

}  // namespace lookback
