#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "lookback/model.hpp"
#include "lookback/oracle.hpp"
#include "lookback/pricer.hpp"

namespace lookback::tools {

ModelSpec build_model(const Config& cfg);
LookbackContract build_contract(const Config& cfg);
PricingConfig build_pricing(const Config& cfg);
McConfig build_mc(const Config& cfg);
FdConfig build_fd(const Config& cfg);

enum class Benchmark { closed_form, self, value };

struct StudySettings {
  std::vector<std::size_t> n_sequence;  // dyadic: each entry doubles
  Benchmark benchmark = Benchmark::self;
  double benchmark_value = 0.0;
  std::string extrapolation = "richardson2";  // | three_point | none
};

StudySettings build_study(const Config& cfg);

struct StudyRow {
  std::size_t n = 0;
  double price = 0.0;
  double abs_error = 0.0;
  std::optional<double> extrapolated;
  std::optional<double> extrap_abs_error;
  double wall_seconds = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double benchmark = 0.0;
  double order = 0.0;  // least-squares slope over the untainted rows
};

// nested-grid convergence study: one plan at the coarsest n, dyadic
// refinements for the rest
StudyResult run_convergence(const Config& cfg);

struct CompareRow {
  std::string method;      // engine | fd
  std::string resolution;  // n or nx:nt
  double wall_seconds = 0.0;
  double abs_error = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double benchmark = 0.0;
};

CompareResult run_compare_fd(const Config& cfg);

struct McCheckResult {
  double engine_price = 0.0;
  double mc_price = 0.0;
  double mc_std_error = 0.0;
  double bias_allowance = 0.0;
  double abs_diff = 0.0;
  double tolerance = 0.0;  // 3 * std_error + allowance
  bool pass = false;
};

McCheckResult run_mc_check(const Config& cfg);

// CSV renderings
std::vector<std::vector<std::string>> price_csv(const PriceResult& r,
                                                bool include_runtime);
std::vector<std::vector<std::string>> convergence_csv(const StudyResult& r,
                                                      bool include_runtime);
std::vector<std::vector<std::string>> compare_fd_csv(const CompareResult& r);
std::vector<std::vector<std::string>> mc_check_csv(const McCheckResult& r);

}  // namespace lookback::tools
