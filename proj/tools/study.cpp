#include "study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"

namespace lookback::tools {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("study: " + msg);
}

// "a,b;c,d" rows separated by ';'; a bare "q12,q21" pair means two regimes
std::vector<std::vector<double>> parse_rate_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string row_text;
  while (std::getline(in, row_text, ';')) {
    std::replace(row_text.begin(), row_text.end(), ',', ' ');
    std::istringstream rin(row_text);
    std::vector<double> row;
    double v;
    while (rin >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.size() == 1 && rows[0].size() == 2) {
    const double q12 = rows[0][0], q21 = rows[0][1];
    return {{-q12, q12}, {q21, -q21}};
  }
  for (const auto& row : rows)
    if (row.size() != rows.size())
      fail("model.q must be square (rows separated by ';')");
  return rows;
}

}  // namespace

ModelSpec build_model(const Config& cfg) {
  ModelSpec model;
  model.r = cfg.get_double("contract.r", 0.0);
  model.d = cfg.get_double("contract.d", 0.0);
  const std::string kind = cfg.get_string("model.kind");
  if (kind == "bs") {
    model.dynamics = BlackScholes{cfg.get_double("model.sigma")};
  } else if (kind == "cev") {
    model.dynamics =
        Cev{cfg.get_double("model.sigma"), cfg.get_double("model.beta")};
  } else if (kind == "rsbs") {
    RegimeSwitchingBS rs;
    rs.sigmas = cfg.get_double_list("model.sigmas");
    rs.q = parse_rate_matrix(cfg.get_string("model.q"));
    model.dynamics = std::move(rs);
  } else if (kind == "kou") {
    model.dynamics = Kou{cfg.get_double("model.sigma"),
                         cfg.get_double("model.lambda"),
                         cfg.get_double("model.q_up"),
                         cfg.get_double("model.q_down"),
                         cfg.get_double("model.eta_up"),
                         cfg.get_double("model.eta_down")};
  } else if (kind == "cgmy") {
    model.dynamics = Cgmy{cfg.get_double("model.c"), cfg.get_double("model.g"),
                          cfg.get_double("model.m"), cfg.get_double("model.y")};
  } else {
    fail("unknown model.kind '" + kind + "'");
  }
  model.validate();
  return model;
}

LookbackContract build_contract(const Config& cfg) {
  LookbackContract c;
  c.kind = option_kind_from_string(cfg.get_string("contract.kind"));
  c.t = cfg.get_double("contract.t", 0.0);
  c.maturity = cfg.get_double("contract.maturity");
  c.x = cfg.get_double("contract.x");
  if (cfg.has("contract.M")) c.running_max = cfg.get_double("contract.M");
  if (cfg.has("contract.m")) c.running_min = cfg.get_double("contract.m");
  if (cfg.has("contract.K")) c.strike = cfg.get_double("contract.K");
  c.validate();
  return c;
}

PricingConfig build_pricing(const Config& cfg) {
  PricingConfig pc;
  pc.n = static_cast<std::size_t>(cfg.get_int("engine.n", 400));
  pc.quad = quad_kind_from_string(
      cfg.get_string("engine.quad", "gauss_legendre"));
  pc.quad_n = static_cast<int>(cfg.get_int("engine.quad_n", 11));
  pc.truncation = cfg.get_auto_double("engine.truncation");
  pc.grid_lower = cfg.get_auto_double("engine.grid_lower");
  pc.grid_upper = cfg.get_auto_double("engine.grid_upper");
  pc.truncation_mult = cfg.get_double("engine.truncation_mult", 8.0);
  pc.expm.method = expm_method_from_string(
      cfg.get_string("engine.expm_method", "uniformization"));
  pc.expm.tol = cfg.get_double("engine.expm_tol", 1e-12);
  pc.regime0 = static_cast<int>(cfg.get_int("engine.regime0", 0));
  pc.threads = static_cast<int>(cfg.get_int("engine.threads", 1));
  return pc;
}

McConfig build_mc(const Config& cfg) {
  McConfig mc;
  mc.paths = static_cast<std::size_t>(cfg.get_int("mc.paths", 1'000'000));
  mc.steps_per_year =
      static_cast<int>(cfg.get_int("mc.steps_per_year", 2000));
  mc.seed = cfg.get_u64("mc.seed", 12345);
  mc.antithetic = cfg.get_bool("mc.antithetic", true);
  mc.threads = static_cast<int>(cfg.get_int("engine.threads", 1));
  return mc;
}

FdConfig build_fd(const Config& cfg) {
  FdConfig fd;
  fd.n_x = static_cast<int>(cfg.get_int("fd.n_x", 400));
  fd.n_t = static_cast<int>(cfg.get_int("fd.n_t", 200));
  fd.m_bar = cfg.get_double("fd.m_bar", 3.0);
  return fd;
}

StudySettings build_study(const Config& cfg) {
  StudySettings st;
  for (double v : cfg.get_double_list("study.n_sequence")) {
    const auto n = static_cast<std::size_t>(v);
    if (static_cast<double>(n) != v || n < 8)
      fail("study.n_sequence entries must be integers >= 8");
    if (!st.n_sequence.empty() && n != 2 * st.n_sequence.back())
      fail("study.n_sequence must double at every step");
    st.n_sequence.push_back(n);
  }
  const std::string bm = cfg.get_string("study.benchmark", "self");
  if (bm == "closed_form") {
    st.benchmark = Benchmark::closed_form;
  } else if (bm == "self") {
    st.benchmark = Benchmark::self;
  } else if (bm == "value") {
    st.benchmark = Benchmark::value;
    st.benchmark_value = cfg.get_double("study.benchmark_value");
  } else {
    fail("unknown study.benchmark '" + bm + "'");
  }
  st.extrapolation = cfg.get_string("study.extrapolation", "richardson2");
  if (st.extrapolation != "richardson2" &&
      st.extrapolation != "three_point" && st.extrapolation != "none")
    fail("unknown study.extrapolation '" + st.extrapolation + "'");
  return st;
}

StudyResult run_convergence(const Config& cfg) {
  const ModelSpec model = build_model(cfg);
  const LookbackContract c = build_contract(cfg);
  PricingConfig pc = build_pricing(cfg);
  const StudySettings st = build_study(cfg);
  if (st.n_sequence.size() < 2) fail("study.n_sequence needs >= 2 entries");

  pc.n = st.n_sequence.front();
  PricingPlan plan = plan_pricing(c, model, pc);
  Grid grid = plan.grid;

  StudyResult out;
  std::vector<double> prices;
  for (std::size_t i = 0; i < st.n_sequence.size(); ++i) {
    if (i > 0) grid = refine(grid);
    PriceResult r = price_on_grid(c, model, pc, grid);
    StudyRow row;
    row.n = st.n_sequence[i];
    row.price = r.price;
    row.wall_seconds = r.wall_seconds;
    prices.push_back(r.price);
    out.rows.push_back(row);
  }

  // benchmark
  switch (st.benchmark) {
    case Benchmark::closed_form:
      out.benchmark = bs_closed_form_floating_put(c, model);
      break;
    case Benchmark::value:
      out.benchmark = st.benchmark_value;
      break;
    case Benchmark::self: {
      const std::size_t k = prices.size();
      if (st.extrapolation == "three_point" && k >= 3) {
        out.benchmark =
            extrapolate3(prices[k - 3], prices[k - 2], prices[k - 1]).value;
      } else {
        if (k < 2) fail("self benchmark needs >= 2 resolutions");
        out.benchmark = richardson2(prices[k - 2], prices[k - 1]);
      }
      break;
    }
  }

  // error columns and extrapolation columns
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i].abs_error = std::abs(out.rows[i].price - out.benchmark);
    if (st.extrapolation == "richardson2" && i >= 1) {
      const double e = richardson2(prices[i - 1], prices[i]);
      out.rows[i].extrapolated = e;
      out.rows[i].extrap_abs_error = std::abs(e - out.benchmark);
    } else if (st.extrapolation == "three_point" && i >= 2) {
      const double e =
          extrapolate3(prices[i - 2], prices[i - 1], prices[i]).value;
      out.rows[i].extrapolated = e;
      out.rows[i].extrap_abs_error = std::abs(e - out.benchmark);
    }
  }

  // slope fit; drop the rows whose errors are tainted by a self benchmark
  std::size_t fit_n = out.rows.size();
  if (st.benchmark == Benchmark::self)
    fit_n -= st.extrapolation == "three_point" ? 3 : 2;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < fit_n; ++i)
    pts.emplace_back(static_cast<double>(out.rows[i].n),
                     out.rows[i].abs_error);
  if (pts.size() >= 2) out.order = estimate_order(pts);
  return out;
}

CompareResult run_compare_fd(const Config& cfg) {
  const ModelSpec model = build_model(cfg);
  const LookbackContract c = build_contract(cfg);
  PricingConfig pc = build_pricing(cfg);
  const StudySettings st = build_study(cfg);
  if (st.n_sequence.size() < 2) fail("study.n_sequence needs >= 2 entries");
  if (st.benchmark == Benchmark::closed_form)
    fail("compare-fd benchmarks are value or self");

  pc.n = st.n_sequence.front();
  PricingPlan plan = plan_pricing(c, model, pc);
  Grid grid = plan.grid;

  CompareResult out;
  std::vector<double> prices;
  for (std::size_t i = 0; i < st.n_sequence.size(); ++i) {
    if (i > 0) grid = refine(grid);
    PriceResult r = price_on_grid(c, model, pc, grid);
    prices.push_back(r.price);
    CompareRow row;
    row.method = "engine";
    row.resolution = std::to_string(st.n_sequence[i]);
    row.wall_seconds = r.wall_seconds;
    out.rows.push_back(row);
  }
  out.benchmark = st.benchmark == Benchmark::value
                      ? st.benchmark_value
                      : richardson2(prices[prices.size() - 2],
                                    prices[prices.size() - 1]);
  for (std::size_t i = 0; i < prices.size(); ++i)
    out.rows[i].abs_error = std::abs(prices[i] - out.benchmark);

  // fd ladder "480:240,960:480"
  const std::string seq = cfg.get_string("fd.n_sequence");
  std::istringstream in(seq);
  std::string item;
  const double m_bar = cfg.get_double("fd.m_bar", 3.0);
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      fail("fd.n_sequence entries look like nx:nt");
    FdConfig fd;
    fd.n_x = std::stoi(item.substr(0, colon));
    fd.n_t = std::stoi(item.substr(colon + 1));
    fd.m_bar = m_bar;
    const auto t0 = std::chrono::steady_clock::now();
    const double v = fd_price_floating_put(c, model, fd);
    CompareRow row;
    row.method = "fd";
    row.resolution = std::to_string(fd.n_x) + ":" + std::to_string(fd.n_t);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    row.abs_error = std::abs(v - out.benchmark);
    out.rows.push_back(row);
  }
  return out;
}

McCheckResult run_mc_check(const Config& cfg) {
  const ModelSpec model = build_model(cfg);
  const LookbackContract c = build_contract(cfg);
  const PricingConfig pc = build_pricing(cfg);
  const McConfig mc = build_mc(cfg);

  McCheckResult out;
  out.engine_price = price(c, model, pc).price;
  const McResult m = mc_price(c, model, mc);
  out.mc_price = m.price;
  out.mc_std_error = m.std_error;
  out.bias_allowance =
      mc_bias_allowance(c, model, out.engine_price, mc.steps_per_year);
  out.abs_diff = std::abs(out.engine_price - out.mc_price);
  out.tolerance = 3.0 * out.mc_std_error + out.bias_allowance;
  out.pass = out.abs_diff <= out.tolerance;
  return out;
}

std::vector<std::vector<std::string>> price_csv(const PriceResult& r,
                                                bool include_runtime) {
  std::vector<std::string> head = {"price", "grid_points", "expm_calls"};
  std::vector<std::string> row = {csv_double(r.price),
                                  std::to_string(r.grid_points),
                                  std::to_string(r.expm_calls)};
  if (include_runtime) {
    head.push_back("wall_seconds");
    row.push_back(csv_double(r.wall_seconds));
  }
  return {head, row};
}

std::vector<std::vector<std::string>> convergence_csv(const StudyResult& r,
                                                      bool include_runtime) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head = {"n", "price", "abs_error", "extrapolated",
                                   "extrap_abs_error"};
  if (include_runtime) head.push_back("wall_seconds");
  rows.push_back(head);
  for (const auto& row : r.rows) {
    std::vector<std::string> cells = {
        std::to_string(row.n), csv_double(row.price),
        csv_double(row.abs_error),
        row.extrapolated ? csv_double(*row.extrapolated) : "",
        row.extrap_abs_error ? csv_double(*row.extrap_abs_error) : ""};
    if (include_runtime) cells.push_back(csv_double(row.wall_seconds));
    rows.push_back(cells);
  }
  rows.push_back({"order", csv_double(r.order)});
  return rows;
}

std::vector<std::vector<std::string>> compare_fd_csv(const CompareResult& r) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"method", "resolution", "wall_seconds", "abs_error"});
  for (const auto& row : r.rows)
    rows.push_back({row.method, row.resolution, csv_double(row.wall_seconds),
                    csv_double(row.abs_error)});
  return rows;
}

std::vector<std::vector<std::string>> mc_check_csv(const McCheckResult& r) {
  return {{"engine_price", "mc_price", "mc_std_error", "bias_allowance",
           "abs_diff", "tolerance", "pass"},
          {csv_double(r.engine_price), csv_double(r.mc_price),
           csv_double(r.mc_std_error), csv_double(r.bias_allowance),
           csv_double(r.abs_diff), csv_double(r.tolerance),
           r.pass ? "true" : "false"}};
}

}  // namespace lookback::tools
