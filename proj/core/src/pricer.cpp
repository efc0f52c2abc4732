#include "lookback/pricer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "lookback/ctmc.hpp"
#include "lookback/fpp.hpp"

namespace lookback {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("pricer: " + msg);
}

double now_between(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool is_auto(double v) { return std::isnan(v); }

struct Bounds {
  double lower = 0.0, upper = 0.0;  // state-space grid bounds
  bool log_space = false;
};

bool uses_log_state(const ModelSpec& model) { return model.is_levy(); }

Bounds resolve_bounds(const LookbackContract& c, const ModelSpec& model,
                      const PricingConfig& cfg) {
  const double tau = c.tau();
  const double sig = effective_sigma(model, c.x);
  const double root = sig * std::sqrt(tau);
  const double up_drift = std::max(model.r - model.d, 0.0) * tau;
  const double dn_drift = std::max(model.d - model.r, 0.0) * tau;

  Bounds b;
  b.log_space = uses_log_state(model);
  if (c.max_type()) {
    double upper_price = cfg.grid_upper;
    if (is_auto(upper_price)) {
      upper_price = cfg.truncation;
      if (is_auto(upper_price))
        upper_price = c.running_max *
                      std::exp(cfg.truncation_mult * root +
                               (model.r - model.d) * tau);
    }
    double lower_price = cfg.grid_lower;
    if (is_auto(lower_price)) {
      if (std::holds_alternative<Cev>(model.dynamics))
        lower_price = 0.0;
      else if (b.log_space)
        lower_price =
            c.x * std::exp(-cfg.truncation_mult * root - dn_drift);
      else
        lower_price = 1e-3 * c.x;
    }
    if (!(lower_price < c.x && c.x <= c.running_max &&
          c.running_max < upper_price))
      fail("bounds must satisfy lower < x <= running max < upper");
    b.lower = b.log_space ? std::log(lower_price) : lower_price;
    b.upper = b.log_space ? std::log(upper_price) : upper_price;
  } else {
    double lower_price = cfg.grid_lower;
    if (is_auto(lower_price)) {
      if (std::holds_alternative<Cev>(model.dynamics))
        lower_price = 0.0;
      else
        lower_price =
            b.log_space
                ? c.x * std::exp(-cfg.truncation_mult * root - dn_drift)
                : 1e-3 * c.x;
    }
    double upper_price = cfg.grid_upper;
    if (is_auto(upper_price))
      upper_price = c.x * std::exp(cfg.truncation_mult * root + up_drift);
    if (!(lower_price < c.running_min && c.running_min <= c.x &&
          c.x < upper_price))
      fail("bounds must satisfy lower < running min <= x < upper");
    if (b.log_space && lower_price <= 0.0)
      fail("log-state grid needs a positive lower bound");
    b.lower = b.log_space ? std::log(lower_price) : lower_price;
    b.upper = b.log_space ? std::log(upper_price) : upper_price;
  }
  return b;
}

// price-space quadrature interval; empty (b <= a) is legal for deep-out
// fixed contracts and collapses to the floor strip
std::pair<double, double> quad_interval(const LookbackContract& c,
                                        const Bounds& bounds) {
  const double lo_price =
      bounds.log_space ? std::exp(bounds.lower) : bounds.lower;
  const double hi_price =
      bounds.log_space ? std::exp(bounds.upper) : bounds.upper;
  switch (c.kind) {
    case OptionKind::floating_put:
      return {c.running_max, hi_price};
    case OptionKind::fixed_call:
      return {std::max(c.running_max, c.strike), hi_price};
    case OptionKind::floating_call:
      return {lo_price, c.running_min};
    case OptionKind::fixed_put:
      return {lo_price, std::min(c.running_min, c.strike)};
  }
  fail("bad option kind");
}

// alignment points in state space: quadrature nodes, the spot, and a short
// uniform run carried through the spot when the segment facing the nearest
// node would otherwise be under-resolved
std::vector<double> assemble_anchors(const LookbackContract& c,
                                     const Bounds& bounds,
                                     const QuadratureRule& rule,
                                     std::size_t target_n) {
  std::vector<double> anchors;
  const double xs = bounds.log_space ? std::log(c.x) : c.x;
  for (double y : rule.nodes)
    anchors.push_back(bounds.log_space ? std::log(y) : y);
  anchors.push_back(xs);

  const double dstar =
      (bounds.upper - bounds.lower) / static_cast<double>(target_n - 1);
  if (c.max_type()) {
    double ystar = std::numeric_limits<double>::infinity();
    for (double y : anchors)
      if (y > xs && y < ystar) ystar = y;
    if (std::isfinite(ystar) &&
        std::llround((ystar - xs) / dstar) < 3) {
      const double dl = (ystar - xs) / 3.0;
      anchors.push_back(xs + dl);
      anchors.push_back(xs + 2.0 * dl);
      for (int k = 1; k <= 8; ++k) {
        const double z = xs - k * dl;
        if (!(z > bounds.lower + 0.5 * dl)) break;
        anchors.push_back(z);
      }
    }
  } else {
    double ystar = -std::numeric_limits<double>::infinity();
    for (double y : anchors)
      if (y < xs && y > ystar) ystar = y;
    if (std::isfinite(ystar) &&
        std::llround((xs - ystar) / dstar) < 3) {
      const double dl = (xs - ystar) / 3.0;
      anchors.push_back(xs - dl);
      anchors.push_back(xs - 2.0 * dl);
      for (int k = 1; k <= 8; ++k) {
        const double z = xs + k * dl;
        if (!(z < bounds.upper - 0.5 * dl)) break;
        anchors.push_back(z);
      }
    }
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  std::erase_if(anchors, [&](double v) {
    return v <= bounds.lower || v >= bounds.upper;
  });
  return anchors;
}

double intrinsic(const LookbackContract& c) {
  switch (c.kind) {
    case OptionKind::floating_put: return c.running_max - c.x;
    case OptionKind::floating_call: return c.x - c.running_min;
    case OptionKind::fixed_call: return std::max(c.running_max - c.strike, 0.0);
    case OptionKind::fixed_put: return std::max(c.strike - c.running_min, 0.0);
  }
  fail("bad option kind");
}

void validate_config(const PricingConfig& cfg) {
  if (cfg.n < 8) fail("grid target too small");
  if (cfg.quad_n < 1) fail("need at least one quadrature point");
  if (cfg.threads < 1) fail("threads must be positive");
}

struct NodeSurvivals {
  std::vector<double> survivals;
  int expm_calls = 0;
};

// first-passage survival at each quadrature node; nodes whose barrier does
// not strictly bound the spot contribute zero survival without an expm
NodeSurvivals node_survivals(const Generator& gen,
                             const std::vector<double>& node_states,
                             double spot_state, double tau, bool max_type,
                             const PricingConfig& cfg) {
  const Grid& grid = *gen.grid;
  const std::size_t ix = grid.index_of(spot_state);
  NodeSurvivals out;
  out.survivals.assign(node_states.size(), 0.0);
  std::vector<char> needs(node_states.size(), 0);
  for (std::size_t i = 0; i < node_states.size(); ++i) {
    const std::size_t j = grid.index_of(node_states[i]);
    needs[i] = max_type ? (j > ix) : (j < ix);
  }

  auto work = [&](std::size_t i) {
    SurvivalProfile p =
        survival_profile(gen, node_states[i],
                         max_type ? Passage::up : Passage::down, tau, cfg.expm);
    out.survivals[i] = p.at_index(ix, cfg.regime0);
  };

  const int threads = std::min<int>(
      cfg.threads, static_cast<int>(node_states.size() ? node_states.size() : 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < node_states.size(); ++i)
      if (needs[i]) work(i);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (std::size_t i = t; i < node_states.size();
               i += static_cast<std::size_t>(threads))
            if (needs[i]) work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }
  for (char f : needs) out.expm_calls += f;
  return out;
}

}  // namespace

OptionKind option_kind_from_string(const std::string& s) {
  if (s == "floating_put") return OptionKind::floating_put;
  if (s == "floating_call") return OptionKind::floating_call;
  if (s == "fixed_put") return OptionKind::fixed_put;
  if (s == "fixed_call") return OptionKind::fixed_call;
  fail("unknown option kind '" + s + "'");
}

std::string to_string(OptionKind k) {
  switch (k) {
    case OptionKind::floating_put: return "floating_put";
    case OptionKind::floating_call: return "floating_call";
    case OptionKind::fixed_put: return "fixed_put";
    case OptionKind::fixed_call: return "fixed_call";
  }
  return "?";
}

void LookbackContract::validate() const {
  if (!(x > 0.0)) fail("spot must be positive");
  if (!(maturity >= t)) fail("maturity before valuation");
  if (max_type()) {
    if (!std::isfinite(running_max) || running_max < x)
      fail("running max must be finite and at least the spot");
  } else {
    if (!std::isfinite(running_min) || running_min > x ||
        !(running_min > 0.0))
      fail("running min must lie in (0, spot]");
  }
  if (kind == OptionKind::fixed_put || kind == OptionKind::fixed_call) {
    if (!std::isfinite(strike) || !(strike > 0.0))
      fail("strike must be positive");
  }
}

PricingPlan plan_pricing(const LookbackContract& c, const ModelSpec& model,
                         const PricingConfig& cfg) {
  c.validate();
  model.validate();
  validate_config(cfg);
  if (!(c.tau() > 0.0)) fail("planning needs a positive time to maturity");

  const Bounds bounds = resolve_bounds(c, model, cfg);
  auto [qa, qb] = quad_interval(c, bounds);

  PricingPlan plan;
  plan.log_space = bounds.log_space;
  plan.quad_a = qa;
  plan.quad_b = qb;
  plan.floor_strip = c.max_type() ? 0.0 : std::min(qa, qb);

  std::vector<double> anchors;
  if (qb > qa) {
    QuadratureRule rule = make_rule(cfg.quad, cfg.quad_n, qa, qb);
    anchors = assemble_anchors(c, bounds, rule, cfg.n);
  } else {
    anchors.push_back(bounds.log_space ? std::log(c.x) : c.x);
  }
  plan.grid = build_aligned_grid(bounds.lower, bounds.upper, anchors, cfg.n);
  return plan;
}

PriceResult price_on_grid(const LookbackContract& c, const ModelSpec& model,
                          const PricingConfig& cfg, const Grid& grid) {
  const auto t0 = std::chrono::steady_clock::now();
  c.validate();
  model.validate();
  validate_config(cfg);
  const double tau = c.tau();
  if (!(tau > 0.0)) fail("price_on_grid needs a positive time to maturity");
  if (cfg.regime0 < 0 || cfg.regime0 >= model.regime_count())
    fail("starting regime out of range");

  const bool log_space = uses_log_state(model);
  const double lo_price = log_space ? std::exp(grid.lower()) : grid.lower();
  const double hi_price = log_space ? std::exp(grid.upper()) : grid.upper();

  double qa, qb;
  switch (c.kind) {
    case OptionKind::floating_put:
      qa = c.running_max, qb = hi_price;
      break;
    case OptionKind::fixed_call:
      qa = std::max(c.running_max, c.strike), qb = hi_price;
      break;
    case OptionKind::floating_call:
      qa = lo_price, qb = c.running_min;
      break;
    case OptionKind::fixed_put:
      qa = lo_price, qb = std::min(c.running_min, c.strike);
      break;
    default: fail("bad option kind");
  }

  const double dr = std::exp(-model.r * tau);
  const double dd = std::exp(-model.d * tau);

  PriceResult res;
  res.grid_points = grid.size();
  res.grid_lower = lo_price;
  res.grid_upper = hi_price;

  double weighted = 0.0;
  if (qb > qa) {
    QuadratureRule rule = make_rule(cfg.quad, cfg.quad_n, qa, qb);
    std::vector<double> node_states(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      node_states[i] = log_space ? std::log(rule.nodes[i]) : rule.nodes[i];
    const double spot_state = log_space ? std::log(c.x) : c.x;

    auto gridp = std::make_shared<const Grid>(grid);
    Generator gen = build_generator(model, gridp);
    NodeSurvivals ns = node_survivals(gen, node_states, spot_state, tau,
                                      c.max_type(), cfg);
    res.expm_calls = ns.expm_calls;
    res.nodes = rule.nodes;
    res.survivals = ns.survivals;
    // max kinds integrate P(hit the level), min kinds P(stay above it)
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      weighted += rule.weights[i] * (c.max_type() ? 1.0 - ns.survivals[i]
                                                  : ns.survivals[i]);
  }

  switch (c.kind) {
    case OptionKind::floating_put:
      res.price = dr * (c.running_max + weighted) - dd * c.x;
      break;
    case OptionKind::fixed_call:
      res.price =
          dr * (std::max(c.running_max, c.strike) - c.strike + weighted);
      break;
    case OptionKind::floating_call:
      res.floor_strip = std::min(qa, qb);
      res.price = dd * c.x - dr * (res.floor_strip + weighted);
      break;
    case OptionKind::fixed_put:
      res.floor_strip = std::min(qa, qb);
      res.price = dr * (c.strike - res.floor_strip - weighted);
      break;
  }
  res.wall_seconds = now_between(t0);
  return res;
}

PriceResult price(const LookbackContract& c, const ModelSpec& model,
                  const PricingConfig& cfg) {
  c.validate();
  model.validate();
  if (c.tau() == 0.0) {
    PriceResult r;
    r.price = intrinsic(c);
    return r;
  }
  PricingPlan plan = plan_pricing(c, model, cfg);
  return price_on_grid(c, model, cfg, plan.grid);
}

PriceResult price_levy_fastpath(const LookbackContract& c,
                                const ModelSpec& model,
                                const PricingConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  c.validate();
  model.validate();
  validate_config(cfg);
  if (!model.is_levy() &&
      !std::holds_alternative<BlackScholes>(model.dynamics))
    fail("fast path requires a spatially homogeneous model");
  if (c.tau() == 0.0) {
    PriceResult r;
    r.price = intrinsic(c);
    return r;
  }
  const double tau = c.tau();

  // price-space interval identical to the generic path
  Bounds pb = resolve_bounds(c, model, cfg);
  const bool was_log = pb.log_space;
  const double lo_price = was_log ? std::exp(pb.lower) : pb.lower;
  const double hi_price = was_log ? std::exp(pb.upper) : pb.upper;
  Bounds price_bounds;
  price_bounds.lower = lo_price;
  price_bounds.upper = hi_price;
  price_bounds.log_space = false;
  auto [qa, qb] = quad_interval(c, price_bounds);

  const double dr = std::exp(-model.r * tau);
  const double dd = std::exp(-model.d * tau);
  const double sig = effective_sigma(model, c.x);
  const double root = sig * std::sqrt(tau);

  PriceResult res;
  double weighted = 0.0;
  if (qb > qa) {
    QuadratureRule rule = make_rule(cfg.quad, cfg.quad_n, qa, qb);
    std::vector<double> starts(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      starts[i] = std::log(c.x / rule.nodes[i]);

    double glo, ghi;
    if (c.max_type()) {
      // starts are at or below zero; the barrier sits at zero
      double zmin = 0.0;
      for (double z : starts) zmin = std::min(zmin, z);
      glo = zmin - (cfg.truncation_mult * root +
                    std::max(model.d - model.r, 0.0) * tau);
      ghi = 0.0;
    } else {
      double zmax = 0.0;
      for (double z : starts) zmax = std::max(zmax, z);
      glo = 0.0;
      ghi = zmax + cfg.truncation_mult * root +
            std::max(model.r - model.d, 0.0) * tau;
    }

    std::vector<double> anchors(starts);
    const double dstar = (ghi - glo) / static_cast<double>(cfg.n - 1);
    if (c.max_type()) {
      double ztop = -std::numeric_limits<double>::infinity();
      for (double z : starts)
        if (z < 0.0 && z > ztop) ztop = z;
      if (std::isfinite(ztop) && std::llround(-ztop / dstar) < 3) {
        const double dl = -ztop / 3.0;
        anchors.push_back(ztop + dl);
        anchors.push_back(ztop + 2.0 * dl);
        for (int k = 1; k <= 8; ++k) {
          const double z = ztop - k * dl;
          if (!(z > glo + 0.5 * dl)) break;
          anchors.push_back(z);
        }
      }
    } else {
      double zbot = std::numeric_limits<double>::infinity();
      for (double z : starts)
        if (z > 0.0 && z < zbot) zbot = z;
      if (std::isfinite(zbot) && std::llround(zbot / dstar) < 3) {
        const double dl = zbot / 3.0;
        anchors.push_back(zbot - dl);
        anchors.push_back(zbot - 2.0 * dl);
        for (int k = 1; k <= 8; ++k) {
          const double z = zbot + k * dl;
          if (!(z < ghi - 0.5 * dl)) break;
          anchors.push_back(z);
        }
      }
    }
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    std::erase_if(anchors, [&](double v) { return v <= glo || v >= ghi; });

    Grid grid = build_aligned_grid(glo, ghi, anchors, cfg.n);
    auto gridp = std::make_shared<const Grid>(std::move(grid));
    Generator gen = build_log_generator(model, gridp);

    SurvivalProfile prof =
        survival_profile(gen, 0.0, c.max_type() ? Passage::up : Passage::down,
                         tau, cfg.expm);
    res.expm_calls = 1;
    res.grid_points = gridp->size();
    res.nodes = rule.nodes;
    res.survivals.assign(starts.size(), 0.0);
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const std::size_t iz = gridp->index_of(starts[i]);
      const bool alive = c.max_type() ? (iz < gridp->index_of(0.0))
                                      : (iz > gridp->index_of(0.0));
      if (alive) res.survivals[i] = prof.at_index(iz, 0);
      weighted += rule.weights[i] * (c.max_type() ? 1.0 - res.survivals[i]
                                                  : res.survivals[i]);
    }
  }

  switch (c.kind) {
    case OptionKind::floating_put:
      res.price = dr * (c.running_max + weighted) - dd * c.x;
      break;
    case OptionKind::fixed_call:
      res.price =
          dr * (std::max(c.running_max, c.strike) - c.strike + weighted);
      break;
    case OptionKind::floating_call:
      res.floor_strip = std::min(qa, qb);
      res.price = dd * c.x - dr * (res.floor_strip + weighted);
      break;
    case OptionKind::fixed_put:
      res.floor_strip = std::min(qa, qb);
      res.price = dr * (c.strike - res.floor_strip - weighted);
      break;
  }
  res.grid_lower = lo_price;
  res.grid_upper = hi_price;
  res.wall_seconds = now_between(t0);
  return res;
}

PriceResult price_under_ctmc_direct(const LookbackContract& c,
                                    const ModelSpec& model,
                                    const PricingConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  c.validate();
  model.validate();
  if (c.kind != OptionKind::floating_put)
    fail("direct evaluation is defined for the floating put");
  if (c.tau() == 0.0) {
    PriceResult r;
    r.price = intrinsic(c);
    return r;
  }
  PricingConfig dcfg = cfg;
  dcfg.quad = QuadKind::rectangle_right;
  PricingPlan plan = plan_pricing(c, model, dcfg);
  const Grid& grid = plan.grid;

  // the sum below assumes one uniform lattice across the whole grid
  double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid.points[i] - grid.points[i - 1];
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
  }
  if (hmax - hmin > 1e-12 * hmax)
    fail("direct evaluation requires a uniform chain grid");

  const double tau = c.tau();
  const double dr = std::exp(-model.r * tau);
  const double dd = std::exp(-model.d * tau);
  QuadratureRule rule =
      make_rule(QuadKind::rectangle_right, dcfg.quad_n, plan.quad_a,
                plan.quad_b);

  auto gridp = std::make_shared<const Grid>(grid);
  Generator gen = build_generator(model, gridp);
  const std::size_t ix = gridp->index_of(c.x);

  PriceResult res;
  res.grid_points = grid.size();
  double weighted = 0.0;
  res.nodes = rule.nodes;
  res.survivals.assign(rule.nodes.size(), 0.0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const std::size_t j = gridp->index_of(rule.nodes[i]);
    if (j > ix) {
      res.survivals[i] = survival_up(gen, rule.nodes[i], c.x, tau,
                                     cfg.regime0, cfg.expm);
      ++res.expm_calls;
    }
    weighted += rule.weights[i] * (1.0 - res.survivals[i]);
  }
  res.price = dr * (c.running_max + weighted) - dd * c.x;
  res.grid_lower = grid.lower();
  res.grid_upper = grid.upper();
  res.wall_seconds = now_between(t0);
  return res;
}

double richardson2(double u_n, double u_2n) {
  return (4.0 * u_2n - u_n) / 3.0;
}

Extrapolation3 extrapolate3(double u_n, double u_2n, double u_4n) {
  Extrapolation3 out;
  const double d1 = u_2n - u_n, d2 = u_4n - u_2n;
  out.value = u_4n;
  if (d1 == 0.0 || d2 == 0.0 || !std::isfinite(d1 / d2)) return out;
  const double ratio = d1 / d2;
  if (!(ratio > 1.0)) return out;  // not contracting monotonically
  out.order = std::log2(ratio);
  out.value = u_4n + d2 / (ratio - 1.0);
  out.ok = true;
  return out;
}

double estimate_order(
    const std::vector<std::pair<double, double>>& n_and_err) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, e] : n_and_err) {
    if (e == 0.0) {
      std::cerr << "estimate_order: dropping zero error at n=" << n << "\n";
      continue;
    }
    pts.emplace_back(std::log(n), std::log(std::abs(e)));
  }
  if (pts.size() < 2)
    throw std::invalid_argument("estimate_order: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [lx, ly] : pts) {
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(pts.size());
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace lookback
