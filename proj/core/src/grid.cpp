#include "lookback/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lookback {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("grid: " + msg);
}

}  // namespace

std::size_t Grid::index_of(double x) const {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.end() || *it != x) fail("state is not a grid point");
  return static_cast<std::size_t>(it - points.begin());
}

bool Grid::contains(double x) const {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  return it != points.end() && *it == x;
}

Grid build_aligned_grid(double lower, double upper, std::vector<double> nodes,
                        std::size_t target_n) {
  if (!(lower < upper)) fail("need lower < upper");
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    fail("duplicate node");
  for (double v : nodes)
    if (v < lower || v > upper) fail("node outside [lower, upper]");
  // nodes equal to a bound are already grid points
  std::erase_if(nodes, [&](double v) { return v == lower || v == upper; });
  if (target_n < nodes.size() + 2) fail("target_n too small for node count");

  std::vector<double> bpts;
  bpts.reserve(nodes.size() + 2);
  bpts.push_back(lower);
  bpts.insert(bpts.end(), nodes.begin(), nodes.end());
  bpts.push_back(upper);

  const std::size_t nseg = bpts.size() - 1;
  std::vector<double> len(nseg);
  for (std::size_t s = 0; s < nseg; ++s) len[s] = bpts[s + 1] - bpts[s];

  // proportional allocation at the target spacing, one cell minimum
  const double dstar = (upper - lower) / static_cast<double>(target_n - 1);
  std::vector<std::size_t> cells(nseg);
  std::size_t total = 1;
  for (std::size_t s = 0; s < nseg; ++s) {
    cells[s] = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(len[s] / dstar + 1e-12)));
    total += cells[s];
  }
  // grow toward the target: split the widest-spaced segment (ties: longest)
  while (total < target_n) {
    std::size_t pick = 0;
    double best_sp = -1.0;
    for (std::size_t s = 0; s < nseg; ++s) {
      const double sp = len[s] / static_cast<double>(cells[s]);
      if (sp > best_sp + 1e-15 * best_sp ||
          (std::abs(sp - best_sp) <= 1e-15 * best_sp && len[s] > len[pick])) {
        best_sp = sp;
        pick = s;
      }
    }
    ++cells[pick];
    ++total;
  }

  Grid g;
  g.points.reserve(total);
  for (std::size_t s = 0; s < nseg; ++s) {
    g.points.push_back(bpts[s]);
    const double a = bpts[s];
    for (std::size_t k = 1; k < cells[s]; ++k)
      g.points.push_back(a + len[s] * static_cast<double>(k) /
                                 static_cast<double>(cells[s]));
  }
  g.points.push_back(upper);

  for (std::size_t i = 1; i < g.points.size(); ++i) {
    if (!(g.points[i] > g.points[i - 1]))
      fail("grid points collapsed; interval too small for target_n");
    g.delta_max = std::max(g.delta_max, g.points[i] - g.points[i - 1]);
  }
  g.aligned_nodes = std::move(nodes);
  return g;
}

Grid refine(const Grid& g) {
  if (g.points.size() < 2) fail("cannot refine a degenerate grid");
  Grid out;
  out.points.resize(2 * g.points.size() - 1);
  for (std::size_t i = 0; i < g.points.size(); ++i)
    out.points[2 * i] = g.points[i];
  for (std::size_t i = 0; i + 1 < g.points.size(); ++i)
    out.points[2 * i + 1] = 0.5 * (g.points[i] + g.points[i + 1]);
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    if (!(out.points[i] > out.points[i - 1]))
      fail("refinement collapsed adjacent points");
    out.delta_max = std::max(out.delta_max, out.points[i] - out.points[i - 1]);
  }
  out.aligned_nodes = g.aligned_nodes;
  return out;
}

std::size_t left_neighbor_index(const Grid& g, double x) {
  auto it = std::lower_bound(g.points.begin(), g.points.end(), x);
  if (it == g.points.begin()) fail("no grid point below x");
  return static_cast<std::size_t>(it - g.points.begin()) - 1;
}

std::size_t right_neighbor_index(const Grid& g, double x) {
  auto it = std::upper_bound(g.points.begin(), g.points.end(), x);
  if (it == g.points.end()) fail("no grid point above x");
  return static_cast<std::size_t>(it - g.points.begin());
}

double left_neighbor(const Grid& g, double x) {
  return g.points[left_neighbor_index(g, x)];
}

double right_neighbor(const Grid& g, double x) {
  return g.points[right_neighbor_index(g, x)];
}

}  // namespace lookback
