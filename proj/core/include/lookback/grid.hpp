#pragma once

#include <cstddef>
#include <vector>

namespace lookback {

// strictly increasing state grid; aligned_nodes appear bitwise among points
struct Grid {
  std::vector<double> points;
  std::vector<double> aligned_nodes;
  double delta_max = 0.0;

  std::size_t size() const { return points.size(); }
  double lower() const { return points.front(); }
  double upper() const { return points.back(); }

  // exact-match lookup; throws std::invalid_argument if x is not a grid point
  std::size_t index_of(double x) const;
  bool contains(double x) const;
};

// Builds a grid on [lower, upper] containing every node exactly. Each segment
// between consecutive breakpoints is filled uniformly with a point count
// proportional to its length at the global target spacing (at least one cell),
// then cells are added to the widest-spaced segment until the total reaches
// target_n. The result may exceed target_n by at most the node count.
//
// Nodes equal to lower/upper are absorbed into the bounds; exact duplicates
// among the nodes are an error, as are nodes outside [lower, upper].
Grid build_aligned_grid(double lower, double upper, std::vector<double> nodes,
                        std::size_t target_n);

// dyadic refinement: keeps every point, bisects every cell
Grid refine(const Grid& g);

// nearest grid point strictly below / above x; errors at the boundary
double left_neighbor(const Grid& g, double x);
double right_neighbor(const Grid& g, double x);
std::size_t left_neighbor_index(const Grid& g, double x);
std::size_t right_neighbor_index(const Grid& g, double x);

}  // namespace lookback
