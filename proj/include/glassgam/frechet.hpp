#pragma once

// Discrete Frechet distance between two point chains by dynamic programming:
//
//   d[i][j] = max(|a_i - b_j|, min(d[i-1][j], d[i-1][j-1], d[i][j-1]))
//
// d[last][last] is the minimum over all monotone couplings of the maximum
// pairwise distance. Symmetric in its arguments; zero iff the chains are
// pointwise identical.

#include <algorithm>
#include <cmath>
#include <vector>

#include "glassgam/common.hpp"

namespace glassgam {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Polyline {
  std::vector<Point2> points;
};

inline double point_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double discrete_frechet(const Polyline& a, const Polyline& b) {
  const std::size_t n = a.points.size();
  const std::size_t m = b.points.size();
  if (n == 0 || m == 0) throw ValueError("discrete_frechet: empty polyline");
  // Rolling rows: prev holds d[i-1][*], cur is filled as d[i][*].
  std::vector<double> prev(m), cur(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double dist = point_distance(a.points[0], b.points[j]);
    prev[j] = j == 0 ? dist : std::max(prev[j - 1], dist);
  }
  for (std::size_t i = 1; i < n; ++i) {
    cur[0] = std::max(prev[0], point_distance(a.points[i], b.points[0]));
    for (std::size_t j = 1; j < m; ++j) {
      const double reach = std::min({prev[j], prev[j - 1], cur[j - 1]});
      cur[j] = std::max(reach, point_distance(a.points[i], b.points[j]));
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

}  // namespace glassgam
