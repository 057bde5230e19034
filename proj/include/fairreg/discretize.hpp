#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairreg/core.hpp"

namespace fairreg {

// --------------------------------------------------------------------------
// Prediction grid Z = {j*alpha : j = 1..N}
// --------------------------------------------------------------------------

struct Grid {
  int n_points = 0;  // N
  double alpha = 0.0;
  std::vector<double> points;  // increasing, last point is 1

  // Exact membership test via integer index arithmetic; raw floating-point
  // modulus is forbidden here, constraint indexing must be exact.
  int index_of(double z) const {
    const long j = std::lround(z * n_points);
    if (j < 1 || j > n_points || std::abs(z - static_cast<double>(j) * alpha) > 1e-9)
      return -1;
    return static_cast<int>(j - 1);
  }
};

inline Grid build_grid(int n_points) {
  if (n_points < 1) throw std::invalid_argument("build_grid: N must be >= 1");
  Grid g;
  g.n_points = n_points;
  g.alpha = 1.0 / n_points;
  g.points.resize(n_points);
  for (int j = 1; j <= n_points; ++j)
    g.points[j - 1] = static_cast<double>(j) / n_points;
  return g;
}

// Largest multiple of alpha that is <= u.
inline double snap_down(double u, double alpha) {
  const double n = 1.0 / alpha;
  const long j = static_cast<long>(std::floor(u * n + 1e-9));
  return static_cast<double>(j) * alpha;
}

// Smallest multiple of alpha that is >= z.
inline double snap_up(double z, double alpha) {
  const double n = 1.0 / alpha;
  const long j = static_cast<long>(std::ceil(z * n - 1e-9));
  return static_cast<double>(j) * alpha;
}

// --------------------------------------------------------------------------
// alpha/2-cover of the observed labels
// --------------------------------------------------------------------------

struct LabelCover {
  std::vector<double> cover_points;  // sorted
  double alpha = 0.0;
  mutable std::size_t out_of_cover_snaps = 0;  // labels beyond alpha/2 at query time

  // Smallest cover point within alpha/2 of y. Out-of-cover labels (possible
  // at test time) snap to the nearest cover point instead.
  double snap(double y) const {
    const double r = alpha / 2.0;
    auto lo = std::lower_bound(cover_points.begin(), cover_points.end(), y - r);
    double best = -1.0;
    double best_dist = 2.0;
    for (auto it = lo; it != cover_points.end() && *it <= y + r + 1e-15; ++it) {
      if (std::abs(*it - y) <= r + 1e-15) return *it;  // smallest qualifying
    }
    // nearest fallback
    for (double c : cover_points) {
      const double d = std::abs(c - y);
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    ++out_of_cover_snaps;
    return best;
  }

  int index_of(double cover_point) const {
    auto it = std::lower_bound(cover_points.begin(), cover_points.end(), cover_point);
    if (it == cover_points.end() || *it != cover_point)
      throw std::invalid_argument("label cover: value not a cover point");
    return static_cast<int>(it - cover_points.begin());
  }

  std::size_t size() const { return cover_points.size(); }
};

// Greedy left-to-right scan over sorted unique labels: accept a label iff it
// is more than alpha/2 greater than the last accepted point.
inline LabelCover build_label_cover(const std::vector<double>& labels, double alpha) {
  if (labels.empty()) throw std::invalid_argument("build_label_cover: empty label list");
  std::vector<double> sorted = labels;
  for (double y : sorted)
    if (!(y >= 0.0 && y <= 1.0))
      throw std::invalid_argument("build_label_cover: label outside [0,1]");
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  LabelCover cover;
  cover.alpha = alpha;
  const double r = alpha / 2.0;
  for (double y : sorted) {
    if (cover.cover_points.empty() || y - cover.cover_points.back() > r)
      cover.cover_points.push_back(y);
  }
  return cover;
}

// --------------------------------------------------------------------------
// Discretized loss and cost coefficients
// --------------------------------------------------------------------------

// l_alpha(y,u) = l(snap(y), floor_alpha(u) + alpha/2), with l(y,v) = l(y,1)
// whenever v >= 1.
inline double discretized_loss(const LossSpec& spec, const LabelCover& cover,
                               const Grid& grid, double y, double u) {
  const double y_snapped = cover.snap(y);
  double v = snap_down(u, grid.alpha) + grid.alpha / 2.0;
  v = std::min(v, 1.0);
  return eval_loss(spec, y_snapped, v);
}

// c(y,z) = N * (l(y, z + alpha/2) - l(y, z - alpha/2)), upper point clamped
// to 1 per the >= 1 convention. Takes values in [-1,1] for 1-Lipschitz l.
inline double cost_coefficient(const LossSpec& spec, const LabelCover& cover,
                               const Grid& grid, double y_snapped, double z) {
  if (grid.index_of(z) < 0)
    throw std::invalid_argument("cost_coefficient: z not on grid");
  (void)cover;
  const double half = grid.alpha / 2.0;
  const double hi = std::min(z + half, 1.0);
  const double lo = z - half;
  return grid.n_points * (eval_loss(spec, y_snapped, hi) - eval_loss(spec, y_snapped, lo));
}

}  // namespace fairreg
