#pragma once

#include <algorithm>
#include <vector>

#include "fairreg/core.hpp"
#include "fairreg/discretize.hpp"

namespace fairreg {

// Table of SP disparities, indexed by (group a, grid point z).
struct MomentVector {
  int groups = 0;
  int n_grid = 0;
  std::vector<double> values;  // groups * n_grid, row-major by group

  MomentVector() = default;
  MomentVector(int groups_, int n_grid_)
      : groups(groups_), n_grid(n_grid_), values(static_cast<std::size_t>(groups_) * n_grid_, 0.0) {}

  double& at(int a, int k) { return values[static_cast<std::size_t>(a) * n_grid + k]; }
  double at(int a, int k) const { return values[static_cast<std::size_t>(a) * n_grid + k]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

// Per-group conditional empirical losses.
struct BGLVector {
  std::vector<double> values;
  double max() const { return *std::max_element(values.begin(), values.end()); }
};

template <typename Predict>
inline std::vector<double> predictions_of(const Dataset& data, Predict&& f) {
  std::vector<double> p(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) p[i] = f(data.examples[i].features);
  return p;
}

// cost^(h_f) = mean_i [ l_alpha(Y_i, f(X_i)) - l(Y_i_snapped, alpha/2) ],
// single pass, O(n).
inline double empirical_cost(const Dataset& data, const LossSpec& spec,
                             const LabelCover& cover, const Grid& grid,
                             const std::vector<double>& predictions) {
  std::vector<double> terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.examples[i].label;
    const double y_snapped = cover.snap(y);
    terms[i] = discretized_loss(spec, cover, grid, y, predictions[i]) -
               eval_loss(spec, y_snapped, grid.alpha / 2.0);
  }
  return pairwise_mean(terms);
}

inline double empirical_cost(const Dataset& data, const LossSpec& spec,
                             const LabelCover& cover, const Grid& grid,
                             const LinearModel& model) {
  return empirical_cost(data, spec, cover, grid,
                        predictions_of(data, [&](const std::vector<double>& x) {
                          return model.predict(x);
                        }));
}

// gamma^_{a,z} = P^[f(X) >= z | A=a] - P^[f(X) >= z], via per-group sort and
// a single scan over grid thresholds. Ties f(X)=z count as >= z.
inline MomentVector group_cdf_moments(const Dataset& data, const Grid& grid,
                                      const std::vector<double>& predictions) {
  const int A = data.group_count;
  const int N = grid.n_points;
  MomentVector out(A, N);
  std::vector<std::vector<double>> cond(A, std::vector<double>(N, 0.0));
  std::vector<double> sorted;
  const auto index = data.group_index();
  for (int a = 0; a < A; ++a) {
    sorted.clear();
    for (std::size_t i : index[a]) sorted.push_back(predictions[i]);
    std::sort(sorted.begin(), sorted.end());
    const double na = static_cast<double>(sorted.size());
    for (int k = 0; k < N; ++k) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), grid.points[k]);
      cond[a][k] = static_cast<double>(sorted.end() - it) / na;
    }
  }
  for (int k = 0; k < N; ++k) {
    double overall = 0.0;  // p_a-weighted sum of conditionals
    for (int a = 0; a < A; ++a) overall += data.group_freqs[a] * cond[a][k];
    for (int a = 0; a < A; ++a) out.at(a, k) = cond[a][k] - overall;
  }
  return out;
}

inline MomentVector group_cdf_moments(const Dataset& data, const Grid& grid,
                                      const LinearModel& model) {
  return group_cdf_moments(data, grid,
                           predictions_of(data, [&](const std::vector<double>& x) {
                             return model.predict(x);
                           }));
}

// O(n*N) reference implementation of the same quantity.
inline MomentVector naive_moments(const Dataset& data, const Grid& grid,
                                  const std::vector<double>& predictions) {
  const int A = data.group_count;
  const int N = grid.n_points;
  MomentVector out(A, N);
  for (int k = 0; k < N; ++k) {
    const double z = grid.points[k];
    std::vector<double> cond(A, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i)
      if (predictions[i] >= z) cond[data.examples[i].group] += 1.0;
    for (int a = 0; a < A; ++a) cond[a] /= static_cast<double>(data.group_sizes[a]);
    double overall = 0.0;
    for (int a = 0; a < A; ++a) overall += data.group_freqs[a] * cond[a];
    for (int a = 0; a < A; ++a) out.at(a, k) = cond[a] - overall;
  }
  return out;
}

// Per-group mean of l(Y_i, f(X_i)).
inline BGLVector bgl_group_losses(const Dataset& data, const LossSpec& spec,
                                  const std::vector<double>& predictions) {
  BGLVector out;
  out.values.assign(data.group_count, 0.0);
  const auto index = data.group_index();
  std::vector<double> terms;
  for (int a = 0; a < data.group_count; ++a) {
    terms.clear();
    for (std::size_t i : index[a])
      terms.push_back(eval_loss(spec, data.examples[i].label, predictions[i]));
    out.values[a] = pairwise_mean(terms);
  }
  return out;
}

inline BGLVector bgl_group_losses(const Dataset& data, const LossSpec& spec,
                                  const LinearModel& model) {
  return bgl_group_losses(data, spec,
                          predictions_of(data, [&](const std::vector<double>& x) {
                            return model.predict(x);
                          }));
}

// Overall weighted loss mean_i l(Y_i, f(X_i)).
inline double empirical_loss(const Dataset& data, const LossSpec& spec,
                             const std::vector<double>& predictions) {
  std::vector<double> terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    terms[i] = eval_loss(spec, data.examples[i].label, predictions[i]);
  return pairwise_mean(terms);
}

inline double empirical_loss(const Dataset& data, const LossSpec& spec,
                             const LinearModel& model) {
  return empirical_loss(data, spec,
                        predictions_of(data, [&](const std::vector<double>& x) {
                          return model.predict(x);
                        }));
}

}  // namespace fairreg
