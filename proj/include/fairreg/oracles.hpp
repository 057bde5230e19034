#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fairreg/core.hpp"
#include "fairreg/discretize.hpp"
#include "fairreg/learners.hpp"
#include "fairreg/moments.hpp"

namespace fairreg {

// Signed dual table lambda_{a,z} = lambda+ - lambda-, indexed like MomentVector.
struct NetLambda {
  int groups = 0;
  int n_grid = 0;
  std::vector<double> values;

  NetLambda() = default;
  NetLambda(int groups_, int n_grid_)
      : groups(groups_), n_grid(n_grid_), values(static_cast<std::size_t>(groups_) * n_grid_, 0.0) {}

  double& at(int a, int k) { return values[static_cast<std::size_t>(a) * n_grid + k]; }
  double at(int a, int k) const { return values[static_cast<std::size_t>(a) * n_grid + k]; }
};

inline NetLambda net_lambda(const MomentVector& lambda_plus, const MomentVector& lambda_minus) {
  NetLambda out(lambda_plus.groups, lambda_plus.n_grid);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = lambda_plus.values[i] - lambda_minus.values[i];
  return out;
}

// c_lambda(y,a,z) = c(y,z) + N*lambda_{a,z}/p_a - sum_a' N*lambda_{a',z}.
// The sum over groups is precomputed once per z.
struct CLambdaAdjustment {
  std::vector<double> per_group_z;  // N*lambda_{a,z}/p_a, indexed a*N+k
  std::vector<double> sum_z;        // sum_a N*lambda_{a,z}, indexed k
  int n_grid = 0;

  double apply(double c, int a, int k) const {
    return c + per_group_z[static_cast<std::size_t>(a) * n_grid + k] - sum_z[k];
  }
};

inline CLambdaAdjustment c_lambda_adjustment(const NetLambda& lambda,
                                             const std::vector<double>& group_freqs,
                                             int n_grid_points) {
  CLambdaAdjustment adj;
  adj.n_grid = n_grid_points;
  const int A = lambda.groups;
  const double N = static_cast<double>(n_grid_points);
  adj.per_group_z.assign(static_cast<std::size_t>(A) * n_grid_points, 0.0);
  adj.sum_z.assign(n_grid_points, 0.0);
  for (int a = 0; a < A; ++a) {
    if (group_freqs[a] <= 0.0)
      throw std::invalid_argument("c_lambda: zero group frequency");
    for (int k = 0; k < n_grid_points; ++k) {
      const double nl = N * lambda.at(a, k);
      adj.per_group_z[static_cast<std::size_t>(a) * n_grid_points + k] = nl / group_freqs[a];
      adj.sum_z[k] += nl;
    }
  }
  return adj;
}

inline double c_lambda(double c, const NetLambda& lambda, int group, int grid_index,
                       const std::vector<double>& group_freqs, int n_grid_points) {
  const auto adj = c_lambda_adjustment(lambda, group_freqs, n_grid_points);
  return adj.apply(c, group, grid_index);
}

// --------------------------------------------------------------------------
// g_lambda prefix-sum table
// --------------------------------------------------------------------------

// g_lambda(y~, a, z) = sum_{z' <= z} c_lambda(y~, a, z') / N for z in {0} u Z;
// the z=0 entry is the empty prefix 0.
struct GLambdaTable {
  int groups = 0;
  int n_grid = 0;           // N
  std::size_t cover_size = 0;
  std::vector<double> prefix;  // (|cover| * groups) rows of (N+1) entries

  double at(int cover_idx, int a, int prefix_idx) const {
    return prefix[(static_cast<std::size_t>(cover_idx) * groups + a) *
                      (n_grid + 1) + prefix_idx];
  }
};

inline GLambdaTable build_g_lambda(const NetLambda& lambda, const LabelCover& cover,
                                   const Grid& grid, const LossSpec& spec,
                                   const std::vector<double>& group_freqs) {
  GLambdaTable table;
  table.groups = lambda.groups;
  table.n_grid = grid.n_points;
  table.cover_size = cover.size();
  const int N = grid.n_points;
  const auto adj = c_lambda_adjustment(lambda, group_freqs, N);
  table.prefix.assign(table.cover_size * table.groups * (N + 1), 0.0);
  std::size_t pos = 0;
  for (std::size_t yi = 0; yi < table.cover_size; ++yi) {
    const double y = cover.cover_points[yi];
    std::vector<double> base(N);
    for (int k = 0; k < N; ++k)
      base[k] = cost_coefficient(spec, cover, grid, y, grid.points[k]);
    for (int a = 0; a < table.groups; ++a) {
      table.prefix[pos++] = 0.0;  // empty prefix
      double acc = 0.0;
      for (int k = 0; k < N; ++k) {
        acc += adj.apply(base[k], a, k) / N;
        table.prefix[pos++] = acc;
      }
    }
  }
  return table;
}

// Minimizing prefix value of g_lambda for one (cover point, group) pair.
// Ties broken toward the largest qualifying grid value. Returns the target
// in {0} u Z.
inline double g_lambda_minimizer(const GLambdaTable& table, const Grid& grid,
                                 int cover_idx, int group) {
  int best = 0;
  double best_val = table.at(cover_idx, group, 0);
  for (int k = 1; k <= table.n_grid; ++k) {
    const double v = table.at(cover_idx, group, k);
    if (v <= best_val) {
      best_val = v;
      best = k;
    }
  }
  return best == 0 ? 0.0 : grid.points[best - 1];
}

// Per-example targets U_i, cached per (cover point, group) pair.
inline std::vector<double> ls_targets(const GLambdaTable& table, const Grid& grid,
                                      const Dataset& data, const LabelCover& cover) {
  std::vector<double> cache(table.cover_size * table.groups,
                            std::numeric_limits<double>::quiet_NaN());
  std::vector<double> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int yi = cover.index_of(cover.snap(data.examples[i].label));
    const int a = data.examples[i].group;
    double& slot = cache[static_cast<std::size_t>(yi) * table.groups + a];
    if (std::isnan(slot)) slot = g_lambda_minimizer(table, grid, yi, a);
    targets[i] = slot;
  }
  return targets;
}

// --------------------------------------------------------------------------
// Best_h reductions
// --------------------------------------------------------------------------

enum class OracleKind { CS, LS, MatchedLoss };

struct OracleConfig {
  OracleKind kind = OracleKind::LS;
  ThresholdFitConfig threshold;   // for the CS route
  LogisticFitConfig logistic;     // for the matched-loss route
};

// Materializes the n*N weighted +-1 instances of the CS reduction.
inline std::vector<ThresholdInstance> build_cs_instances(const Dataset& data,
                                                         const NetLambda& lambda,
                                                         const Grid& grid,
                                                         const LabelCover& cover,
                                                         const LossSpec& spec) {
  const int N = grid.n_points;
  const auto adj = c_lambda_adjustment(lambda, data.group_freqs, N);
  std::vector<ThresholdInstance> out;
  out.reserve(data.size() * N);
  for (const auto& e : data.examples) {
    const double y = cover.snap(e.label);
    for (int k = 0; k < N; ++k) {
      const double c = adj.apply(cost_coefficient(spec, cover, grid, y, grid.points[k]),
                                 e.group, k);
      // CS -> weighted binary: label favors 1 when the cost is <= 0
      out.push_back({std::abs(c), e.features, grid.points[k], c <= 0.0 ? +1 : -1});
    }
  }
  return out;
}

inline LinearModel best_h_cs(const Dataset& data, const NetLambda& lambda,
                             const Grid& grid, const LabelCover& cover,
                             const LossSpec& spec, const OracleConfig& cfg) {
  auto instances = build_cs_instances(data, lambda, grid, cover, spec);
  ThresholdFitConfig tc = cfg.threshold;
  tc.margin = grid.alpha / 2.0;
  const ThresholdModel t = fit_threshold_classifier(instances, tc);
  LinearModel m;
  m.weights = t.beta;
  m.intercept = t.intercept;
  return m;
}

inline LinearModel best_h_ls(const Dataset& data, const NetLambda& lambda,
                             const Grid& grid, const LabelCover& cover,
                             const LossSpec& spec) {
  const auto table = build_g_lambda(lambda, cover, grid, spec, data.group_freqs);
  const auto targets = ls_targets(table, grid, data, cover);
  std::vector<WeightedRow> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    rows.push_back({1.0, data.examples[i].features, targets[i]});
  return fit_weighted_least_squares(rows);
}

// Matched-loss reduction: two weighted rows per example with pseudo-labels
// (0, 1) and weights (1-U_i, U_i). For the half-square loss the construction
// collapses to the single-target least-squares reduction.
inline LinearModel best_h_matched(const Dataset& data, const NetLambda& lambda,
                                  const Grid& grid, const LabelCover& cover,
                                  const LossSpec& spec, const OracleConfig& cfg,
                                  const LinearModel* warm = nullptr) {
  if (spec.kind == LossKind::HalfSquare)
    return best_h_ls(data, lambda, grid, cover, spec);
  const auto table = build_g_lambda(lambda, cover, grid, spec, data.group_freqs);
  const auto targets = ls_targets(table, grid, data, cover);
  std::vector<WeightedRow> rows;
  rows.reserve(2 * data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double u = targets[i];
    rows.push_back({1.0 - u, data.examples[i].features, 0.0});
    rows.push_back({u, data.examples[i].features, 1.0});
  }
  LogisticFitConfig lc = cfg.logistic;
  return fit_weighted_logistic(rows, spec, &lc, warm);
}

// Oracle interface consumed by the SP solver.
using SpOracle = std::function<LinearModel(const Dataset&, const NetLambda&)>;

inline SpOracle make_sp_oracle(const Grid& grid, const LabelCover& cover,
                               const LossSpec& spec, OracleConfig cfg) {
  // warm start carries the previous matched fit across calls; the dual moves
  // slowly so the logistic solve restarts near its optimum
  auto warm = std::make_shared<std::optional<LinearModel>>();
  return [=](const Dataset& data, const NetLambda& lambda) {
    switch (cfg.kind) {
      case OracleKind::CS:
        return best_h_cs(data, lambda, grid, cover, spec, cfg);
      case OracleKind::LS:
        return best_h_ls(data, lambda, grid, cover, spec);
      case OracleKind::MatchedLoss: {
        LinearModel m = best_h_matched(data, lambda, grid, cover, spec, cfg,
                                       *warm ? &**warm : nullptr);
        *warm = m;
        return m;
      }
    }
    throw std::logic_error("unknown oracle kind");
  };
}

}  // namespace fairreg
