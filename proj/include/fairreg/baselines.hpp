#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fairreg/core.hpp"
#include "fairreg/learners.hpp"
#include "fairreg/lp.hpp"
#include "fairreg/moments.hpp"

namespace fairreg {

// Unit-weight fit with the learner matching the loss kind.
inline LinearModel fit_unconstrained(const Dataset& data, const LossSpec& spec) {
  std::vector<WeightedRow> rows;
  rows.reserve(data.size());
  for (const auto& e : data.examples) rows.push_back({1.0, e.features, e.label});
  if (spec.kind == LossKind::HalfSquare) return fit_weighted_least_squares(rows);
  return fit_weighted_logistic(rows, spec);
}

// Least squares constrained to zero empirical correlation between the
// (pre-clip) predictions and each centered one-hot group indicator, solved
// through the KKT linear system. One constraint per group beyond the first.
inline LinearModel fit_seo(const Dataset& data) {
  if (data.group_count < 2)
    throw std::invalid_argument("fit_seo: needs two or more groups");
  const int d = static_cast<int>(data.examples.front().features.size());
  const int dim = d + 1;                      // + intercept
  const int m = data.group_count - 1;         // constraints
  const double n = static_cast<double>(data.size());

  // Gram matrix and rhs of the unconstrained problem.
  std::vector<std::vector<double>> K(dim + m, std::vector<double>(dim + m, 0.0));
  std::vector<double> rhs(dim + m, 0.0);
  std::vector<double> xi(dim);
  for (const auto& e : data.examples) {
    for (int j = 0; j < d; ++j) xi[j] = e.features[j];
    xi[d] = 1.0;
    for (int j = 0; j < dim; ++j) {
      rhs[j] += xi[j] * e.label;
      for (int k = j; k < dim; ++k) K[j][k] += xi[j] * xi[k];
    }
  }
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < j; ++k) K[j][k] = K[k][j];

  // Constraint columns C_j = sum_i (g_ik - mean) * x_ij. The intercept column
  // vanishes because the indicators are centered.
  for (int g = 1; g <= m; ++g) {
    const double mean = data.group_freqs[g];
    std::vector<double> col(dim, 0.0);
    for (const auto& e : data.examples) {
      const double c = (e.group == g ? 1.0 : 0.0) - mean;
      for (int j = 0; j < d; ++j) col[j] += c * e.features[j];
      // centered indicator sums to zero against the intercept
    }
    for (int j = 0; j < dim; ++j) {
      K[j][dim + g - 1] = col[j];
      K[dim + g - 1][j] = col[j];
    }
  }
  (void)n;

  std::vector<double> sol;
  try {
    sol = detail::solve_dense(K, rhs);
  } catch (const std::runtime_error&) {
    // ridge jitter; the multiplier block needs it too when a constraint
    // column vanishes (inactive constraint)
    for (int j = 0; j < dim + m; ++j) K[j][j] += 1e-8;
    sol = detail::solve_dense(K, rhs);
  }
  LinearModel model;
  model.weights.assign(sol.begin(), sol.begin() + d);
  model.intercept = sol[d];
  return model;
}

// --------------------------------------------------------------------------
// Exact small-instance reference solver over a fixed candidate set
// --------------------------------------------------------------------------

struct CandidateSet {
  std::vector<LinearModel> models;
};

struct ExactSpSolution {
  bool feasible = false;
  double optimum = 0.0;
  std::vector<double> distribution;  // over candidates
};

// Exact optimum of min cost(Q) s.t. |gamma_{a,z}(Q)| <= eps_hat_a over the
// simplex of the given candidates, via the dense two-phase simplex.
inline ExactSpSolution solve_sp_exact(const Dataset& data, const CandidateSet& candidates,
                                      const Grid& grid, const LabelCover& cover,
                                      const LossSpec& spec, const std::vector<double>& eps_hat_in) {
  const int K = static_cast<int>(candidates.models.size());
  if (K == 0 || K > 50)
    throw std::invalid_argument("solve_sp_exact: candidate set must have 1..50 members");
  std::vector<double> eps = eps_hat_in;
  if (eps.size() == 1) eps.assign(data.group_count, eps[0]);

  std::vector<double> costs(K);
  std::vector<MomentVector> gammas(K);
  for (int k = 0; k < K; ++k) {
    costs[k] = empirical_cost(data, spec, cover, grid, candidates.models[k]);
    gammas[k] = group_cdf_moments(data, grid, candidates.models[k]);
  }

  SimplexLP lp(K);
  // costs may be negative; shift so the phase-2 objective is well behaved
  for (int k = 0; k < K; ++k) lp.set_objective(k, costs[k]);
  lp.add_eq(std::vector<double>(K, 1.0), 1.0);
  for (int a = 0; a < data.group_count; ++a) {
    for (int z = 0; z < grid.n_points; ++z) {
      std::vector<double> row(K);
      for (int k = 0; k < K; ++k) row[k] = gammas[k].at(a, z);
      lp.add_le(row, eps[a]);
      std::vector<double> neg(K);
      for (int k = 0; k < K; ++k) neg[k] = -row[k];
      lp.add_le(neg, eps[a]);
    }
  }
  const auto sol = lp.solve();
  ExactSpSolution out;
  if (sol.status != SimplexLP::Status::Optimal) return out;  // infeasible verdict
  out.feasible = true;
  out.optimum = sol.objective;
  out.distribution = sol.x;
  return out;
}

}  // namespace fairreg
