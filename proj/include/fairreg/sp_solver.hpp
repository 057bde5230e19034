#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairreg/core.hpp"
#include "fairreg/discretize.hpp"
#include "fairreg/moments.hpp"
#include "fairreg/oracles.hpp"

namespace fairreg {

// --------------------------------------------------------------------------
// Dual state: softmax parameters theta and the derived lambda tables
// --------------------------------------------------------------------------

struct DualStateSP {
  MomentVector theta_plus;   // reusing the (a,z)-indexed table layout
  MomentVector theta_minus;
  MomentVector lambda_plus;
  MomentVector lambda_minus;
  double budget = 0.0;
};

// lambda^s_{a,z} = B * exp(theta^s_{a,z}) / (1 + sum exp(theta)), computed
// with max-subtraction.
inline void lambda_from_theta(const MomentVector& theta_plus, const MomentVector& theta_minus,
                              double budget, MomentVector& lambda_plus,
                              MomentVector& lambda_minus) {
  double m = 0.0;  // the "1" term corresponds to exp(0)
  for (double v : theta_plus.values) m = std::max(m, v);
  for (double v : theta_minus.values) m = std::max(m, v);
  double denom = std::exp(-m);
  for (double v : theta_plus.values) denom += std::exp(v - m);
  for (double v : theta_minus.values) denom += std::exp(v - m);
  lambda_plus = theta_plus;
  lambda_minus = theta_minus;
  for (auto& v : lambda_plus.values) v = budget * std::exp(v - m) / denom;
  for (auto& v : lambda_minus.values) v = budget * std::exp(v - m) / denom;
}

// theta+ += eta*(gamma - eps);  theta- += eta*(-gamma - eps)
inline void exp_grad_step(MomentVector& theta_plus, MomentVector& theta_minus,
                          const MomentVector& moments, const std::vector<double>& eps_hat,
                          double eta) {
  const int N = moments.n_grid;
  for (int a = 0; a < moments.groups; ++a) {
    for (int k = 0; k < N; ++k) {
      const double g = moments.at(a, k);
      theta_plus.at(a, k) += eta * (g - eps_hat[a]);
      theta_minus.at(a, k) += eta * (-g - eps_hat[a]);
    }
  }
}

// L = cost + sum_{a,z} [ lambda+ (gamma - eps) + lambda- (-gamma - eps) ]
inline double lagrangian_sp(double cost, const MomentVector& moments,
                            const MomentVector& lambda_plus, const MomentVector& lambda_minus,
                            const std::vector<double>& eps_hat) {
  double s = cost;
  for (int a = 0; a < moments.groups; ++a) {
    for (int k = 0; k < moments.n_grid; ++k) {
      const double g = moments.at(a, k);
      s += lambda_plus.at(a, k) * (g - eps_hat[a]);
      s += lambda_minus.at(a, k) * (-g - eps_hat[a]);
    }
  }
  return s;
}

// Closed-form Best_lambda: budget on the single most violated signed
// constraint, zero table when nothing is violated. Ties broken by lowest
// (a,z) index.
inline void best_lambda_sp(const MomentVector& moments, const std::vector<double>& eps_hat,
                           double budget, MomentVector& lambda_plus,
                           MomentVector& lambda_minus) {
  lambda_plus = MomentVector(moments.groups, moments.n_grid);
  lambda_minus = MomentVector(moments.groups, moments.n_grid);
  int best_a = -1, best_k = -1;
  double best_violation = 0.0;
  for (int a = 0; a < moments.groups; ++a) {
    for (int k = 0; k < moments.n_grid; ++k) {
      const double v = std::abs(moments.at(a, k)) - eps_hat[a];
      if (v > best_violation) {
        best_violation = v;
        best_a = a;
        best_k = k;
      }
    }
  }
  if (best_a < 0) return;
  if (moments.at(best_a, best_k) > eps_hat[best_a])
    lambda_plus.at(best_a, best_k) = budget;
  else
    lambda_minus.at(best_a, best_k) = budget;
}

// --------------------------------------------------------------------------
// Solver
// --------------------------------------------------------------------------

struct SPConfig {
  std::vector<double> eps_hat;  // per-group; broadcast when size 1
  double B = 10.0;
  double nu = 0.05;
  int N = 20;
  long max_iters = 20000;
  OracleConfig oracle;
};

struct IterationRecord {
  long iteration;
  double lagrangian;
  double max_violation;
  double gap_upper;  // nu-bar
  double gap_lower;  // nu-underbar, raw (may be negative for heuristic oracles)
};

struct SPResult {
  RandomizedPredictor q_hat;
  MomentVector lambda_bar_plus;
  MomentVector lambda_bar_minus;
  double gap_upper = 0.0;    // clamped at >= 0
  double gap_lower = 0.0;
  double gap_lower_raw = 0.0;
  long iterations = 0;
  bool converged = false;
  double cost = 0.0;                 // empirical cost of q_hat
  MomentVector moments;              // disparities of q_hat
  std::vector<IterationRecord> history;
};

namespace detail {

// Uniform mixture over iterates with exact 1/t weights; duplicate models
// merge their weights.
inline RandomizedPredictor uniform_mixture(const std::vector<LinearModel>& iterates) {
  RandomizedPredictor q;
  const double w = 1.0 / static_cast<double>(iterates.size());
  for (const auto& m : iterates) {
    bool merged = false;
    for (auto& atom : q.atoms) {
      if (atom.model == m) {
        atom.weight += w;
        merged = true;
        break;
      }
    }
    if (!merged) q.atoms.push_back({w, m});
  }
  return q;
}

}  // namespace detail

// Algorithm: exponentiated-gradient ascent on the dual against oracle best
// responses on the primal, learning rate eta = nu / (8B). Terminates on the
// first iteration where both duality gaps are <= nu; hitting max_iters
// returns the current averaged solution flagged non-converged.
inline SPResult run_sp(const Dataset& data, const SPConfig& config, const Grid& grid,
                       const LabelCover& cover, const LossSpec& spec,
                       const SpOracle& oracle) {
  if (data.size() == 0) throw std::invalid_argument("run_sp: empty dataset");
  const int A = data.group_count;
  const int N = grid.n_points;
  std::vector<double> eps = config.eps_hat;
  if (eps.size() == 1) eps.assign(A, eps[0]);
  if (static_cast<int>(eps.size()) != A)
    throw std::invalid_argument("run_sp: eps_hat size mismatch");
  const double B = config.B;
  const double eta = config.nu / (8.0 * B);

  MomentVector theta_plus(A, N), theta_minus(A, N);
  MomentVector lambda_plus, lambda_minus;
  MomentVector best_plus, best_minus;

  std::vector<LinearModel> iterates;
  // Running averages for Q_t and lambda-bar_t.
  double avg_cost = 0.0;
  MomentVector avg_moments(A, N);
  MomentVector avg_lambda_plus(A, N), avg_lambda_minus(A, N);

  SPResult result;
  result.converged = false;

  for (long t = 1; t <= config.max_iters; ++t) {
    lambda_from_theta(theta_plus, theta_minus, B, lambda_plus, lambda_minus);

    const NetLambda net = net_lambda(lambda_plus, lambda_minus);
    LinearModel h = oracle(data, net);
    const auto preds = predictions_of(data, [&](const std::vector<double>& x) {
      return h.predict(x);
    });
    const double cost_t = empirical_cost(data, spec, cover, grid, preds);
    const MomentVector moments_t = group_cdf_moments(data, grid, preds);
    iterates.push_back(std::move(h));

    const double tt = static_cast<double>(t);
    avg_cost += (cost_t - avg_cost) / tt;
    for (std::size_t i = 0; i < avg_moments.values.size(); ++i) {
      avg_moments.values[i] += (moments_t.values[i] - avg_moments.values[i]) / tt;
      avg_lambda_plus.values[i] += (lambda_plus.values[i] - avg_lambda_plus.values[i]) / tt;
      avg_lambda_minus.values[i] += (lambda_minus.values[i] - avg_lambda_minus.values[i]) / tt;
    }

    // nu-bar: how much the dual player could still gain against Q_t
    best_lambda_sp(avg_moments, eps, B, best_plus, best_minus);
    const double L_q_best = lagrangian_sp(avg_cost, avg_moments, best_plus, best_minus, eps);
    const double L_q_avg = lagrangian_sp(avg_cost, avg_moments, avg_lambda_plus, avg_lambda_minus, eps);
    const double gap_upper = L_q_best - L_q_avg;

    // nu-underbar: how much the primal player could still gain against
    // lambda-bar_t (one extra oracle call)
    const NetLambda avg_net = net_lambda(avg_lambda_plus, avg_lambda_minus);
    const LinearModel h_resp = oracle(data, avg_net);
    const auto resp_preds = predictions_of(data, [&](const std::vector<double>& x) {
      return h_resp.predict(x);
    });
    const double resp_cost = empirical_cost(data, spec, cover, grid, resp_preds);
    const MomentVector resp_moments = group_cdf_moments(data, grid, resp_preds);
    const double L_resp = lagrangian_sp(resp_cost, resp_moments, avg_lambda_plus, avg_lambda_minus, eps);
    const double gap_lower_raw = L_q_avg - L_resp;

    result.history.push_back({t, L_q_avg, avg_moments.max_abs(), gap_upper, gap_lower_raw});
    result.iterations = t;
    result.gap_upper = std::max(gap_upper, 0.0);
    result.gap_lower_raw = gap_lower_raw;
    result.gap_lower = std::max(gap_lower_raw, 0.0);

    if (std::max(gap_upper, gap_lower_raw) <= config.nu) {
      result.converged = true;
      break;
    }

    exp_grad_step(theta_plus, theta_minus, moments_t, eps, eta);
  }

  result.q_hat = detail::uniform_mixture(iterates);
  result.lambda_bar_plus = avg_lambda_plus;
  result.lambda_bar_minus = avg_lambda_minus;
  result.cost = avg_cost;
  result.moments = avg_moments;
  return result;
}

}  // namespace fairreg
