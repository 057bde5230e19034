#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fairreg/core.hpp"
#include "fairreg/learners.hpp"
#include "fairreg/moments.hpp"
#include "fairreg/sp_solver.hpp"

namespace fairreg {

struct BGLConfig {
  std::vector<double> zeta_hat;  // per-group; broadcast when size 1
  double B = 10.0;
  double nu = 0.05;
  long max_iters = 20000;
};

struct BGLResult {
  std::optional<RandomizedPredictor> q_hat;  // empty = null verdict
  std::vector<double> lambda_bar;
  double gap_upper = 0.0;
  double gap_lower = 0.0;
  double gap_lower_raw = 0.0;
  long iterations = 0;
  bool converged = false;
  double loss = 0.0;                   // overall loss of the averaged solution
  std::vector<double> group_losses;    // per-group losses of the averaged solution
  std::vector<IterationRecord> history;
};

inline double lagrangian_bgl(double loss_q, const BGLVector& bgl,
                             const std::vector<double>& lambda,
                             const std::vector<double>& zeta_hat) {
  double s = loss_q;
  for (std::size_t a = 0; a < lambda.size(); ++a)
    s += lambda[a] * (bgl.values[a] - zeta_hat[a]);
  return s;
}

// lambda_a = B * exp(theta_a) / (1 + sum_a exp(theta_a))
inline std::vector<double> bgl_lambda_from_theta(const std::vector<double>& theta, double budget) {
  double m = 0.0;
  for (double v : theta) m = std::max(m, v);
  double denom = std::exp(-m);
  for (double v : theta) denom += std::exp(v - m);
  std::vector<double> lambda(theta.size());
  for (std::size_t a = 0; a < theta.size(); ++a)
    lambda[a] = budget * std::exp(theta[a] - m) / denom;
  return lambda;
}

// Budget on the single most violated group constraint, zero otherwise.
inline std::vector<double> best_lambda_bgl(const BGLVector& bgl,
                                           const std::vector<double>& zeta_hat, double budget) {
  std::vector<double> lambda(bgl.values.size(), 0.0);
  int best = -1;
  double best_violation = 0.0;
  for (std::size_t a = 0; a < bgl.values.size(); ++a) {
    const double v = bgl.values[a] - zeta_hat[a];
    if (v > best_violation) {
      best_violation = v;
      best = static_cast<int>(a);
    }
  }
  if (best >= 0) lambda[best] = budget;
  return lambda;
}

// Weighted risk minimization with per-example weight w_i = 1/n + lambda_a / n_a.
inline LinearModel best_f_bgl(const Dataset& data, const std::vector<double>& lambda,
                              const LossSpec& spec,
                              LogisticFitConfig* logistic_cfg = nullptr) {
  const double n = static_cast<double>(data.size());
  std::vector<WeightedRow> rows;
  rows.reserve(data.size());
  for (const auto& e : data.examples) {
    const double w = 1.0 / n + lambda[e.group] / static_cast<double>(data.group_sizes[e.group]);
    rows.push_back({w, e.features, e.label});
  }
  if (spec.kind == LossKind::HalfSquare) return fit_weighted_least_squares(rows);
  return fit_weighted_logistic(rows, spec, logistic_cfg);
}

// Exponentiated-gradient solver for bounded group loss, learning rate
// eta = nu / (2B). On convergence the averaged solution is returned only if
// every group loss clears zeta_hat_a + (1+2nu)/B; otherwise the verdict is
// null (the empirical problem is infeasible at these slacks).
inline BGLResult run_bgl(const Dataset& data, const BGLConfig& config, const LossSpec& spec) {
  if (data.size() == 0) throw std::invalid_argument("run_bgl: empty dataset");
  const int A = data.group_count;
  std::vector<double> zeta = config.zeta_hat;
  if (zeta.size() == 1) zeta.assign(A, zeta[0]);
  if (static_cast<int>(zeta.size()) != A)
    throw std::invalid_argument("run_bgl: zeta_hat size mismatch");
  const double B = config.B;
  const double eta = config.nu / (2.0 * B);

  std::vector<double> theta(A, 0.0);
  std::vector<LinearModel> iterates;
  double avg_loss = 0.0;
  std::vector<double> avg_bgl(A, 0.0);
  std::vector<double> avg_lambda(A, 0.0);

  BGLResult result;
  bool saddle = false;

  for (long t = 1; t <= config.max_iters; ++t) {
    const auto lambda = bgl_lambda_from_theta(theta, B);
    LinearModel f = best_f_bgl(data, lambda, spec);
    const auto preds = predictions_of(data, [&](const std::vector<double>& x) {
      return f.predict(x);
    });
    const double loss_t = empirical_loss(data, spec, preds);
    const BGLVector bgl_t = bgl_group_losses(data, spec, preds);
    iterates.push_back(std::move(f));

    const double tt = static_cast<double>(t);
    avg_loss += (loss_t - avg_loss) / tt;
    for (int a = 0; a < A; ++a) {
      avg_bgl[a] += (bgl_t.values[a] - avg_bgl[a]) / tt;
      avg_lambda[a] += (lambda[a] - avg_lambda[a]) / tt;
    }

    BGLVector avg_vec{avg_bgl};
    const auto best = best_lambda_bgl(avg_vec, zeta, B);
    const double L_q_best = lagrangian_bgl(avg_loss, avg_vec, best, zeta);
    const double L_q_avg = lagrangian_bgl(avg_loss, avg_vec, avg_lambda, zeta);
    const double gap_upper = L_q_best - L_q_avg;

    const LinearModel f_resp = best_f_bgl(data, avg_lambda, spec);
    const auto resp_preds = predictions_of(data, [&](const std::vector<double>& x) {
      return f_resp.predict(x);
    });
    const BGLVector resp_bgl = bgl_group_losses(data, spec, resp_preds);
    const double L_resp =
        lagrangian_bgl(empirical_loss(data, spec, resp_preds), resp_bgl, avg_lambda, zeta);
    const double gap_lower_raw = L_q_avg - L_resp;

    double max_violation = 0.0;
    for (int a = 0; a < A; ++a)
      max_violation = std::max(max_violation, avg_bgl[a] - zeta[a]);
    result.history.push_back({t, L_q_avg, max_violation, gap_upper, gap_lower_raw});
    result.iterations = t;
    result.gap_upper = std::max(gap_upper, 0.0);
    result.gap_lower_raw = gap_lower_raw;
    result.gap_lower = std::max(gap_lower_raw, 0.0);

    if (std::max(gap_upper, gap_lower_raw) <= config.nu) {
      result.converged = true;
      saddle = true;
      break;
    }

    for (int a = 0; a < A; ++a)
      theta[a] += eta * (bgl_t.values[a] - zeta[a]);
  }

  result.lambda_bar = avg_lambda;
  result.loss = avg_loss;
  result.group_losses = avg_bgl;

  // Feasibility gate, checked per group.
  bool feasible = true;
  const double gate = (1.0 + 2.0 * config.nu) / B;
  for (int a = 0; a < A; ++a)
    if (avg_bgl[a] > zeta[a] + gate) feasible = false;

  if (!saddle || feasible)
    result.q_hat = detail::uniform_mixture(iterates);
  // converged but infeasible: q_hat stays empty (null verdict)
  return result;
}

}  // namespace fairreg
