#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairreg/core.hpp"
#include "fairreg/lp.hpp"

namespace fairreg {

// One weighted regression/classification row.
struct WeightedRow {
  double weight;
  std::vector<double> features;
  double target;
};

namespace detail {

// Gaussian elimination with partial pivoting; solves M x = rhs in place.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> M,
                                       std::vector<double> rhs) {
  const int n = static_cast<int>(M.size());
  for (int col = 0; col < n; ++col) {
    int p = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(M[r][col]) > std::abs(M[p][col])) p = r;
    if (std::abs(M[p][col]) < 1e-14)
      throw std::runtime_error("solve_dense: singular system");
    std::swap(M[p], M[col]);
    std::swap(rhs[p], rhs[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = M[r][col] / M[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) M[r][c] -= f * M[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < n; ++c) s -= M[r][c] * x[c];
    x[r] = s / M[r][r];
  }
  return x;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Weighted least squares via normal equations (+ small ridge)
// --------------------------------------------------------------------------

inline LinearModel fit_weighted_least_squares(const std::vector<WeightedRow>& rows,
                                              double ridge = -1.0) {
  if (rows.empty()) throw std::invalid_argument("wls: no rows");
  bool any_positive = false;
  for (const auto& r : rows)
    if (r.weight > 0.0) { any_positive = true; break; }
  if (!any_positive) throw std::invalid_argument("wls: all weights zero");

  const int d = static_cast<int>(rows.front().features.size());
  const int dim = d + 1;  // intercept column appended last
  std::vector<std::vector<double>> G(dim, std::vector<double>(dim, 0.0));
  std::vector<double> rhs(dim, 0.0);
  std::vector<double> xi(dim);
  for (const auto& r : rows) {
    if (static_cast<int>(r.features.size()) != d)
      throw std::invalid_argument("wls: inconsistent feature dimension");
    for (int j = 0; j < d; ++j) xi[j] = r.features[j];
    xi[d] = 1.0;
    for (int j = 0; j < dim; ++j) {
      const double wx = r.weight * xi[j];
      rhs[j] += wx * r.target;
      for (int k = j; k < dim; ++k) G[j][k] += wx * xi[k];
    }
  }
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < j; ++k) G[j][k] = G[k][j];

  if (ridge < 0.0) {
    double trace = 0.0;
    for (int j = 0; j < dim; ++j) trace += G[j][j];
    ridge = 1e-8 * trace / dim;
  }
  for (int j = 0; j < dim; ++j) G[j][j] += ridge;

  std::vector<double> sol;
  try {
    sol = detail::solve_dense(G, rhs);
  } catch (const std::runtime_error&) {
    // jitter and retry once
    for (int j = 0; j < dim; ++j) G[j][j] += 1e-6;
    sol = detail::solve_dense(G, rhs);
  }
  LinearModel m;
  m.weights.assign(sol.begin(), sol.begin() + d);
  m.intercept = sol[d];
  return m;
}

// --------------------------------------------------------------------------
// Weighted risk minimization under the scaled logistic loss
// --------------------------------------------------------------------------

struct LogisticFitConfig {
  int max_iters = 500;
  double tol = 1e-7;       // gradient infinity-norm
  double init_step = 1.0;  // backtracking start
  bool converged = true;   // set on return
};

// Damped Newton with backtracking line search on
// sum_i W_i * l_scaled_logistic(y_i, score_i). The loss formula extends
// smoothly to raw scores outside [0,1], so the fit runs unclamped (clamping
// stays in predict); the unclamped infimum coincides with the clamped one.
inline LinearModel fit_weighted_logistic(const std::vector<WeightedRow>& rows,
                                         const LossSpec& spec,
                                         LogisticFitConfig* config = nullptr,
                                         const LinearModel* warm = nullptr) {
  if (rows.empty()) throw std::invalid_argument("logistic: no rows");
  const double C = spec.C;
  const double norm = 2.0 * detail::log1pexp(C);
  const int d = static_cast<int>(rows.front().features.size());
  const int dim = d + 1;
  std::vector<double> w(dim, 0.0);
  if (warm && static_cast<int>(warm->weights.size()) == d) {
    for (int j = 0; j < d; ++j) w[j] = warm->weights[j];
    w[d] = warm->intercept;
  }

  auto score = [&](const std::vector<double>& x) {
    double s = w[d];
    for (int j = 0; j < d; ++j) s += w[j] * x[j];
    return s;
  };
  auto row_loss = [&](const WeightedRow& r) {
    const double u = score(r.features);
    const double t = -C * (2.0 * r.target - 1.0) * (2.0 * u - 1.0);
    return r.weight * detail::log1pexp(t) / norm;
  };
  auto objective = [&]() {
    double s = 0.0;
    for (const auto& r : rows) s += row_loss(r);
    return s;
  };
  std::vector<double> xi(dim);
  auto grad_hess = [&](std::vector<double>& g, std::vector<std::vector<double>>& H) {
    std::fill(g.begin(), g.end(), 0.0);
    for (auto& row : H) std::fill(row.begin(), row.end(), 0.0);
    for (const auto& r : rows) {
      const double u = score(r.features);
      const double s2 = 2.0 * r.target - 1.0;
      const double t = -C * s2 * (2.0 * u - 1.0);
      const double sigma = 1.0 / (1.0 + std::exp(-t));
      const double wdl = r.weight * (-2.0 * C * s2 * sigma / norm);   // d loss / d u
      const double wd2 = r.weight * 4.0 * C * C * sigma * (1.0 - sigma) / norm;
      for (int j = 0; j < d; ++j) xi[j] = r.features[j];
      xi[d] = 1.0;
      for (int j = 0; j < dim; ++j) {
        g[j] += wdl * xi[j];
        for (int k = j; k < dim; ++k) H[j][k] += wd2 * xi[j] * xi[k];
      }
    }
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < j; ++k) H[j][k] = H[k][j];
  };

  LogisticFitConfig local;
  LogisticFitConfig& cfg = config ? *config : local;
  std::vector<double> g(dim), trial(dim);
  std::vector<std::vector<double>> H(dim, std::vector<double>(dim));
  double obj = objective();
  cfg.converged = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    grad_hess(g, H);
    double ginf = 0.0;
    for (double v : g) ginf = std::max(ginf, std::abs(v));
    if (ginf <= cfg.tol) {
      cfg.converged = true;
      break;
    }
    double trace = 0.0;
    for (int j = 0; j < dim; ++j) trace += H[j][j];
    for (int j = 0; j < dim; ++j) H[j][j] += 1e-10 * trace + 1e-12;
    std::vector<double> dir;
    try {
      dir = detail::solve_dense(H, g);
    } catch (const std::runtime_error&) {
      dir = g;  // gradient fallback
    }
    double decr = 0.0;  // <g, dir>, positive for a descent direction
    for (int j = 0; j < dim; ++j) decr += g[j] * dir[j];
    if (decr <= 0.0) {
      dir = g;
      decr = 0.0;
      for (double v : g) decr += v * v;
    }
    double step = cfg.init_step;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (int j = 0; j < dim; ++j) trial[j] = w[j] - step * dir[j];
      std::swap(w, trial);
      const double new_obj = objective();
      std::swap(w, trial);
      if (new_obj <= obj - 1e-4 * step * decr) {
        std::swap(w, trial);
        const double gain = obj - new_obj;
        obj = new_obj;
        moved = true;
        // flat tail (e.g. separable rows push the optimum to infinity)
        if (gain <= 1e-10 * std::max(1.0, std::abs(obj))) {
          cfg.converged = true;
          it = cfg.max_iters;
        }
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      cfg.converged = true;  // no descent direction left at this scale
      break;
    }
  }
  LinearModel m;
  m.weights.assign(w.begin(), w.begin() + d);
  m.intercept = w[d];
  return m;
}

// --------------------------------------------------------------------------
// Threshold classifier h(x,z) = 1{<beta,x> + b >= z} via the weighted hinge
// surrogate with margin alpha/2 over the infinity-ball.
// --------------------------------------------------------------------------

// One weighted +-1-labeled instance over augmented features (x, z).
struct ThresholdInstance {
  double weight;
  std::vector<double> features;
  double threshold;  // z
  int label;         // +1 or -1
};

struct ThresholdFitConfig {
  int iterations = 2000;
  double step_scale = 0.5;  // step_scale / sqrt(t)
  double margin = 0.0;      // alpha/2; set by caller
};

struct ThresholdModel {
  std::vector<double> beta;
  double intercept = 0.0;

  double score(const std::vector<double>& x, double z) const {
    double s = intercept - z;
    for (std::size_t j = 0; j < x.size(); ++j) s += beta[j] * x[j];
    return s;
  }
};

inline double hinge_objective(const std::vector<ThresholdInstance>& instances,
                              const ThresholdModel& m, double margin) {
  double obj = 0.0;
  for (const auto& inst : instances)
    obj += inst.weight * std::max(0.0, margin - inst.label * m.score(inst.features, inst.threshold));
  return obj;
}

// Projected subgradient descent, best iterate kept. All coordinates of
// (beta, intercept) stay inside the infinity-ball of radius 1.
inline ThresholdModel fit_threshold_classifier(const std::vector<ThresholdInstance>& instances,
                                               const ThresholdFitConfig& cfg) {
  if (instances.empty()) throw std::invalid_argument("threshold fit: no instances");
  const int d = static_cast<int>(instances.front().features.size());
  ThresholdModel m;
  m.beta.assign(d, 0.0);
  ThresholdModel best = m;
  double best_obj = hinge_objective(instances, m, cfg.margin);
  double wsum = 0.0;
  for (const auto& inst : instances) wsum += inst.weight;
  if (wsum <= 0.0) return best;

  std::vector<double> g(d + 1);
  for (int t = 1; t <= cfg.iterations; ++t) {
    std::fill(g.begin(), g.end(), 0.0);
    for (const auto& inst : instances) {
      if (cfg.margin - inst.label * m.score(inst.features, inst.threshold) > 0.0) {
        const double f = -inst.weight * inst.label;
        for (int j = 0; j < d; ++j) g[j] += f * inst.features[j];
        g[d] += f;
      }
    }
    const double step = cfg.step_scale / (wsum * std::sqrt(static_cast<double>(t)));
    for (int j = 0; j < d; ++j)
      m.beta[j] = std::clamp(m.beta[j] - step * g[j], -1.0, 1.0);
    m.intercept = std::clamp(m.intercept - step * g[d], -1.0, 1.0);
    const double obj = hinge_objective(instances, m, cfg.margin);
    if (obj < best_obj) {
      best_obj = obj;
      best = m;
    }
  }
  return best;
}

// Exact LP path for desk-scale instances (<= 500 rows): minimize
// sum_i W_i t_i with t_i >= margin - Y_i * score_i, coordinates in [-1,1].
inline ThresholdModel fit_threshold_classifier_lp(const std::vector<ThresholdInstance>& instances,
                                                  double margin) {
  if (instances.size() > 500)
    throw std::invalid_argument("threshold LP: instance too large for the exact path");
  const int d = static_cast<int>(instances.front().features.size());
  const int n = static_cast<int>(instances.size());
  // Variables: beta shifted to [0,2] (beta_j = v_j - 1), intercept likewise,
  // then t_i >= 0.
  const int nv = (d + 1) + n;
  SimplexLP lp(nv);
  for (int i = 0; i < n; ++i) lp.set_objective(d + 1 + i, instances[i].weight);
  for (int j = 0; j <= d; ++j) {
    std::vector<double> row(nv, 0.0);
    row[j] = 1.0;
    lp.add_le(row, 2.0);
  }
  for (int i = 0; i < n; ++i) {
    const auto& inst = instances[i];
    // t_i + Y_i * (sum_j beta_j x_j + b - z) >= margin, with beta_j = v_j - 1
    std::vector<double> row(nv, 0.0);
    double shift = 0.0;
    for (int j = 0; j < d; ++j) {
      row[j] = inst.label * inst.features[j];
      shift += inst.features[j];
    }
    row[d] = inst.label;
    shift += 1.0;
    row[d + 1 + i] = 1.0;
    // Y*(v.x - shift + b' - 1 - z) => rhs adjusts by Y*(shift + z ... )
    lp.add_ge(row, margin + inst.label * (shift + inst.threshold));
  }
  auto sol = lp.solve();
  if (sol.status != SimplexLP::Status::Optimal)
    throw std::runtime_error("threshold LP: solver failed");
  ThresholdModel m;
  m.beta.resize(d);
  for (int j = 0; j < d; ++j) m.beta[j] = sol.x[j] - 1.0;
  m.intercept = sol.x[d] - 1.0;
  return m;
}

}  // namespace fairreg
