#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairreg {

// --------------------------------------------------------------------------
// Domain types
// --------------------------------------------------------------------------

struct Example {
  std::vector<double> features;
  int group = 0;
  double label = 0.0;  // in [0,1]
};

struct Dataset {
  std::vector<Example> examples;
  int group_count = 0;
  std::vector<std::size_t> group_sizes;  // n_a
  std::vector<double> group_freqs;       // p_a = n_a / n

  std::size_t size() const { return examples.size(); }

  // Indices of examples belonging to each group, in dataset order.
  std::vector<std::vector<std::size_t>> group_index() const {
    std::vector<std::vector<std::size_t>> idx(group_count);
    for (std::size_t i = 0; i < examples.size(); ++i)
      idx[examples[i].group].push_back(i);
    return idx;
  }
};

// Validates invariants and fills in the per-group bookkeeping.
inline Dataset make_dataset(std::vector<Example> examples, int group_count) {
  if (examples.empty()) throw std::invalid_argument("dataset: no examples");
  if (group_count < 1) throw std::invalid_argument("dataset: group_count < 1");
  Dataset d;
  d.group_count = group_count;
  d.group_sizes.assign(group_count, 0);
  for (const auto& e : examples) {
    if (e.label < 0.0 || e.label > 1.0)
      throw std::invalid_argument("dataset: label outside [0,1]");
    if (e.group < 0 || e.group >= group_count)
      throw std::invalid_argument("dataset: group id out of range");
    for (double x : e.features)
      if (!std::isfinite(x))
        throw std::invalid_argument("dataset: non-finite feature");
    ++d.group_sizes[e.group];
  }
  for (int a = 0; a < group_count; ++a)
    if (d.group_sizes[a] == 0)
      throw std::invalid_argument("dataset: empty group " + std::to_string(a));
  d.group_freqs.resize(group_count);
  const double n = static_cast<double>(examples.size());
  for (int a = 0; a < group_count; ++a)
    d.group_freqs[a] = static_cast<double>(d.group_sizes[a]) / n;
  d.examples = std::move(examples);
  return d;
}

// --------------------------------------------------------------------------
// Loss functions
// --------------------------------------------------------------------------

enum class LossKind { HalfSquare, ScaledLogistic };

struct LossSpec {
  LossKind kind = LossKind::HalfSquare;
  double C = 5.0;  // scale of the logistic variant, > 1

  static LossSpec half_square() { return LossSpec{LossKind::HalfSquare, 0.0}; }
  static LossSpec scaled_logistic(double C = 5.0) {
    if (C <= 1.0) throw std::invalid_argument("scaled_logistic: C must be > 1");
    return LossSpec{LossKind::ScaledLogistic, C};
  }
};

namespace detail {
inline void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::domain_error(std::string(what) + " outside [0,1]");
}
// log(1 + e^t) without overflow
inline double log1pexp(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}
}  // namespace detail

inline double eval_loss(const LossSpec& spec, double y, double u) {
  detail::check_unit(y, "eval_loss: y");
  detail::check_unit(u, "eval_loss: u");
  switch (spec.kind) {
    case LossKind::HalfSquare:
      return (y - u) * (y - u) / 2.0;
    case LossKind::ScaledLogistic: {
      const double t = -spec.C * (2.0 * y - 1.0) * (2.0 * u - 1.0);
      return detail::log1pexp(t) / (2.0 * detail::log1pexp(spec.C));
    }
  }
  throw std::logic_error("eval_loss: unknown kind");
}

// An element of the subdifferential of l(y, .) at u.
inline double loss_subderivative(const LossSpec& spec, double y, double u) {
  detail::check_unit(y, "loss_subderivative: y");
  detail::check_unit(u, "loss_subderivative: u");
  switch (spec.kind) {
    case LossKind::HalfSquare:
      return u - y;
    case LossKind::ScaledLogistic: {
      const double s = 2.0 * y - 1.0;
      const double t = -spec.C * s * (2.0 * u - 1.0);
      const double sigma = 1.0 / (1.0 + std::exp(-t));
      return -2.0 * spec.C * s * sigma / (2.0 * detail::log1pexp(spec.C));
    }
  }
  throw std::logic_error("loss_subderivative: unknown kind");
}

// --------------------------------------------------------------------------
// Predictors
// --------------------------------------------------------------------------

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double raw(const std::vector<double>& x) const {
    if (x.size() != weights.size())
      throw std::invalid_argument("predict: feature dimension mismatch");
    double s = intercept;
    for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
    return s;
  }
  // Outputs clipped to [0,1] after the affine map.
  double predict(const std::vector<double>& x) const {
    return std::clamp(raw(x), 0.0, 1.0);
  }
  bool operator==(const LinearModel& o) const {
    return intercept == o.intercept && weights == o.weights;
  }
};

inline double predict(const LinearModel& m, const std::vector<double>& x) {
  return m.predict(x);
}

struct RandomizedPredictor {
  struct Atom {
    double weight;
    LinearModel model;
  };
  std::vector<Atom> atoms;

  void validate() const {
    if (atoms.empty()) throw std::invalid_argument("randomized predictor: no atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (a.weight < 0.0) throw std::invalid_argument("randomized predictor: negative weight");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("randomized predictor: weights do not sum to 1");
  }

  static RandomizedPredictor point_mass(LinearModel m) {
    return RandomizedPredictor{{{1.0, std::move(m)}}};
  }
};

// Weight-averaged value of per_atom across atoms.
inline double q_expectation(const RandomizedPredictor& q,
                            const std::function<double(const LinearModel&)>& per_atom) {
  q.validate();
  double s = 0.0;
  for (const auto& a : q.atoms) s += a.weight * per_atom(a.model);
  return s;
}

// --------------------------------------------------------------------------
// Numerics helpers shared across modules
// --------------------------------------------------------------------------

// Pairwise (tree) summation for reproducible accumulation order.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

inline double pairwise_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace fairreg
