#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fairreg/baselines.hpp"
#include "fairreg/bgl_solver.hpp"
#include "fairreg/core.hpp"
#include "fairreg/moments.hpp"
#include "fairreg/sp_solver.hpp"

namespace fairreg {

// --------------------------------------------------------------------------
// CSV ingestion
// --------------------------------------------------------------------------

struct DataSchema {
  std::string label_column;
  std::string group_column;
  std::vector<std::string> feature_columns;  // empty = all remaining
  bool normalize = false;                    // min-max for label and features
};

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace csv {

// RFC-4180 row parser (quoted fields, embedded commas/quotes).
inline std::vector<std::string> parse_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace csv

struct LoadedDataset {
  Dataset data;
  std::vector<std::string> feature_names;
  std::vector<std::string> group_labels;  // id -> original value
  double label_min = 0.0, label_max = 1.0;
  std::vector<std::string> warnings;
};

inline LoadedDataset load_csv(std::istream& in, const DataSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError("load_csv: empty file");
  const auto header = csv::parse_row(line);
  auto find_col = [&](const std::string& name) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    throw LoadError("load_csv: missing column '" + name + "'");
  };
  if (schema.label_column == schema.group_column)
    throw LoadError("load_csv: label and group columns must differ");
  const int label_col = find_col(schema.label_column);
  const int group_col = find_col(schema.group_column);
  std::vector<int> feat_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (static_cast<int>(j) != label_col && static_cast<int>(j) != group_col)
        feat_cols.push_back(static_cast<int>(j));
  } else {
    for (const auto& name : schema.feature_columns) feat_cols.push_back(find_col(name));
  }

  LoadedDataset out;
  std::map<std::string, int> group_ids;  // first-appearance order via vector below
  std::vector<double> labels;
  std::vector<int> groups;
  std::vector<std::vector<double>> features;
  long row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto row = csv::parse_row(line);
    if (row.size() != header.size())
      throw LoadError("load_csv: row " + std::to_string(row_no) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(header.size()));
    auto parse_num = [&](int col) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(row[col], &pos);
        if (pos != row[col].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (...) {
        throw LoadError("load_csv: row " + std::to_string(row_no) + ", column '" +
                        header[col] + "': cannot parse '" + row[col] + "' as a number");
      }
    };
    labels.push_back(parse_num(label_col));
    const std::string& gv = row[group_col];
    auto it = group_ids.find(gv);
    if (it == group_ids.end()) {
      const int id = static_cast<int>(out.group_labels.size());
      group_ids.emplace(gv, id);
      out.group_labels.push_back(gv);
      groups.push_back(id);
    } else {
      groups.push_back(it->second);
    }
    std::vector<double> x;
    x.reserve(feat_cols.size());
    for (int c : feat_cols) x.push_back(parse_num(c));
    features.push_back(std::move(x));
  }
  if (labels.empty()) throw LoadError("load_csv: no data rows");

  // Drop constant feature columns.
  std::vector<bool> keep(feat_cols.size(), true);
  for (std::size_t j = 0; j < feat_cols.size(); ++j) {
    bool constant = true;
    for (std::size_t i = 1; i < features.size(); ++i)
      if (features[i][j] != features[0][j]) { constant = false; break; }
    if (constant) {
      keep[j] = false;
      out.warnings.push_back("dropped constant feature column '" + header[feat_cols[j]] + "'");
    }
  }
  for (std::size_t j = 0; j < feat_cols.size(); ++j)
    if (keep[j]) out.feature_names.push_back(header[feat_cols[j]]);

  // Label normalization (min-max), and optional feature normalization.
  double lo = labels[0], hi = labels[0];
  for (double y : labels) { lo = std::min(lo, y); hi = std::max(hi, y); }
  out.label_min = lo;
  out.label_max = hi;
  const bool need_norm = schema.normalize || lo < 0.0 || hi > 1.0;
  if (need_norm && !schema.normalize)
    out.warnings.push_back("labels outside [0,1]; applying min-max normalization");

  std::vector<double> fmin, fmax;
  if (schema.normalize) {
    fmin = features[0];
    fmax = features[0];
    for (const auto& x : features)
      for (std::size_t j = 0; j < x.size(); ++j) {
        fmin[j] = std::min(fmin[j], x[j]);
        fmax[j] = std::max(fmax[j], x[j]);
      }
  }

  std::vector<Example> examples;
  examples.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Example e;
    e.group = groups[i];
    e.label = need_norm && hi > lo ? (labels[i] - lo) / (hi - lo)
                                   : std::clamp(labels[i], 0.0, 1.0);
    for (std::size_t j = 0; j < feat_cols.size(); ++j) {
      if (!keep[j]) continue;
      double v = features[i][j];
      if (schema.normalize && fmax[j] > fmin[j]) v = (v - fmin[j]) / (fmax[j] - fmin[j]);
      e.features.push_back(v);
    }
    examples.push_back(std::move(e));
  }
  out.data = make_dataset(std::move(examples), static_cast<int>(out.group_labels.size()));
  return out;
}

inline LoadedDataset load_csv(const std::string& path, const DataSchema& schema) {
  std::ifstream in(path);
  if (!in) throw LoadError("load_csv: cannot open '" + path + "'");
  return load_csv(in, schema);
}

// --------------------------------------------------------------------------
// Split and synthetic generation
// --------------------------------------------------------------------------

// Seeded shuffle then split; both halves must retain every group (up to 20
// re-draws on derived seeds).
inline std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                         std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split: fraction must be in (0,1)");
  for (int attempt = 0; attempt < 20; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t cut = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(data.size())));
    std::vector<Example> left, right;
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < cut ? left : right).push_back(data.examples[order[i]]);
    std::vector<int> lcount(data.group_count, 0), rcount(data.group_count, 0);
    for (const auto& e : left) ++lcount[e.group];
    for (const auto& e : right) ++rcount[e.group];
    bool ok = !left.empty() && !right.empty();
    for (int a = 0; a < data.group_count && ok; ++a)
      ok = lcount[a] > 0 && rcount[a] > 0;
    if (ok)
      return {make_dataset(std::move(left), data.group_count),
              make_dataset(std::move(right), data.group_count)};
  }
  throw std::runtime_error("split: a group vanished from one side in all 20 attempts");
}

struct SynthSpec {
  std::size_t n = 1000;
  int d = 3;
  std::vector<double> group_weights = {0.5, 0.5};
  double mean_shift = 0.0;  // added to the first feature for group a > 0
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
};

// Standard-normal features; group shifts the first feature's mean; the latent
// score <w*, x> + noise is min-max squashed to [0,1].
inline Dataset synth_generate(const SynthSpec& spec) {
  if (spec.n < 2 || spec.d < 1 || spec.group_weights.size() < 2)
    throw std::invalid_argument("synth_generate: invalid sizes");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::discrete_distribution<int> group_dist(spec.group_weights.begin(),
                                             spec.group_weights.end());
  std::vector<double> w_star(spec.d);
  for (int j = 0; j < spec.d; ++j) w_star[j] = (j == 0) ? 1.0 : 0.3;

  std::vector<Example> examples(spec.n);
  std::vector<double> scores(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Example& e = examples[i];
    e.group = group_dist(rng);
    e.features.resize(spec.d);
    for (int j = 0; j < spec.d; ++j) e.features[j] = normal(rng);
    e.features[0] += spec.mean_shift * static_cast<double>(e.group);
    double s = spec.noise_sd * normal(rng);
    for (int j = 0; j < spec.d; ++j) s += w_star[j] * e.features[j];
    scores[i] = s;
  }
  double lo = scores[0], hi = scores[0];
  for (double s : scores) { lo = std::min(lo, s); hi = std::max(hi, s); }
  for (std::size_t i = 0; i < spec.n; ++i)
    examples[i].label = hi > lo ? (scores[i] - lo) / (hi - lo) : 0.5;
  return make_dataset(std::move(examples),
                      static_cast<int>(spec.group_weights.size()));
}

// --------------------------------------------------------------------------
// Metrics of randomized predictors
// --------------------------------------------------------------------------

inline double q_loss(const RandomizedPredictor& q, const Dataset& data, const LossSpec& spec) {
  return q_expectation(q, [&](const LinearModel& m) { return empirical_loss(data, spec, m); });
}

// Disparity of the mixture CDF: max_{a,z} |sum_f Q(f) gamma_{a,z}(f)|.
inline double q_sp_disparity(const RandomizedPredictor& q, const Dataset& data,
                             const Grid& grid) {
  q.validate();
  MomentVector mix(data.group_count, grid.n_points);
  for (const auto& atom : q.atoms) {
    const MomentVector m = group_cdf_moments(data, grid, atom.model);
    for (std::size_t i = 0; i < mix.values.size(); ++i)
      mix.values[i] += atom.weight * m.values[i];
  }
  return mix.max_abs();
}

inline double q_bgl_disparity(const RandomizedPredictor& q, const Dataset& data,
                              const LossSpec& spec) {
  q.validate();
  std::vector<double> mix(data.group_count, 0.0);
  for (const auto& atom : q.atoms) {
    const BGLVector v = bgl_group_losses(data, spec, atom.model);
    for (int a = 0; a < data.group_count; ++a) mix[a] += atom.weight * v.values[a];
  }
  return *std::max_element(mix.begin(), mix.end());
}

// --------------------------------------------------------------------------
// Slack sweeps and Pareto selection
// --------------------------------------------------------------------------

struct TradeoffPoint {
  double eps_or_zeta = 0.0;
  double train_loss = 0.0, test_loss = 0.0;
  double train_disparity = 0.0, test_disparity = 0.0;
  long iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
  std::vector<IterationRecord> history;
  RandomizedPredictor predictor;
};

inline TradeoffPoint sweep_point_sp(const Dataset& train, const Dataset& test, double eps,
                                    SPConfig config, const Grid& grid,
                                    const LabelCover& cover, const LossSpec& spec) {
  TradeoffPoint pt;
  pt.eps_or_zeta = eps;
  try {
    config.eps_hat = {eps};
    const auto oracle = make_sp_oracle(grid, cover, spec, config.oracle);
    SPResult r = run_sp(train, config, grid, cover, spec, oracle);
    pt.iterations = r.iterations;
    pt.converged = r.converged;
    pt.train_loss = q_loss(r.q_hat, train, spec);
    pt.test_loss = q_loss(r.q_hat, test, spec);
    pt.train_disparity = q_sp_disparity(r.q_hat, train, grid);
    pt.test_disparity = q_sp_disparity(r.q_hat, test, grid);
    pt.history = std::move(r.history);
    pt.predictor = std::move(r.q_hat);
  } catch (const std::exception& ex) {
    pt.failed = true;
    pt.error = ex.what();
  }
  return pt;
}

inline std::vector<TradeoffPoint> sweep_sp(const Dataset& train, const Dataset& test,
                                           const std::vector<double>& eps_list,
                                           const SPConfig& base, const LossSpec& spec,
                                           int workers = 0) {
  if (eps_list.empty()) throw std::invalid_argument("sweep_sp: empty eps list");
  const Grid grid = build_grid(base.N);
  std::vector<double> labels;
  for (const auto& e : train.examples) labels.push_back(e.label);
  const LabelCover cover = build_label_cover(labels, grid.alpha);

  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  std::vector<TradeoffPoint> points(eps_list.size());
  std::size_t next = 0;
  while (next < eps_list.size()) {
    const std::size_t batch = std::min<std::size_t>(workers, eps_list.size() - next);
    std::vector<std::future<TradeoffPoint>> futures;
    for (std::size_t b = 0; b < batch; ++b) {
      const double eps = eps_list[next + b];
      futures.push_back(std::async(std::launch::async, [&, eps] {
        return sweep_point_sp(train, test, eps, base, grid, cover, spec);
      }));
    }
    for (std::size_t b = 0; b < batch; ++b) points[next + b] = futures[b].get();
    next += batch;
  }
  return points;
}

inline TradeoffPoint sweep_point_bgl(const Dataset& train, const Dataset& test, double zeta,
                                     BGLConfig config, const LossSpec& spec) {
  TradeoffPoint pt;
  pt.eps_or_zeta = zeta;
  try {
    config.zeta_hat = {zeta};
    BGLResult r = run_bgl(train, config, spec);
    pt.iterations = r.iterations;
    pt.converged = r.converged;
    if (!r.q_hat) {
      pt.failed = true;
      pt.error = "infeasible (null verdict)";
      pt.history = std::move(r.history);
      return pt;
    }
    pt.train_loss = q_loss(*r.q_hat, train, spec);
    pt.test_loss = q_loss(*r.q_hat, test, spec);
    pt.train_disparity = q_bgl_disparity(*r.q_hat, train, spec);
    pt.test_disparity = q_bgl_disparity(*r.q_hat, test, spec);
    pt.history = std::move(r.history);
    pt.predictor = std::move(*r.q_hat);
  } catch (const std::exception& ex) {
    pt.failed = true;
    pt.error = ex.what();
  }
  return pt;
}

inline std::vector<TradeoffPoint> sweep_bgl(const Dataset& train, const Dataset& test,
                                            const std::vector<double>& zeta_list,
                                            const BGLConfig& base, const LossSpec& spec,
                                            int workers = 0) {
  if (zeta_list.empty()) throw std::invalid_argument("sweep_bgl: empty zeta list");
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  std::vector<TradeoffPoint> points(zeta_list.size());
  std::size_t next = 0;
  while (next < zeta_list.size()) {
    const std::size_t batch = std::min<std::size_t>(workers, zeta_list.size() - next);
    std::vector<std::future<TradeoffPoint>> futures;
    for (std::size_t b = 0; b < batch; ++b) {
      const double z = zeta_list[next + b];
      futures.push_back(std::async(std::launch::async, [&, z] {
        return sweep_point_bgl(train, test, z, base, spec);
      }));
    }
    for (std::size_t b = 0; b < batch; ++b) points[next + b] = futures[b].get();
    next += batch;
  }
  return points;
}

// Points not dominated in (train_loss, train_disparity); ties kept.
inline std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points) {
  std::vector<TradeoffPoint> front;
  for (const auto& p : points) {
    if (p.failed) continue;
    bool dominated = false;
    for (const auto& q : points) {
      if (q.failed) continue;
      if (q.train_loss <= p.train_loss && q.train_disparity <= p.train_disparity &&
          (q.train_loss < p.train_loss || q.train_disparity < p.train_disparity)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(p);
  }
  return front;
}

}  // namespace fairreg
