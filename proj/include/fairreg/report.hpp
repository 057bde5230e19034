#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairreg/harness.hpp"

namespace fairreg {

// All numbers are written with %.17g so that identical runs produce
// byte-identical files.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ReportConfig {
  std::string mode;                // "sp" or "bgl"
  std::vector<double> slacks;
  double B = 0.0;
  double nu = 0.0;
  int N = 0;
  std::uint64_t seed = 0;
  std::string oracle;
};

inline void write_results_csv(const std::string& path, const std::vector<TradeoffPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
  out << "eps,train_loss,test_loss,train_disp,test_disp,iters,converged\n";
  for (const auto& p : points) {
    if (p.failed) continue;
    out << fmt_double(p.eps_or_zeta) << ',' << fmt_double(p.train_loss) << ','
        << fmt_double(p.test_loss) << ',' << fmt_double(p.train_disparity) << ','
        << fmt_double(p.test_disparity) << ',' << p.iterations << ','
        << (p.converged ? 1 : 0) << '\n';
  }
}

inline std::vector<TradeoffPoint> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<TradeoffPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TradeoffPoint p;
    int conv = 0;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ss >> p.eps_or_zeta >> p.train_loss >> p.test_loss >> p.train_disparity >>
        p.test_disparity >> p.iterations >> conv;
    p.converged = conv != 0;
    points.push_back(std::move(p));
  }
  return points;
}

inline nlohmann::ordered_json point_to_json(const TradeoffPoint& p) {
  nlohmann::ordered_json j;
  j["slack"] = p.eps_or_zeta;
  j["failed"] = p.failed;
  if (p.failed) {
    j["error"] = p.error;
  } else {
    j["train_loss"] = p.train_loss;
    j["test_loss"] = p.test_loss;
    j["train_disparity"] = p.train_disparity;
    j["test_disparity"] = p.test_disparity;
    j["iterations"] = p.iterations;
    j["converged"] = p.converged;
  }
  return j;
}

inline void write_results_json(const std::string& path, const ReportConfig& cfg,
                               const std::vector<TradeoffPoint>& points) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config"]["mode"] = cfg.mode;
  j["config"]["slacks"] = cfg.slacks;
  j["config"]["B"] = cfg.B;
  j["config"]["nu"] = cfg.nu;
  j["config"]["N"] = cfg.N;
  j["config"]["seed"] = cfg.seed;
  j["config"]["oracle"] = cfg.oracle;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : points) j["points"].push_back(point_to_json(p));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// One JSON object per iteration, per sweep point.
inline void write_history_jsonl(const std::string& path, const std::vector<TradeoffPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write '" + path + "'");
  for (const auto& p : points) {
    for (const auto& rec : p.history) {
      nlohmann::ordered_json j;
      j["slack"] = p.eps_or_zeta;
      j["iteration"] = rec.iteration;
      j["lagrangian"] = rec.lagrangian;
      j["max_violation"] = rec.max_violation;
      j["gap_upper"] = rec.gap_upper;
      j["gap_lower"] = rec.gap_lower;
      out << j.dump() << '\n';
    }
  }
}

// --------------------------------------------------------------------------
// Model persistence
// --------------------------------------------------------------------------

inline nlohmann::ordered_json model_to_json(const RandomizedPredictor& q) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["atoms"] = nlohmann::ordered_json::array();
  for (const auto& a : q.atoms) {
    nlohmann::ordered_json atom;
    atom["weight"] = a.weight;
    atom["weights"] = a.model.weights;
    atom["intercept"] = a.model.intercept;
    j["atoms"].push_back(atom);
  }
  return j;
}

inline void save_model(const std::string& path, const RandomizedPredictor& q) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot write '" + path + "'");
  out << model_to_json(q).dump(2) << '\n';
}

inline RandomizedPredictor load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot read '" + path + "'");
  nlohmann::json j;
  in >> j;
  if (j.value("format_version", 0) != 1)
    throw std::runtime_error("load_model: unsupported format version");
  RandomizedPredictor q;
  for (const auto& atom : j.at("atoms")) {
    RandomizedPredictor::Atom a;
    a.weight = atom.at("weight").get<double>();
    a.model.weights = atom.at("weights").get<std::vector<double>>();
    a.model.intercept = atom.at("intercept").get<double>();
    q.atoms.push_back(std::move(a));
  }
  q.validate();
  return q;
}

}  // namespace fairreg
