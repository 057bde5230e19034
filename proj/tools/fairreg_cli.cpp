// Command-line front end: train/sweep fair regressors, run baselines,
// generate synthetic data, and audit stored models.
//
// Exit codes: 0 success, 2 data error, 3 infeasible (BGL null verdict),
// 4 non-convergence in strict mode.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairreg/fairreg.hpp"
#include "fairreg/report.hpp"

namespace {

using namespace fairreg;

constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNotConverged = 4;

struct CommonData {
  std::string input;
  std::string label_column = "label";
  std::string group_column = "group";
  std::vector<std::string> feature_columns;
  bool normalize = false;
  double split_fraction = 0.5;
  std::uint64_t seed = 1;
};

void add_data_options(CLI::App* app, CommonData& d) {
  app->add_option("--input", d.input, "CSV file (RFC-4180, with header)")->required();
  app->add_option("--label", d.label_column, "label column name");
  app->add_option("--group", d.group_column, "protected-attribute column name");
  app->add_option("--features", d.feature_columns,
                  "feature column names (default: all remaining)");
  app->add_flag("--normalize", d.normalize, "min-max normalize label and features");
  app->add_option("--split", d.split_fraction, "training fraction");
  app->add_option("--seed", d.seed, "RNG seed for the split");
}

LoadedDataset load_or_die(const CommonData& d) {
  DataSchema schema{d.label_column, d.group_column, d.feature_columns, d.normalize};
  LoadedDataset loaded = load_csv(d.input, schema);
  for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
  return loaded;
}

LossKind parse_loss(const std::string& name) {
  if (name == "half-square") return LossKind::HalfSquare;
  if (name == "scaled-logistic") return LossKind::ScaledLogistic;
  throw CLI::ValidationError("--loss", "unknown loss '" + name + "'");
}

OracleKind parse_oracle(const std::string& name) {
  if (name == "cs") return OracleKind::CS;
  if (name == "ls") return OracleKind::LS;
  if (name == "matched") return OracleKind::MatchedLoss;
  throw CLI::ValidationError("--oracle", "unknown oracle '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairreg: fair regression via saddle-point reductions"};
  app.require_subcommand(1);

  CommonData data;
  std::string loss_name = "half-square";
  double logistic_scale = 5.0;
  std::string oracle_name = "ls";
  double B = 10.0, nu = 1e-3;
  int N = 40;
  long max_iters = 5000;
  bool strict = false;
  int workers = 0;
  std::string out_prefix = "fairreg";

  std::vector<double> slacks = {1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
  double single_slack = 0.1;
  std::string model_path;

  auto add_solver_options = [&](CLI::App* cmd) {
    cmd->add_option("--loss", loss_name, "half-square | scaled-logistic");
    cmd->add_option("--logistic-scale", logistic_scale, "C of the scaled logistic loss");
    cmd->add_option("--B", B, "dual budget");
    cmd->add_option("--nu", nu, "convergence threshold");
    cmd->add_option("--grid", N, "discretization grid size N");
    cmd->add_option("--max-iters", max_iters, "iteration safety cap");
    cmd->add_flag("--strict", strict, "exit 4 when a run does not converge");
    cmd->add_option("--out", out_prefix, "output file prefix");
  };

  auto* train_sp = app.add_subcommand("train-sp", "train one SP-constrained predictor");
  add_data_options(train_sp, data);
  add_solver_options(train_sp);
  train_sp->add_option("--eps", single_slack, "SP slack");
  train_sp->add_option("--oracle", oracle_name, "cs | ls | matched");

  auto* train_bgl = app.add_subcommand("train-bgl", "train one BGL-constrained predictor");
  add_data_options(train_bgl, data);
  add_solver_options(train_bgl);
  train_bgl->add_option("--zeta", single_slack, "BGL bound");

  auto* sweep_sp_cmd = app.add_subcommand("sweep-sp", "sweep SP slacks, emit tradeoff files");
  add_data_options(sweep_sp_cmd, data);
  add_solver_options(sweep_sp_cmd);
  sweep_sp_cmd->add_option("--eps-list", slacks, "SP slack values to sweep");
  sweep_sp_cmd->add_option("--oracle", oracle_name, "cs | ls | matched");
  sweep_sp_cmd->add_option("--workers", workers, "worker pool size (default: cores)");

  auto* sweep_bgl_cmd = app.add_subcommand("sweep-bgl", "sweep BGL bounds, emit tradeoff files");
  add_data_options(sweep_bgl_cmd, data);
  add_solver_options(sweep_bgl_cmd);
  sweep_bgl_cmd->add_option("--zeta-list", slacks, "BGL bound values to sweep");
  sweep_bgl_cmd->add_option("--workers", workers, "worker pool size (default: cores)");

  auto* baseline_cmd = app.add_subcommand("baseline", "unconstrained and SEO baselines");
  add_data_options(baseline_cmd, data);
  add_solver_options(baseline_cmd);

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  SynthSpec synth;
  std::string synth_out = "synth.csv";
  synth_cmd->add_option("--n", synth.n, "number of rows");
  synth_cmd->add_option("--d", synth.d, "feature dimension");
  synth_cmd->add_option("--group-weights", synth.group_weights, "group sampling weights");
  synth_cmd->add_option("--mean-shift", synth.mean_shift, "group shift of the first feature");
  synth_cmd->add_option("--noise-sd", synth.noise_sd, "latent noise standard deviation");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--out", synth_out, "output CSV path");

  auto* audit_cmd = app.add_subcommand("audit", "fairness metrics of a stored model");
  add_data_options(audit_cmd, data);
  audit_cmd->add_option("--model", model_path, "model JSON")->required();
  audit_cmd->add_option("--loss", loss_name, "half-square | scaled-logistic");
  audit_cmd->add_option("--logistic-scale", logistic_scale, "C of the scaled logistic loss");
  audit_cmd->add_option("--grid", N, "grid size for SP disparity");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      const Dataset d = synth_generate(synth);
      std::ofstream out(synth_out);
      if (!out) throw std::runtime_error("cannot write '" + synth_out + "'");
      out << "label,group";
      for (int j = 0; j < synth.d; ++j) out << ",x" << j;
      out << '\n';
      for (const auto& e : d.examples) {
        out << fmt_double(e.label) << ',' << e.group;
        for (double v : e.features) out << ',' << fmt_double(v);
        out << '\n';
      }
      std::cout << "wrote " << d.size() << " rows to " << synth_out << '\n';
      return kExitOk;
    }

    LossSpec spec = LossSpec::half_square();
    if (parse_loss(loss_name) == LossKind::ScaledLogistic)
      spec = LossSpec::scaled_logistic(logistic_scale);

    const LoadedDataset loaded = load_or_die(data);

    if (audit_cmd->parsed()) {
      const RandomizedPredictor q = load_model(model_path);
      const Grid grid = build_grid(N);
      nlohmann::ordered_json j;
      j["loss"] = q_loss(q, loaded.data, spec);
      j["sp_disparity"] = q_sp_disparity(q, loaded.data, grid);
      j["bgl_max_group_loss"] = q_bgl_disparity(q, loaded.data, spec);
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }

    auto [train, test] = split(loaded.data, data.split_fraction, data.seed);

    if (baseline_cmd->parsed()) {
      const LinearModel unconstrained = fit_unconstrained(train, spec);
      const Grid grid = build_grid(N);
      nlohmann::ordered_json j;
      j["unconstrained"]["train_loss"] = empirical_loss(train, spec, unconstrained);
      j["unconstrained"]["test_loss"] = empirical_loss(test, spec, unconstrained);
      j["unconstrained"]["train_disparity"] =
          q_sp_disparity(RandomizedPredictor::point_mass(unconstrained), train, grid);
      j["unconstrained"]["test_disparity"] =
          q_sp_disparity(RandomizedPredictor::point_mass(unconstrained), test, grid);
      if (train.group_count >= 2) {
        const LinearModel seo = fit_seo(train);
        j["seo"]["train_loss"] = empirical_loss(train, spec, seo);
        j["seo"]["test_loss"] = empirical_loss(test, spec, seo);
        j["seo"]["train_disparity"] =
            q_sp_disparity(RandomizedPredictor::point_mass(seo), train, grid);
        j["seo"]["test_disparity"] =
            q_sp_disparity(RandomizedPredictor::point_mass(seo), test, grid);
      }
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }

    if (train_sp->parsed() || sweep_sp_cmd->parsed()) {
      SPConfig cfg;
      cfg.B = B;
      cfg.nu = nu;
      cfg.N = N;
      cfg.max_iters = max_iters;
      cfg.oracle.kind = parse_oracle(oracle_name);
      const std::vector<double> eps_list =
          train_sp->parsed() ? std::vector<double>{single_slack} : slacks;
      const auto points = sweep_sp(train, test, eps_list, cfg, spec, workers);

      ReportConfig rc{"sp", eps_list, B, nu, N, data.seed, oracle_name};
      write_results_csv(out_prefix + "_results.csv", points);
      write_results_json(out_prefix + "_results.json", rc, points);
      write_history_jsonl(out_prefix + "_history.jsonl", points);
      if (train_sp->parsed() && !points.front().failed)
        save_model(out_prefix + "_model.json", points.front().predictor);
      for (const auto& p : points) {
        std::cout << "eps=" << p.eps_or_zeta;
        if (p.failed) {
          std::cout << " FAILED: " << p.error << '\n';
        } else {
          std::cout << " train_loss=" << p.train_loss << " test_loss=" << p.test_loss
                    << " train_disp=" << p.train_disparity
                    << " test_disp=" << p.test_disparity << " iters=" << p.iterations
                    << (p.converged ? "" : " (not converged)") << '\n';
        }
      }
      if (strict)
        for (const auto& p : points)
          if (!p.failed && !p.converged) return kExitNotConverged;
      return kExitOk;
    }

    if (train_bgl->parsed() || sweep_bgl_cmd->parsed()) {
      BGLConfig cfg;
      cfg.B = B;
      cfg.nu = nu;
      cfg.max_iters = max_iters;
      const std::vector<double> zeta_list =
          train_bgl->parsed() ? std::vector<double>{single_slack} : slacks;
      const auto points = sweep_bgl(train, test, zeta_list, cfg, spec, workers);

      ReportConfig rc{"bgl", zeta_list, B, nu, 0, data.seed, ""};
      write_results_csv(out_prefix + "_results.csv", points);
      write_results_json(out_prefix + "_results.json", rc, points);
      write_history_jsonl(out_prefix + "_history.jsonl", points);
      if (train_bgl->parsed() && !points.front().failed)
        save_model(out_prefix + "_model.json", points.front().predictor);
      bool any_infeasible = false;
      for (const auto& p : points) {
        std::cout << "zeta=" << p.eps_or_zeta;
        if (p.failed) {
          std::cout << " " << p.error << '\n';
          if (p.error.find("infeasible") != std::string::npos) any_infeasible = true;
        } else {
          std::cout << " train_loss=" << p.train_loss << " test_loss=" << p.test_loss
                    << " max_group_loss=" << p.train_disparity << " iters=" << p.iterations
                    << (p.converged ? "" : " (not converged)") << '\n';
        }
      }
      if (train_bgl->parsed() && any_infeasible) return kExitInfeasible;
      if (strict)
        for (const auto& p : points)
          if (!p.failed && !p.converged) return kExitNotConverged;
      return kExitOk;
    }
  } catch (const LoadError& ex) {
    std::cerr << "data error: " << ex.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return kExitOk;
}
