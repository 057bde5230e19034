// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairreg/fairreg.hpp"

using namespace fairreg;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset random_two_group(std::mt19937_64& rng, std::size_t n, double shift) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Example> ex;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(i % 2);
    const double x = 0.15 * normal(rng) + 0.5 + shift * (a == 0 ? -1.0 : 1.0);
    const double y = std::clamp(x + 0.1 * normal(rng), 0.0, 1.0);
    ex.push_back({{x, normal(rng)}, a, y});
  }
  return make_dataset(std::move(ex), 2);
}

// Exact best response over fixed candidates with cached statistics.
struct CandidateOracle {
  std::vector<LinearModel> models;
  std::vector<double> costs;
  std::vector<MomentVector> gammas;

  CandidateOracle(const Dataset& d, const Grid& grid, const LabelCover& cover,
                  const LossSpec& spec, std::vector<LinearModel> candidates)
      : models(std::move(candidates)) {
    for (const auto& m : models) {
      costs.push_back(empirical_cost(d, spec, cover, grid, m));
      gammas.push_back(group_cdf_moments(d, grid, m));
    }
  }

  LinearModel best(const NetLambda& lambda) const {
    int arg = 0;
    double best_val = 1e30;
    for (std::size_t k = 0; k < models.size(); ++k) {
      double v = costs[k];
      for (std::size_t i = 0; i < lambda.values.size(); ++i)
        v += lambda.values[i] * gammas[k].values[i];
      if (v < best_val) {
        best_val = v;
        arg = static_cast<int>(k);
      }
    }
    return models[arg];
  }
};

// ---------------------------------------------------------------------------

void criterion1() {
  const double tol = 1e-12;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool ok = true;
  double worst = 0.0;
  int draws = 0;
  while (draws < 10000) {
    const int N = 2 + static_cast<int>(rng() % 63);
    const Grid grid = build_grid(N);
    std::vector<double> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(unif(rng));
    const auto cover = build_label_cover(labels, grid.alpha);
    for (int k = 0; k < 50 && draws < 10000; ++k, ++draws) {
      const auto spec = (rng() % 2 == 0) ? LossSpec::half_square()
                                         : LossSpec::scaled_logistic(5.0);
      const double y = labels[rng() % labels.size()];
      const double u = unif(rng);
      const double gap = std::abs(eval_loss(spec, y, u) -
                                  discretized_loss(spec, cover, grid, y, u));
      worst = std::max(worst, gap - grid.alpha);
      if (gap > grid.alpha + tol) ok = false;
    }
  }
  std::ostringstream d;
  d << "worst excess " << worst;
  report(1, "discretization bound", ok, d.str());
}

void criterion2() {
  const double tol = 1e-12;
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  SynthSpec sspec;
  sspec.n = 200;
  sspec.d = 2;
  sspec.mean_shift = 1.0;
  sspec.seed = 21;
  const Dataset d = synth_generate(sspec);
  const Grid grid = build_grid(8);
  std::vector<double> labels;
  for (const auto& e : d.examples) labels.push_back(e.label);
  const auto cover = build_label_cover(labels, grid.alpha);
  const auto spec = LossSpec::half_square();

  bool ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const LinearModel f{{coef(rng), coef(rng)}, coef(rng)};
    const auto preds = predictions_of(d, [&](const std::vector<double>& x) {
      return f.predict(x);
    });
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = d.examples[i].label;
      const double ys = cover.snap(y);
      double rhs = eval_loss(spec, ys, grid.alpha / 2.0);
      for (double z : grid.points)
        if (preds[i] >= z) rhs += cost_coefficient(spec, cover, grid, ys, z) / 8.0;
      const double lhs = discretized_loss(spec, cover, grid, y,
                                          snap_down(preds[i], grid.alpha));
      if (std::abs(lhs - rhs) > tol) ok = false;
    }
    std::vector<double> snapped(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i)
      snapped[i] = snap_down(preds[i], grid.alpha);
    const auto m1 = group_cdf_moments(d, grid, preds);
    const auto m2 = group_cdf_moments(d, grid, snapped);
    if (m1.values != m2.values) ok = false;
  }
  report(2, "telescoping identity and moment snap-equality", ok, "");
}

void criterion3() {
  const double tol = 1e-12;
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  bool ok = true;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 20 + rng() % 481;
    const int groups = 2 + static_cast<int>(rng() % 3);
    const int N = 2 + static_cast<int>(rng() % 15);
    std::vector<Example> ex;
    for (std::size_t i = 0; i < n; ++i)
      ex.push_back({{unif(rng), unif(rng)},
                    static_cast<int>(i % groups), unif(rng)});
    const Dataset d = make_dataset(std::move(ex), groups);
    const Grid grid = build_grid(N);
    const LinearModel f{{coef(rng), coef(rng)}, coef(rng)};
    const auto preds = predictions_of(d, [&](const std::vector<double>& x) {
      return f.predict(x);
    });
    const auto fast = group_cdf_moments(d, grid, preds);
    const auto naive = naive_moments(d, grid, preds);
    for (std::size_t i = 0; i < fast.values.size(); ++i) {
      const double gap = std::abs(fast.values[i] - naive.values[i]);
      worst = std::max(worst, gap);
      if (gap > tol) ok = false;
    }
  }
  std::ostringstream det;
  det << "worst gap " << worst;
  report(3, "fast vs naive moments", ok, det.str());
}

void criterion4() {
  const double tol = 1e-9;
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto spec = LossSpec::half_square();
  const double B = 5.0, nu = 0.05, eps = 0.1;
  const Grid grid = build_grid(4);
  const double cap = 16.0 * B * B * std::log(2.0 * 2 * 4 + 1.0) / (nu * nu);

  bool ok = true;
  std::string why;
  for (int inst = 0; inst < 20 && ok; ++inst) {
    const Dataset d = random_two_group(rng, 60, 0.2);
    std::vector<double> labels;
    for (const auto& e : d.examples) labels.push_back(e.label);
    const auto cover = build_label_cover(labels, grid.alpha);

    // warm-up run with the LS oracle supplies realistic iterates
    SPConfig warm;
    warm.eps_hat = {eps};
    warm.B = B;
    warm.nu = nu;
    warm.N = 4;
    warm.max_iters = 10;
    const auto ls = make_sp_oracle(grid, cover, spec, warm.oracle);
    const SPResult warm_r = run_sp(d, warm, grid, cover, spec, ls);

    std::vector<LinearModel> cands{LinearModel{{0.0, 0.0}, 0.5}};  // feasible anchor
    for (const auto& atom : warm_r.q_hat.atoms) {
      if (cands.size() >= 4) break;
      cands.push_back(atom.model);
    }
    while (cands.size() < 5)
      cands.push_back(LinearModel{{coef(rng), coef(rng)}, coef(rng)});

    const CandidateOracle oracle(d, grid, cover, spec, cands);
    SPConfig cfg;
    cfg.eps_hat = {eps};
    cfg.B = B;
    cfg.nu = nu;
    cfg.N = 4;
    cfg.max_iters = static_cast<long>(cap) + 1;
    const SPResult r = run_sp(d, cfg, grid, cover, spec,
                              [&](const Dataset&, const NetLambda& l) {
                                return oracle.best(l);
                              });
    const auto exact = solve_sp_exact(d, CandidateSet{cands}, grid, cover, spec, {eps});
    if (!exact.feasible) { ok = false; why = "reference LP infeasible"; break; }
    if (!(r.converged && r.iterations <= static_cast<long>(cap))) {
      ok = false;
      why = "no convergence within the iteration cap";
      break;
    }
    if (r.cost > exact.optimum + 2.0 * nu + tol) {
      std::ostringstream ss;
      ss << "cost " << r.cost << " vs optimum " << exact.optimum;
      ok = false;
      why = ss.str();
      break;
    }
    if (r.moments.max_abs() > eps + (2.0 + 2.0 * nu) / B + tol) {
      std::ostringstream ss;
      ss << "violation " << r.moments.max_abs();
      ok = false;
      why = ss.str();
      break;
    }
  }
  report(4, "saddle-point certificate on tiny instances", ok, why);
}

void criterion5() {
  const auto spec = LossSpec::half_square();
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // group 0 learnable, group 1 irreducibly noisy (best loss 0.125)
  std::vector<Example> ex;
  for (int i = 0; i < 40; ++i) {
    const double x = unif(rng);
    ex.push_back({{x}, 0, x});
    ex.push_back({{0.5}, 1, i % 2 == 0 ? 0.0 : 1.0});
  }
  const Dataset d = make_dataset(std::move(ex), 2);
  const double B = 10.0, nu = 0.05;
  const double cap = 4.0 * B * B * std::log(3.0) / (nu * nu);

  bool ok = true;
  std::string why;

  BGLConfig vac;
  vac.zeta_hat = {1.0};
  vac.B = B;
  vac.nu = nu;
  vac.max_iters = static_cast<long>(cap) + 1;
  const BGLResult rv = run_bgl(d, vac, spec);
  const LinearModel plain = fit_unconstrained(d, spec);
  const double plain_loss = empirical_loss(d, spec, plain);
  if (!rv.converged || !rv.q_hat.has_value()) {
    ok = false;
    why = "vacuous run did not converge";
  } else if (rv.loss > plain_loss + 2.0 * nu + 1e-6) {
    std::ostringstream ss;
    ss << "vacuous loss " << rv.loss << " vs " << plain_loss;
    ok = false;
    why = ss.str();
  } else if (rv.iterations > static_cast<long>(cap)) {
    ok = false;
    why = "vacuous run over the iteration cap";
  }

  if (ok) {
    BGLConfig tight;
    tight.zeta_hat = {0.0};
    tight.B = B;  // gate (1+2nu)/B = 0.11 < 0.125
    tight.nu = nu;
    tight.max_iters = static_cast<long>(cap) + 1;
    const BGLResult rt = run_bgl(d, tight, spec);
    if (!rt.converged) {
      ok = false;
      why = "tight run did not converge";
    } else if (rt.q_hat.has_value()) {
      ok = false;
      why = "expected the null verdict at zeta=0";
    } else if (rt.iterations > static_cast<long>(cap)) {
      ok = false;
      why = "tight run over the iteration cap";
    }
  }
  report(5, "bounded-group-loss contract", ok, why);
}

void criterion6() {
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  bool ok = true;
  std::string why;

  // (a) Lagrangian equals the per-threshold objective
  for (int rep = 0; rep < 20 && ok; ++rep) {
    std::vector<Example> ex;
    for (int i = 0; i < 80; ++i)
      ex.push_back({{unif(rng), unif(rng)}, i % 2, unif(rng)});
    const Dataset d = make_dataset(std::move(ex), 2);
    const Grid grid = build_grid(5);
    std::vector<double> labels;
    for (const auto& e : d.examples) labels.push_back(e.label);
    const auto cover = build_label_cover(labels, grid.alpha);
    const auto spec = (rep % 2 == 0) ? LossSpec::half_square()
                                     : LossSpec::scaled_logistic(5.0);
    NetLambda l(2, 5);
    for (auto& v : l.values) v = 0.3 * coef(rng);
    const LinearModel f{{coef(rng), coef(rng)}, coef(rng)};
    const auto preds = predictions_of(d, [&](const std::vector<double>& x) {
      return f.predict(x);
    });
    double lhs = empirical_cost(d, spec, cover, grid, preds);
    const MomentVector gamma = group_cdf_moments(d, grid, preds);
    for (std::size_t i = 0; i < l.values.size(); ++i) lhs += l.values[i] * gamma.values[i];
    const auto adj = c_lambda_adjustment(l, d.group_freqs, 5);
    double rhs = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = cover.snap(d.examples[i].label);
      for (int k = 0; k < 5; ++k)
        if (preds[i] >= grid.points[k])
          rhs += adj.apply(cost_coefficient(spec, cover, grid, y, grid.points[k]),
                           d.examples[i].group, k) / 5.0;
    }
    rhs /= static_cast<double>(d.size());
    if (std::abs(lhs - rhs) > 1e-10) {
      ok = false;
      why = "Lagrangian/objective mismatch";
    }
  }

  // (b) matched-loss == LS for half-square
  if (ok) {
    std::vector<Example> ex;
    for (int i = 0; i < 60; ++i)
      ex.push_back({{unif(rng), unif(rng)}, i % 2, unif(rng)});
    const Dataset d = make_dataset(std::move(ex), 2);
    const Grid grid = build_grid(6);
    std::vector<double> labels;
    for (const auto& e : d.examples) labels.push_back(e.label);
    const auto cover = build_label_cover(labels, grid.alpha);
    const auto spec = LossSpec::half_square();
    for (int rep = 0; rep < 5 && ok; ++rep) {
      NetLambda l(2, 6);
      for (auto& v : l.values) v = 0.3 * coef(rng);
      const LinearModel a = best_h_ls(d, l, grid, cover, spec);
      const LinearModel b = best_h_matched(d, l, grid, cover, spec, OracleConfig{});
      for (std::size_t j = 0; j < a.weights.size(); ++j)
        if (std::abs(a.weights[j] - b.weights[j]) > 1e-10) ok = false;
      if (std::abs(a.intercept - b.intercept) > 1e-10) ok = false;
      if (!ok) why = "matched-loss deviates from LS under half-square";
    }
  }

  // (c) subgradient hinge close to the exact LP
  if (ok) {
    for (int rep = 0; rep < 3 && ok; ++rep) {
      std::vector<ThresholdInstance> instances;
      for (int i = 0; i < 200; ++i)
        instances.push_back({0.2 + unif(rng), {coef(rng), coef(rng)},
                             0.25 * (1 + static_cast<int>(rng() % 4)),
                             rng() % 2 == 0 ? +1 : -1});
      const double margin = 0.125;
      ThresholdFitConfig cfg;
      cfg.margin = margin;
      cfg.iterations = 5000;
      const ThresholdModel sub = fit_threshold_classifier(instances, cfg);
      const ThresholdModel lp = fit_threshold_classifier_lp(instances, margin);
      const double o_sub = hinge_objective(instances, sub, margin);
      const double o_lp = hinge_objective(instances, lp, margin);
      if (o_sub > o_lp * 1.02 + 1e-9) {
        std::ostringstream ss;
        ss << "hinge " << o_sub << " vs LP " << o_lp;
        ok = false;
        why = ss.str();
      }
    }
  }
  report(6, "oracle-reduction consistency", ok, why);
}

void criterion7() {
  std::mt19937_64 rng(1007);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool ok = true;
  std::string why;

  for (int rep = 0; rep < 10 && ok; ++rep) {
    std::vector<Example> ex;
    for (int i = 0; i < 80; ++i) {
      const int a = static_cast<int>(rng() % 2);
      ex.push_back({{normal(rng) + 0.4 * a, normal(rng)}, a, unif(rng)});
    }
    const Dataset d = make_dataset(std::move(ex), 2);
    const LinearModel m = fit_seo(d);
    const double mean = d.group_freqs[1];
    double corr = 0.0;
    for (const auto& e : d.examples)
      corr += ((e.group == 1 ? 1.0 : 0.0) - mean) * m.raw(e.features);
    if (std::abs(corr) > 1e-8) {
      std::ostringstream ss;
      ss << "correlation " << corr;
      ok = false;
      why = ss.str();
    }
  }

  if (ok) {
    // fully crossed design: features orthogonal to the group indicator
    std::vector<Example> ex;
    for (int s = 0; s < 4; ++s) {
      const double x0 = (s & 1) ? 1.0 : -1.0;
      const double x1 = (s & 2) ? 1.0 : -1.0;
      const double y = unif(rng);
      ex.push_back({{x0, x1}, 0, y});
      ex.push_back({{x0, x1}, 1, y});
    }
    const Dataset d = make_dataset(std::move(ex), 2);
    const LinearModel seo = fit_seo(d);
    const LinearModel plain = fit_unconstrained(d, LossSpec::half_square());
    for (int j = 0; j < 2; ++j)
      if (std::abs(seo.weights[j] - plain.weights[j]) > 1e-6) ok = false;
    if (std::abs(seo.intercept - plain.intercept) > 1e-6) ok = false;
    if (!ok) why = "orthogonal design deviates from the unconstrained fit";
  }
  report(7, "zero-correlation baseline", ok, why);
}

SPConfig sweep_config(OracleKind kind) {
  SPConfig cfg;
  cfg.B = 10.0;
  cfg.nu = 0.05;
  cfg.N = 20;
  cfg.max_iters = 3000;
  cfg.oracle.kind = kind;
  return cfg;
}

void criterion8() {
  SynthSpec sspec;
  sspec.n = 2000;
  sspec.d = 3;
  sspec.mean_shift = 3.0;
  sspec.noise_sd = 1.0;
  sspec.seed = 77;
  const Dataset all = synth_generate(sspec);
  const auto [train, test] = split(all, 0.5, 5);
  const Grid grid = build_grid(20);

  bool ok = true;
  std::string why;

  struct Case {
    const char* name;
    OracleKind kind;
    LossSpec spec;
  };
  const Case cases[] = {{"ls", OracleKind::LS, LossSpec::half_square()},
                        {"matched", OracleKind::MatchedLoss, LossSpec::scaled_logistic(5.0)}};
  for (const auto& c : cases) {
    const LinearModel plain = fit_unconstrained(train, c.spec);
    const double base_disp = group_cdf_moments(test, grid, plain).max_abs();
    const double base_loss = empirical_loss(test, c.spec, plain);
    if (base_disp < 0.3) {
      std::ostringstream ss;
      ss << c.name << ": unconstrained disparity " << base_disp << " below 0.3";
      ok = false;
      why = ss.str();
      break;
    }
    const auto pts = sweep_sp(train, test, {1.0, 0.2, 0.05, 0.01},
                              sweep_config(c.kind), c.spec, 4);
    const TradeoffPoint& tight = pts.back();
    if (tight.failed) {
      ok = false;
      why = std::string(c.name) + ": tightest point failed: " + tight.error;
      break;
    }
    if (tight.test_disparity > 0.5 * base_disp) {
      std::ostringstream ss;
      ss << c.name << ": test disparity " << tight.test_disparity << " vs baseline "
         << base_disp;
      ok = false;
      why = ss.str();
      break;
    }
    if (tight.test_loss > base_loss + 0.05) {
      std::ostringstream ss;
      ss << c.name << ": test loss " << tight.test_loss << " vs baseline " << base_loss;
      ok = false;
      why = ss.str();
      break;
    }
  }
  report(8, "qualitative tradeoff on shifted synthetic data", ok, why);
}

void criterion9() {
  SynthSpec sspec;
  sspec.n = 400;
  sspec.d = 2;
  sspec.mean_shift = 2.0;
  sspec.seed = 13;
  const auto spec = LossSpec::half_square();
  const std::vector<double> slacks{1.0, 0.1, 0.02};

  auto run_once = [&](const std::string& prefix) {
    const Dataset all = synth_generate(sspec);
    const auto [train, test] = split(all, 0.5, 9);
    SPConfig cfg = sweep_config(OracleKind::LS);
    cfg.max_iters = 200;
    const auto pts = sweep_sp(train, test, slacks, cfg, spec, 3);
    ReportConfig rc;
    rc.mode = "sp";
    rc.slacks = slacks;
    rc.B = cfg.B;
    rc.nu = cfg.nu;
    rc.N = cfg.N;
    rc.seed = sspec.seed;
    rc.oracle = "ls";
    write_results_csv(prefix + "_results.csv", pts);
    write_results_json(prefix + "_results.json", rc, pts);
  };
  run_once("acc9_a");
  run_once("acc9_b");
  const bool csv_same = slurp("acc9_a_results.csv") == slurp("acc9_b_results.csv");
  const bool json_same = slurp("acc9_a_results.json") == slurp("acc9_b_results.json");
  for (const char* p : {"acc9_a_results.csv", "acc9_b_results.csv",
                        "acc9_a_results.json", "acc9_b_results.json"})
    std::remove(p);
  report(9, "byte-identical sweep outputs", csv_same && json_same,
         csv_same ? (json_same ? "" : "json differs") : "csv differs");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  std::printf("%d criterion(s) failed; total runtime %lld ms\n", failures,
              static_cast<long long>(dt));
  return failures == 0 ? 0 : 1;
}
