#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fairreg/discretize.hpp"

using namespace fairreg;

TEST_CASE("build_grid") {
  CHECK_THROWS_AS(build_grid(0), std::invalid_argument);

  const Grid g1 = build_grid(1);
  CHECK(g1.points == std::vector<double>{1.0});
  CHECK(g1.alpha == 1.0);

  const Grid g4 = build_grid(4);
  CHECK(g4.points == std::vector<double>{0.25, 0.5, 0.75, 1.0});

  const Grid g40 = build_grid(40);
  CHECK(g40.points.size() == 40);
  CHECK(g40.alpha == 0.025);
  CHECK(g40.points.back() == 1.0);
  CHECK(g40.index_of(0.025) == 0);
  CHECK(g40.index_of(1.0) == 39);
  CHECK(g40.index_of(0.026) == -1);
}

TEST_CASE("label cover greedy construction") {
  const auto c1 = build_label_cover({0.0, 0.5, 1.0}, 0.25);
  CHECK(c1.cover_points == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(c1.snap(0.5) == 0.5);

  const auto c2 = build_label_cover({0.0, 0.05, 0.1}, 0.25);
  CHECK(c2.cover_points == std::vector<double>{0.0});
  CHECK(c2.snap(0.05) == 0.0);
  CHECK(c2.snap(0.1) == 0.0);

  const auto c3 = build_label_cover({0.7}, 0.25);
  CHECK(c3.cover_points == std::vector<double>{0.7});

  CHECK_THROWS_AS(build_label_cover({}, 0.25), std::invalid_argument);
}

TEST_CASE("cover validity on random labels") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int N = 2 + static_cast<int>(rng() % 30);
    const double alpha = 1.0 / N;
    std::vector<double> labels;
    for (int i = 0; i < 200; ++i) labels.push_back(unif(rng));
    const auto cover = build_label_cover(labels, alpha);
    CHECK(cover.size() <= static_cast<std::size_t>(2 * N));
    for (std::size_t i = 1; i < cover.cover_points.size(); ++i)
      CHECK(cover.cover_points[i] - cover.cover_points[i - 1] > alpha / 2.0);
    for (double y : labels) {
      const double snapped = cover.snap(y);
      CHECK(std::abs(snapped - y) <= alpha / 2.0 + 1e-12);
    }
  }
}

TEST_CASE("snap_down and snap_up") {
  CHECK(snap_down(0.6, 0.25) == 0.5);
  CHECK(snap_down(0.5, 0.25) == 0.5);
  CHECK(snap_down(1.0, 0.25) == 1.0);
  CHECK(snap_up(0.6, 0.25) == 0.75);
  CHECK(snap_up(0.75, 0.25) == 0.75);
  CHECK(snap_up(0.01, 0.25) == 0.25);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double alpha = 1.0 / (1 + static_cast<int>(rng() % 40));
    const double u = unif(rng);
    const double down = snap_down(u, alpha);
    const double up = snap_up(u, alpha);
    CHECK(snap_down(down, alpha) == down);  // idempotent
    CHECK(snap_up(up, alpha) == up);
    CHECK(down <= u + 1e-9);
    CHECK(up >= u - 1e-9);
  }
}

TEST_CASE("discretized loss") {
  const auto spec = LossSpec::half_square();
  const Grid grid = build_grid(4);
  const auto cover = build_label_cover({0.0, 0.5, 1.0}, grid.alpha);

  // floor(0.6) = 0.5, plus alpha/2 = 0.125 -> l(0.5, 0.625)
  CHECK_THAT(discretized_loss(spec, cover, grid, 0.5, 0.6),
             Catch::Matchers::WithinAbs(0.0078125, 1e-15));
  // >= 1 convention
  CHECK(discretized_loss(spec, cover, grid, 0.5, 1.0) == eval_loss(spec, 0.5, 1.0));
  // within alpha of the true loss
  CHECK(std::abs(eval_loss(spec, 0.5, 0.6) - discretized_loss(spec, cover, grid, 0.5, 0.6)) <= 0.25);
}

TEST_CASE("discretization bound holds densely") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& spec : {LossSpec::half_square(), LossSpec::scaled_logistic(5.0)}) {
    for (int rep = 0; rep < 20; ++rep) {
      const int N = 2 + static_cast<int>(rng() % 63);
      const Grid grid = build_grid(N);
      std::vector<double> labels;
      for (int i = 0; i < 50; ++i) labels.push_back(unif(rng));
      const auto cover = build_label_cover(labels, grid.alpha);
      for (int i = 0; i < 200; ++i) {
        const double y = labels[rng() % labels.size()];
        const double u = unif(rng);
        CHECK(std::abs(eval_loss(spec, y, u) - discretized_loss(spec, cover, grid, y, u)) <=
              grid.alpha + 1e-12);
      }
    }
  }
}

TEST_CASE("cost coefficient") {
  const auto spec = LossSpec::half_square();
  const Grid grid = build_grid(4);
  const auto cover = build_label_cover({0.5}, grid.alpha);

  // half-square: c(y,z) = z - y for interior z
  CHECK_THAT(cost_coefficient(spec, cover, grid, 0.5, 0.25),
             Catch::Matchers::WithinAbs(-0.25, 1e-15));
  CHECK_THAT(cost_coefficient(spec, cover, grid, 0.5, 0.5),
             Catch::Matchers::WithinAbs(0.0, 1e-15));
  CHECK_THROWS_AS(cost_coefficient(spec, cover, grid, 0.5, 0.3), std::invalid_argument);
}

TEST_CASE("cost coefficients stay in [-1,1]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& spec : {LossSpec::half_square(), LossSpec::scaled_logistic(5.0)}) {
    for (int rep = 0; rep < 50; ++rep) {
      const int N = 1 + static_cast<int>(rng() % 64);
      const Grid grid = build_grid(N);
      std::vector<double> labels;
      for (int i = 0; i < 20; ++i) labels.push_back(unif(rng));
      const auto cover = build_label_cover(labels, grid.alpha);
      for (int i = 0; i < 100; ++i) {
        const double y = cover.cover_points[rng() % cover.size()];
        const double z = grid.points[rng() % grid.points.size()];
        const double c = cost_coefficient(spec, cover, grid, y, z);
        CHECK(c >= -1.0 - 1e-12);
        CHECK(c <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("telescoping identity") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& spec : {LossSpec::half_square(), LossSpec::scaled_logistic(5.0)}) {
    for (int rep = 0; rep < 40; ++rep) {
      const int N = 2 + static_cast<int>(rng() % 30);
      const Grid grid = build_grid(N);
      std::vector<double> labels;
      for (int i = 0; i < 30; ++i) labels.push_back(unif(rng));
      const auto cover = build_label_cover(labels, grid.alpha);
      for (int i = 0; i < 50; ++i) {
        const double y = labels[rng() % labels.size()];
        const double fx = unif(rng);
        const double y_snapped = cover.snap(y);
        double rhs = eval_loss(spec, y_snapped, grid.alpha / 2.0);
        for (double z : grid.points)
          if (fx >= z)
            rhs += cost_coefficient(spec, cover, grid, y_snapped, z) / N;
        const double lhs = discretized_loss(spec, cover, grid, y, snap_down(fx, grid.alpha));
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
      }
    }
  }
}
