#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fairreg {

// Dense two-phase simplex for small instances.
//
// Problem form built incrementally:
//   min c^T x   s.t.  per-row  a^T x {<=,=,>=} b,  x >= 0.
// Bland's rule; intended for desk-scale reference solving only.
class SimplexLP {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  struct Solution {
    Status status;
    double objective = 0.0;
    std::vector<double> x;
  };

  explicit SimplexLP(int num_vars) : n_(num_vars), c_(num_vars, 0.0) {}

  void set_objective(int var, double coeff) { c_[var] = coeff; }

  void add_le(std::vector<double> row, double rhs) { add_row(std::move(row), rhs, -1); }
  void add_ge(std::vector<double> row, double rhs) { add_row(std::move(row), rhs, +1); }
  void add_eq(std::vector<double> row, double rhs) { add_row(std::move(row), rhs, 0); }

  Solution solve() const {
    // Standard form: append one slack/surplus per inequality, flip rows to
    // make b >= 0, then phase-1 with artificials.
    const int m = static_cast<int>(rows_.size());
    int slacks = 0;
    for (const auto& r : rows_)
      if (r.sense != 0) ++slacks;
    const int nv = n_ + slacks;

    std::vector<std::vector<double>> A(m, std::vector<double>(nv, 0.0));
    std::vector<double> b(m, 0.0);
    int s = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n_; ++j) A[i][j] = rows_[i].a[j];
      b[i] = rows_[i].b;
      if (rows_[i].sense == -1) A[i][n_ + s++] = 1.0;    // <= : slack
      else if (rows_[i].sense == +1) A[i][n_ + s++] = -1.0;  // >= : surplus
      if (b[i] < 0.0) {
        for (auto& v : A[i]) v = -v;
        b[i] = -b[i];
      }
    }

    // Phase 1
    const int total = nv + m;
    std::vector<std::vector<double>> T(m, std::vector<double>(total, 0.0));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < nv; ++j) T[i][j] = A[i][j];
      T[i][nv + i] = 1.0;
    }
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = nv + i;
    std::vector<double> obj1(total, 0.0);
    for (int i = 0; i < m; ++i) obj1[nv + i] = 1.0;
    double val1 = run(T, b, basis, obj1, total);
    if (val1 > 1e-7) return {Status::Infeasible, 0.0, {}};

    // Drive any artificial still in the basis out (or drop a redundant row).
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= nv) {
        int pivot_col = -1;
        for (int j = 0; j < nv; ++j)
          if (std::abs(T[i][j]) > 1e-9) { pivot_col = j; break; }
        if (pivot_col >= 0) pivot(T, b, basis, i, pivot_col, total);
      }
    }

    // Phase 2 over original variables only; forbid artificials.
    std::vector<double> obj2(total, 0.0);
    for (int j = 0; j < n_; ++j) obj2[j] = c_[j];
    const double big = 1e12;
    for (int j = nv; j < total; ++j) obj2[j] = big;  // keep artificials out
    double val2 = run(T, b, basis, obj2, total);
    if (!std::isfinite(val2)) return {Status::Unbounded, 0.0, {}};

    std::vector<double> x(n_, 0.0);
    for (int i = 0; i < m; ++i)
      if (basis[i] < n_) x[basis[i]] = b[i];
    double objective = 0.0;
    for (int j = 0; j < n_; ++j) objective += c_[j] * x[j];
    return {Status::Optimal, objective, x};
  }

 private:
  struct Row {
    std::vector<double> a;
    double b;
    int sense;  // -1: <=, 0: =, +1: >=
  };

  void add_row(std::vector<double> a, double b, int sense) {
    if (static_cast<int>(a.size()) != n_)
      throw std::invalid_argument("SimplexLP: row size mismatch");
    rows_.push_back({std::move(a), b, sense});
  }

  static void pivot(std::vector<std::vector<double>>& T, std::vector<double>& b,
                    std::vector<int>& basis, int pr, int pc, int total) {
    const int m = static_cast<int>(T.size());
    const double p = T[pr][pc];
    for (int j = 0; j < total; ++j) T[pr][j] /= p;
    b[pr] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == pr) continue;
      const double f = T[i][pc];
      if (f == 0.0) continue;
      for (int j = 0; j < total; ++j) T[i][j] -= f * T[pr][j];
      b[i] -= f * b[pr];
    }
    basis[pr] = pc;
  }

  // Simplex iterations with Bland's rule; returns objective value, or +inf
  // when unbounded.
  static double run(std::vector<std::vector<double>>& T, std::vector<double>& b,
                    std::vector<int>& basis, const std::vector<double>& obj, int total) {
    const int m = static_cast<int>(T.size());
    for (long iter = 0; iter < 100000; ++iter) {
      // reduced costs: obj_j - obj_B^T B^-1 A_j
      std::vector<double> y(m);
      for (int i = 0; i < m; ++i) y[i] = obj[basis[i]];
      int entering = -1;
      for (int j = 0; j < total; ++j) {
        double rc = obj[j];
        for (int i = 0; i < m; ++i) rc -= y[i] * T[i][j];
        if (rc < -1e-9) { entering = j; break; }  // Bland: lowest index
      }
      if (entering < 0) break;
      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T[i][entering] > 1e-9) {
          const double ratio = b[i] / T[i][entering];
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (leaving < 0 || basis[i] < basis[leaving]))) {
            best_ratio = ratio;
            leaving = i;
          }
        }
      }
      if (leaving < 0) return std::numeric_limits<double>::infinity();
      pivot(T, b, basis, leaving, entering, total);
    }
    double v = 0.0;
    for (int i = 0; i < m; ++i) v += obj[basis[i]] * b[i];
    return v;
  }

  int n_;
  std::vector<double> c_;
  std::vector<Row> rows_;
};

}  // namespace fairreg
