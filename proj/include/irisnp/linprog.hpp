#pragma once

#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace irisnp {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double value = 0.0;
};

namespace detail {

// Dense two-phase primal simplex with Bland's rule. Tableau rows are the
// constraints, `basis[i]` is the column basic in row i. Entering columns in
// `blocked` are never selected.
class SimplexTableau {
 public:
  SimplexTableau(int rows, int cols) : m_(rows), n_(cols), t_(rows, cols + 1) {
    t_.setZero();
    basis_.assign(rows, -1);
  }

  double& at(int i, int j) { return t_(i, j); }
  double& rhs(int i) { return t_(i, n_); }
  int& basis(int i) { return basis_[i]; }
  int rows() const { return m_; }

  void set_objective(const Eigen::VectorXd& obj) {
    obj_ = Eigen::VectorXd::Zero(n_ + 1);
    obj_.head(obj.size()) = obj;
    // Eliminate basic columns so reduced costs start consistent.
    for (int i = 0; i < m_; ++i) {
      const double coef = obj_[basis_[i]];
      if (coef != 0.0) obj_ -= coef * t_.row(i).transpose();
    }
  }

  void block_column(int j) { blocked_.push_back(j); }

  // Runs Bland pivots, maximizing. Returns false when unbounded.
  bool optimize() {
    constexpr double kCostTol = 1e-9;
    constexpr double kPivTol = 1e-11;
    for (int iter = 0; iter < 100000; ++iter) {
      int entering = -1;
      for (int j = 0; j < n_; ++j) {
        if (obj_[j] > kCostTol && !is_blocked(j)) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;
      int leaving = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = t_(i, entering);
        if (a <= kPivTol) continue;
        const double ratio = rhs(i) / a;
        if (leaving < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis_[i] < basis_[leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
    throw std::runtime_error("simplex failed to converge");
  }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    const double f = obj_[col];
    if (f != 0.0) obj_ -= f * t_.row(row).transpose();
    basis_[row] = col;
  }

  double objective_value() const { return -obj_[n_]; }

  double basic_value(int col) const {
    for (int i = 0; i < m_; ++i)
      if (basis_[i] == col) return t_(i, n_);
    return 0.0;
  }

 private:
  bool is_blocked(int j) const {
    for (int b : blocked_)
      if (b == j) return true;
    return false;
  }

  int m_, n_;
  Eigen::MatrixXd t_;
  Eigen::VectorXd obj_;
  std::vector<int> basis_;
  std::vector<int> blocked_;
};

}  // namespace detail

// Solves max cᵀx subject to Ax ≤ b with x free.
inline LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n)
    throw std::invalid_argument("lp_maximize: dimension mismatch");

  // Split x = u - v (u,v >= 0), add one slack per row, artificials for rows
  // with negative rhs.
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (b[i] < 0.0) art_rows.push_back(i);
  const int n_art = static_cast<int>(art_rows.size());
  const int cols = 2 * n + m + n_art;

  detail::SimplexTableau tab(m, cols);
  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = (b[i] < 0.0) ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      tab.at(i, j) = sign * A(i, j);
      tab.at(i, n + j) = -sign * A(i, j);
    }
    tab.at(i, 2 * n + i) = sign;
    tab.rhs(i) = sign * b[i];
    if (sign < 0.0) {
      tab.at(i, 2 * n + m + art) = 1.0;
      tab.basis(i) = 2 * n + m + art;
      ++art;
    } else {
      tab.basis(i) = 2 * n + i;
    }
  }

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
    for (int j = 0; j < n_art; ++j) phase1[2 * n + m + j] = -1.0;
    tab.set_objective(phase1);
    tab.optimize();  // bounded: objective <= 0
    if (tab.objective_value() < -1e-7) return {LpStatus::Infeasible, {}, 0.0};
    // Pivot any leftover basic artificials out (or accept an all-zero row).
    for (int i = 0; i < m; ++i) {
      if (tab.basis(i) < 2 * n + m) continue;
      int col = -1;
      for (int j = 0; j < 2 * n + m; ++j) {
        if (std::abs(tab.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) tab.pivot(i, col);
    }
    for (int j = 0; j < n_art; ++j) tab.block_column(2 * n + m + j);
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(n) = c;
  phase2.segment(n, n) = -c;
  tab.set_objective(phase2);
  if (!tab.optimize()) return {LpStatus::Unbounded, {}, 0.0};

  Eigen::VectorXd x(n);
  for (int j = 0; j < n; ++j)
    x[j] = tab.basic_value(j) - tab.basic_value(n + j);
  return {LpStatus::Optimal, x, c.dot(x)};
}

}  // namespace irisnp
