#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "irisnp/ellipsoid.hpp"
#include "irisnp/linprog.hpp"
#include "irisnp/polytope.hpp"

namespace irisnp {

// Center and radius of the largest inscribed ball, via the LP
// max r s.t. aᵢᵀx + r‖aᵢ‖ ≤ bᵢ. A radius ≤ 0 signals an empty interior.
inline std::pair<Eigen::VectorXd, double> chebyshev_center(const HPolyhedron& p) {
  const int n = p.dim();
  const int m = p.rows();
  Eigen::MatrixXd A(m, n + 1);
  for (int i = 0; i < m; ++i) {
    const double norm = p.A().row(i).norm();
    if (norm < 1e-15)
      throw std::invalid_argument("chebyshev_center: zero row in A");
    A.row(i).head(n) = p.A().row(i);
    A(i, n) = norm;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[n] = 1.0;
  const LpResult lp = lp_maximize(c, A, p.b());
  if (lp.status == LpStatus::Unbounded)
    throw std::runtime_error("chebyshev_center: LP unbounded (polytope unbounded)");
  if (lp.status != LpStatus::Optimal)
    throw std::runtime_error("chebyshev_center: LP failed");
  return {lp.x.head(n), lp.x[n]};
}

struct MvieOptions {
  double barrier_reduction = 0.2;
  double initial_weight = 1.0;
  double newton_tol = 1e-9;
  int max_newton_steps = 50;
  double duality_tol = 1e-8;
};

struct MvieResult {
  Hyperellipsoid ellipsoid;
  double log_det = 0.0;  // log det C̃ of the inscribed ellipsoid
};

namespace detail {

// Maximizes log det L subject to ‖Lᵀaᵢ‖ ≤ bᵢ − aᵢᵀd over lower-triangular L
// with positive diagonal, by minimizing
//   F_μ = −Σ log Lᵢᵢ − μ Σ log(bᵢ − aᵢᵀd − ‖Lᵀaᵢ‖)
// with Newton steps and geometric reduction of μ.
class MvieBarrierSolver {
 public:
  MvieBarrierSolver(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const MvieOptions& opts)
      : A_(A), b_(b), opts_(opts), n_(static_cast<int>(A.cols())),
        m_(static_cast<int>(A.rows())), nl_(n_ * (n_ + 1) / 2) {}

  // theta = (lower-triangular entries of L, d)
  int dim() const { return nl_ + n_; }

  int tri_index(int i, int j) const {  // i >= j
    // column-major packing of the lower triangle
    return j * n_ - j * (j - 1) / 2 + (i - j);
  }

  Eigen::MatrixXd unpack_L(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int i = j; i < n_; ++i) L(i, j) = theta[tri_index(i, j)];
    return L;
  }

  // Returns +inf outside the domain.
  double value(const Eigen::VectorXd& theta, double mu) const {
    const Eigen::MatrixXd L = unpack_L(theta);
    const Eigen::VectorXd d = theta.tail(n_);
    double f = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (L(i, i) <= 0.0) return std::numeric_limits<double>::infinity();
      f -= std::log(L(i, i));
    }
    for (int k = 0; k < m_; ++k) {
      const Eigen::VectorXd a = A_.row(k).transpose();
      const double s = b_[k] - a.dot(d) - (L.transpose() * a).norm();
      if (s <= 0.0) return std::numeric_limits<double>::infinity();
      f -= mu * std::log(s);
    }
    return f;
  }

  void gradient_hessian(const Eigen::VectorXd& theta, double mu,
                        Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    const int N = dim();
    const Eigen::MatrixXd L = unpack_L(theta);
    const Eigen::VectorXd d = theta.tail(n_);
    grad->setZero(N);
    hess->setZero(N, N);
    for (int i = 0; i < n_; ++i) {
      const int idx = tri_index(i, i);
      (*grad)[idx] -= 1.0 / L(i, i);
      (*hess)(idx, idx) += 1.0 / (L(i, i) * L(i, i));
    }
    Eigen::VectorXd gs(N);
    for (int k = 0; k < m_; ++k) {
      const Eigen::VectorXd a = A_.row(k).transpose();
      const Eigen::VectorXd r = L.transpose() * a;
      const double nu = r.norm();
      const double s = b_[k] - a.dot(d) - nu;
      // ∇s: L block −aᵢ rⱼ/ν, d block −a.
      gs.setZero();
      if (nu > 1e-300) {
        for (int j = 0; j < n_; ++j)
          for (int i = j; i < n_; ++i)
            gs[tri_index(i, j)] = -a[i] * r[j] / nu;
      }
      gs.tail(n_) = -a;
      (*grad) -= (mu / s) * gs;
      (*hess) += (mu / (s * s)) * gs * gs.transpose();
      // + (μ/s)·∇²ν on the L block.
      if (nu > 1e-300) {
        const double c1 = mu / (s * nu);
        for (int j = 0; j < n_; ++j) {
          for (int i = j; i < n_; ++i) {
            const int row = tri_index(i, j);
            for (int q = 0; q < n_; ++q) {
              for (int p = q; p < n_; ++p) {
                const int col = tri_index(p, q);
                double v = (j == q) ? 1.0 : 0.0;
                v -= r[j] * r[q] / (nu * nu);
                (*hess)(row, col) += c1 * a[i] * a[p] * v;
              }
            }
          }
        }
      }
    }
  }

  void newton_minimize(Eigen::VectorXd* theta, double mu) const {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    for (int step = 0; step < opts_.max_newton_steps; ++step) {
      gradient_hessian(*theta, mu, &grad, &hess);
      Eigen::VectorXd delta;
      double damping = 0.0;
      for (int tries = 0; tries < 60; ++tries) {
        Eigen::MatrixXd H = hess;
        if (damping > 0.0)
          H += damping * Eigen::MatrixXd::Identity(dim(), dim());
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        delta = ldlt.solve(-grad);
        if (ldlt.info() == Eigen::Success && grad.dot(delta) < 0.0) break;
        damping = (damping == 0.0) ? 1e-10 : damping * 100.0;
      }
      const double decrement2 = -grad.dot(delta);
      if (!(decrement2 > 2.0 * opts_.newton_tol)) return;
      const double f0 = value(*theta, mu);
      double t = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd cand = *theta + t * delta;
        if (value(cand, mu) <= f0 + 1e-4 * t * grad.dot(delta)) {
          *theta = cand;
          break;
        }
        t *= 0.5;
        if (ls == 59) return;  // no progress possible
      }
    }
  }

  MvieResult solve(const Eigen::VectorXd& d0, double rho) const {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim());
    for (int i = 0; i < n_; ++i) theta[tri_index(i, i)] = rho;
    theta.tail(n_) = d0;
    double mu = opts_.initial_weight;
    while (true) {
      newton_minimize(&theta, mu);
      if (m_ * mu <= opts_.duality_tol) break;
      mu *= opts_.barrier_reduction;
    }
    const Eigen::MatrixXd L = unpack_L(theta);
    MvieResult out;
    out.ellipsoid.C = L.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(n_, n_));
    out.ellipsoid.d = theta.tail(n_);
    out.log_det = 0.0;
    for (int i = 0; i < n_; ++i) out.log_det += std::log(L(i, i));
    return out;
  }

 private:
  const Eigen::MatrixXd& A_;
  const Eigen::VectorXd& b_;
  MvieOptions opts_;
  int n_, m_, nl_;
};

}  // namespace detail

inline MvieResult max_inscribed_ellipsoid_detail(const HPolyhedron& p,
                                                 const MvieOptions& opts = {}) {
  // Normalize rows so the barrier is well scaled.
  Eigen::MatrixXd A = p.A();
  Eigen::VectorXd b = p.b();
  for (int i = 0; i < A.rows(); ++i) {
    const double norm = A.row(i).norm();
    if (norm < 1e-15)
      throw std::invalid_argument("max_inscribed_ellipsoid: zero row in A");
    A.row(i) /= norm;
    b[i] /= norm;
  }
  const auto [center, radius] = chebyshev_center(p);
  if (radius <= 1e-10)
    throw std::runtime_error("max_inscribed_ellipsoid: polytope has empty interior");
  detail::MvieBarrierSolver solver(A, b, opts);
  return solver.solve(center, 0.9 * radius);
}

// Maximum-volume inscribed ellipsoid of a bounded polytope with nonempty
// interior.
inline Hyperellipsoid max_inscribed_ellipsoid(const HPolyhedron& p,
                                              const MvieOptions& opts = {}) {
  return max_inscribed_ellipsoid_detail(p, opts).ellipsoid;
}

// Minimizer of (x−d)ᵀCᵀC(x−d) over Q, or nullopt when Q is empty. Solved in
// the ellipse's unit-ball coordinates, where it is the projection of the
// origin onto a polyhedron (Dykstra's alternating halfspace projections).
inline std::optional<Eigen::VectorXd> closest_point_in_polytope_metric(
    const Hyperellipsoid& e, const HPolyhedron& q) {
  if (e.dim() != q.dim())
    throw std::invalid_argument("closest_point_in_polytope_metric: dimension mismatch");
  {
    const auto [center, radius] = chebyshev_center(q);
    (void)center;
    if (radius < 0.0) return std::nullopt;
  }
  const Eigen::MatrixXd Ctilde = ellipsoid_inverse_factor(e);
  Eigen::MatrixXd At = q.A() * Ctilde;
  Eigen::VectorXd bt = q.b() - q.A() * e.d;
  const int m = static_cast<int>(At.rows());
  Eigen::VectorXd row_sq(m);
  for (int i = 0; i < m; ++i) row_sq[i] = At.row(i).squaredNorm();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(e.dim());
  Eigen::MatrixXd corrections = Eigen::MatrixXd::Zero(m, e.dim());
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < m; ++i) {
      if (row_sq[i] < 1e-30) continue;
      const Eigen::VectorXd y = u + corrections.row(i).transpose();
      const double excess = At.row(i).dot(y) - bt[i];
      Eigen::VectorXd projected = y;
      if (excess > 0.0) projected -= (excess / row_sq[i]) * At.row(i).transpose();
      corrections.row(i) = (y - projected).transpose();
      moved = std::max(moved, (projected - u).lpNorm<Eigen::Infinity>());
      u = projected;
    }
    if (moved <= 1e-11) break;
  }
  return e.d + Ctilde * u;
}

}  // namespace irisnp
