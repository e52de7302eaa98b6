#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "irisnp/polytope.hpp"

namespace irisnp {

// {x | (x−d)ᵀCᵀC(x−d) ≤ 1}: the image of the unit ball under C⁻¹ centered
// at d.
struct Hyperellipsoid {
  Eigen::MatrixXd C;
  Eigen::VectorXd d;

  static Hyperellipsoid Sphere(double radius, const Eigen::VectorXd& center) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    Hyperellipsoid e;
    e.C = Eigen::MatrixXd::Identity(center.size(), center.size()) / radius;
    e.d = center;
    return e;
  }

  int dim() const { return static_cast<int>(d.size()); }

  double metric(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd v = C * (x - d);
    return v.squaredNorm();
  }
};

inline double unit_ball_volume(int n) {
  return std::pow(3.141592653589793238462643383279502884, 0.5 * n) /
         std::tgamma(0.5 * n + 1.0);
}

inline Eigen::MatrixXd ellipsoid_inverse_factor(const Hyperellipsoid& e) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(e.C);
  if (!lu.isInvertible())
    throw std::invalid_argument("ellipsoid metric factor C is singular");
  return lu.inverse();
}

// Volume V_n · det(C⁻¹).
inline double ellipsoid_volume(const Hyperellipsoid& e) {
  const Eigen::MatrixXd Ctilde = ellipsoid_inverse_factor(e);
  return unit_ball_volume(e.dim()) * std::abs(Ctilde.determinant());
}

// True iff every row satisfies ‖C̃ᵀaᵢ‖ ≤ bᵢ − aᵢ·d + tol with C̃ = C⁻¹.
inline bool ellipsoid_in_polytope(const Hyperellipsoid& e, const HPolyhedron& p,
                                  double tol = 0.0) {
  if (e.dim() != p.dim())
    throw std::invalid_argument("ellipsoid_in_polytope: dimension mismatch");
  const Eigen::MatrixXd Ctilde = ellipsoid_inverse_factor(e);
  for (int i = 0; i < p.rows(); ++i) {
    const Eigen::VectorXd a = p.A().row(i).transpose();
    if ((Ctilde.transpose() * a).norm() > p.b()[i] - a.dot(e.d) + tol) return false;
  }
  return true;
}

}  // namespace irisnp
