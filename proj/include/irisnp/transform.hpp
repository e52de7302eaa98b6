#pragma once

#include <cmath>

#include <Eigen/Core>

namespace irisnp {

// Planar rigid transform storing (cos θ, sin θ) and a translation.
struct RigidTransform2D {
  double c = 1.0;
  double s = 0.0;
  Eigen::Vector2d t = Eigen::Vector2d::Zero();

  static RigidTransform2D Identity() { return {}; }

  static RigidTransform2D FromAngle(double theta,
                                    const Eigen::Vector2d& translation =
                                        Eigen::Vector2d::Zero()) {
    return {std::cos(theta), std::sin(theta), translation};
  }

  double angle() const { return std::atan2(s, c); }

  Eigen::Vector2d rotate(const Eigen::Vector2d& v) const {
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
  }

  Eigen::Vector2d rotate_inverse(const Eigen::Vector2d& v) const {
    return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
  }

  Eigen::Vector2d apply(const Eigen::Vector2d& p) const {
    return rotate(p) + t;
  }

  // this ∘ other: first apply `other`, then this.
  RigidTransform2D compose(const RigidTransform2D& other) const {
    RigidTransform2D out;
    out.c = c * other.c - s * other.s;
    out.s = s * other.c + c * other.s;
    out.t = apply(other.t);
    return out;
  }
};

}  // namespace irisnp
