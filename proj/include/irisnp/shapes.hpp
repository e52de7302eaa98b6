#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "irisnp/transform.hpp"

namespace irisnp {

// Convex collision shapes in a body-local frame, coordinates in meters.
struct PointShape {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
};

struct DiskShape {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

struct PolygonShape {
  std::vector<Eigen::Vector2d> vertices;  // counter-clockwise, strictly convex
};

using ConvexShape2D = std::variant<PointShape, DiskShape, PolygonShape>;

inline bool polygon_is_ccw_convex(const std::vector<Eigen::Vector2d>& v) {
  const int n = static_cast<int>(v.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d e0 = v[(i + 1) % n] - v[i];
    const Eigen::Vector2d e1 = v[(i + 2) % n] - v[(i + 1) % n];
    if (e0.x() * e1.y() - e0.y() * e1.x() <= 1e-12) return false;
  }
  return true;
}

inline void validate_shape(const ConvexShape2D& shape) {
  if (const auto* disk = std::get_if<DiskShape>(&shape)) {
    if (!(disk->radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  } else if (const auto* poly = std::get_if<PolygonShape>(&shape)) {
    if (!polygon_is_ccw_convex(poly->vertices))
      throw std::invalid_argument("polygon not counter-clockwise convex");
  }
}

// Centroid used for deterministic NLP initial guesses.
inline Eigen::Vector2d shape_centroid(const ConvexShape2D& shape) {
  if (const auto* pt = std::get_if<PointShape>(&shape)) return pt->p;
  if (const auto* disk = std::get_if<DiskShape>(&shape)) return disk->center;
  const auto& v = std::get<PolygonShape>(shape).vertices;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& p : v) sum += p;
  return sum / static_cast<double>(v.size());
}

namespace detail {

// GJK works on the shape "core": disks collapse to their center with the
// radius handled as a Minkowski offset, so disk pairs stay exact.
struct WorldConvex {
  std::vector<Eigen::Vector2d> points;  // world-frame core vertices
  double radius = 0.0;
};

inline WorldConvex pose_core(const ConvexShape2D& shape,
                             const RigidTransform2D& pose) {
  WorldConvex out;
  if (const auto* pt = std::get_if<PointShape>(&shape)) {
    out.points.push_back(pose.apply(pt->p));
  } else if (const auto* disk = std::get_if<DiskShape>(&shape)) {
    out.points.push_back(pose.apply(disk->center));
    out.radius = disk->radius;
  } else {
    for (const auto& v : std::get<PolygonShape>(shape).vertices)
      out.points.push_back(pose.apply(v));
  }
  return out;
}

inline Eigen::Vector2d support(const WorldConvex& c, const Eigen::Vector2d& dir) {
  const Eigen::Vector2d* best = &c.points[0];
  double best_dot = best->dot(dir);
  for (const auto& p : c.points) {
    const double d = p.dot(dir);
    if (d > best_dot) {
      best_dot = d;
      best = &p;
    }
  }
  return *best;
}

// Closest point to the origin on a segment [a, b].
inline Eigen::Vector2d segment_closest(const Eigen::Vector2d& a,
                                       const Eigen::Vector2d& b,
                                       bool* keep_a, bool* keep_b) {
  const Eigen::Vector2d ab = b - a;
  const double denom = ab.squaredNorm();
  *keep_a = *keep_b = true;
  if (denom < 1e-30) {
    *keep_b = false;
    return a;
  }
  const double s = -a.dot(ab) / denom;
  if (s <= 0.0) {
    *keep_b = false;
    return a;
  }
  if (s >= 1.0) {
    *keep_a = false;
    return b;
  }
  return a + s * ab;
}

// GJK distance between the convex hulls of two world point sets.
inline double gjk_core_distance(const WorldConvex& A, const WorldConvex& B) {
  constexpr double kTol = 1e-9;
  auto minkowski_support = [&](const Eigen::Vector2d& d) -> Eigen::Vector2d {
    return support(A, d) - support(B, -d);
  };

  std::vector<Eigen::Vector2d> simplex;
  Eigen::Vector2d v = A.points[0] - B.points[0];
  for (int iter = 0; iter < 100; ++iter) {
    const double vnorm = v.norm();
    if (vnorm < 1e-12) return 0.0;
    const Eigen::Vector2d w = minkowski_support(-v);
    const double gap = vnorm - v.dot(w) / vnorm;
    if (gap <= kTol) return vnorm < kTol ? 0.0 : vnorm;
    simplex.push_back(w);
    if (simplex.size() == 1) {
      v = simplex[0];
    } else if (simplex.size() == 2) {
      bool ka, kb;
      v = segment_closest(simplex[0], simplex[1], &ka, &kb);
      std::vector<Eigen::Vector2d> next;
      if (ka) next.push_back(simplex[0]);
      if (kb) next.push_back(simplex[1]);
      simplex = next;
    } else {
      // Triangle: if the origin is inside, the sets intersect; otherwise keep
      // the closest edge.
      const Eigen::Vector2d &a = simplex[0], &b = simplex[1], &cc = simplex[2];
      auto cross = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
        return p.x() * q.y() - p.y() * q.x();
      };
      const double d1 = cross(b - a, -a);
      const double d2 = cross(cc - b, -b);
      const double d3 = cross(a - cc, -cc);
      const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
      const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
      if (!(neg && pos)) return 0.0;
      double best = std::numeric_limits<double>::infinity();
      std::vector<Eigen::Vector2d> best_simplex;
      Eigen::Vector2d best_v = v;
      const Eigen::Vector2d pts[3] = {a, b, cc};
      for (int e = 0; e < 3; ++e) {
        bool ka, kb;
        const Eigen::Vector2d p = segment_closest(pts[e], pts[(e + 1) % 3], &ka, &kb);
        if (p.squaredNorm() < best) {
          best = p.squaredNorm();
          best_v = p;
          best_simplex.clear();
          if (ka) best_simplex.push_back(pts[e]);
          if (kb) best_simplex.push_back(pts[(e + 1) % 3]);
        }
      }
      simplex = best_simplex;
      v = best_v;
    }
    if (simplex.empty()) return 0.0;
  }
  return v.norm();
}

}  // namespace detail

// Euclidean distance between the world-frame images of two shapes; 0 when
// they intersect (boundary contact counts as intersection).
inline double shape_distance(const ConvexShape2D& s1, const RigidTransform2D& X1,
                             const ConvexShape2D& s2, const RigidTransform2D& X2) {
  const detail::WorldConvex a = detail::pose_core(s1, X1);
  const detail::WorldConvex b = detail::pose_core(s2, X2);
  double core;
  if (a.points.size() == 1 && b.points.size() == 1) {
    core = (a.points[0] - b.points[0]).norm();
  } else {
    core = detail::gjk_core_distance(a, b);
  }
  double d = core - a.radius - b.radius;
  if (d < 1e-9) d = 0.0;
  return d;
}

inline bool shapes_intersect(const ConvexShape2D& s1, const RigidTransform2D& X1,
                             const ConvexShape2D& s2, const RigidTransform2D& X2) {
  return shape_distance(s1, X1, s2, X2) == 0.0;
}

// Convex constraints expressing p ∈ shape in body-local coordinates.
struct MembershipConstraints {
  std::optional<Eigen::Vector2d> equality_point;  // Point: p = value
  struct Ball {
    Eigen::Vector2d center;
    double radius;
  };
  std::optional<Ball> ball;                       // Disk: ‖p − c‖ ≤ r
  Eigen::MatrixXd edge_normals;                   // Polygon: N p ≤ offsets
  Eigen::VectorXd edge_offsets;
  Eigen::Vector2d lower;                          // local bounding box
  Eigen::Vector2d upper;
};

inline MembershipConstraints membership_constraints(const ConvexShape2D& shape) {
  MembershipConstraints out;
  out.edge_normals.resize(0, 2);
  out.edge_offsets.resize(0);
  if (const auto* pt = std::get_if<PointShape>(&shape)) {
    out.equality_point = pt->p;
    out.lower = out.upper = pt->p;
  } else if (const auto* disk = std::get_if<DiskShape>(&shape)) {
    out.ball = MembershipConstraints::Ball{disk->center, disk->radius};
    out.lower = disk->center.array() - disk->radius;
    out.upper = disk->center.array() + disk->radius;
  } else {
    const auto& v = std::get<PolygonShape>(shape).vertices;
    const int n = static_cast<int>(v.size());
    out.edge_normals.resize(n, 2);
    out.edge_offsets.resize(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d e = v[(i + 1) % n] - v[i];
      Eigen::Vector2d normal(e.y(), -e.x());
      normal.normalize();
      out.edge_normals.row(i) = normal.transpose();
      out.edge_offsets[i] = normal.dot(v[i]);
    }
    out.lower = v[0];
    out.upper = v[0];
    for (const auto& p : v) {
      out.lower = out.lower.cwiseMin(p);
      out.upper = out.upper.cwiseMax(p);
    }
  }
  return out;
}

// Largest violation of the membership constraints at p (≤ 0 means inside).
inline double membership_violation(const MembershipConstraints& m,
                                   const Eigen::Vector2d& p) {
  double worst = -std::numeric_limits<double>::infinity();
  if (m.equality_point) worst = std::max(worst, (p - *m.equality_point).lpNorm<Eigen::Infinity>());
  if (m.ball) worst = std::max(worst, (p - m.ball->center).norm() - m.ball->radius);
  for (int i = 0; i < m.edge_normals.rows(); ++i)
    worst = std::max(worst, m.edge_normals.row(i).dot(p) - m.edge_offsets[i]);
  if (!std::isfinite(worst)) worst = 0.0;
  return worst;
}

}  // namespace irisnp
