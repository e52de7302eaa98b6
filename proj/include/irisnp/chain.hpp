#pragma once

#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "irisnp/shapes.hpp"
#include "irisnp/transform.hpp"

namespace irisnp {

// Planar serial chain of revolute joints. Body 0 is the static base; body k's
// frame sits at the tip of link k with orientation q₁+…+q_k relative to the
// base.
struct PlanarChain {
  std::vector<double> link_lengths;
  Eigen::VectorXd q_lower;
  Eigen::VectorXd q_upper;
  RigidTransform2D base;

  int dof() const { return static_cast<int>(link_lengths.size()); }

  void validate() const {
    const int n = dof();
    if (n == 0) throw std::invalid_argument("chain needs at least one link");
    if (q_lower.size() != n || q_upper.size() != n)
      throw std::invalid_argument("joint limit dimension mismatch");
    for (double l : link_lengths)
      if (!(l > 0.0)) throw std::invalid_argument("link lengths must be positive");
    for (int i = 0; i < n; ++i)
      if (!(q_lower[i] < q_upper[i]))
        throw std::invalid_argument("joint limits inverted");
  }
};

struct SceneGeometry {
  int body = -1;  // 0..L for robot bodies, -1 for world obstacles
  RigidTransform2D local_pose;
  ConvexShape2D shape;

  bool is_robot() const { return body >= 0; }
};

// A chain plus its collision geometries and the collision-pair set. Robot
// geometries come first (sorted by body index), then world obstacles; pair
// indices refer to this combined order.
struct Scene {
  PlanarChain chain;
  std::vector<SceneGeometry> geometries;
  std::vector<std::pair<int, int>> collision_pairs;

  int geometry_count() const { return static_cast<int>(geometries.size()); }

  void validate() const {
    chain.validate();
    for (const auto& g : geometries) {
      if (g.body > chain.dof()) throw std::invalid_argument("geometry body index out of range");
      validate_shape(g.shape);
    }
    for (const auto& [i, j] : collision_pairs) {
      if (i < 0 || j < 0 || i >= geometry_count() || j >= geometry_count())
        throw std::invalid_argument("collision pair index out of range");
      if (i == j) throw std::invalid_argument("collision pair must reference distinct geometries");
      const auto& gi = geometries[i];
      const auto& gj = geometries[j];
      if (gi.is_robot() && gj.is_robot() && std::abs(gi.body - gj.body) < 2)
        throw std::invalid_argument("self-collision pair references adjacent bodies");
    }
  }
};

// World pose of a robot body frame.
inline RigidTransform2D fk_pose(const PlanarChain& chain, const Eigen::VectorXd& q,
                                int body) {
  if (body < 0 || body > chain.dof())
    throw std::out_of_range("fk_pose: body index out of range");
  if (q.size() != chain.dof())
    throw std::invalid_argument("fk_pose: configuration dimension mismatch");
  RigidTransform2D pose = chain.base;
  for (int k = 1; k <= body; ++k) {
    const RigidTransform2D link = RigidTransform2D::FromAngle(
        q[k - 1], RigidTransform2D::FromAngle(q[k - 1])
                      .rotate({chain.link_lengths[k - 1], 0.0}));
    pose = pose.compose(link);
  }
  return pose;
}

inline RigidTransform2D geometry_world_pose(const Scene& scene,
                                            const Eigen::VectorXd& q, int geom) {
  if (geom < 0 || geom >= scene.geometry_count())
    throw std::out_of_range("geometry index out of range");
  const SceneGeometry& g = scene.geometries[geom];
  if (!g.is_robot()) return g.local_pose;
  return fk_pose(scene.chain, q, g.body).compose(g.local_pose);
}

// World coordinates of a local point of geometry `geom` at configuration q.
inline Eigen::Vector2d fk_point(const Scene& scene, const Eigen::VectorXd& q,
                                int geom, const Eigen::Vector2d& p_local) {
  return geometry_world_pose(scene, q, geom).apply(p_local);
}

// 2×L Jacobian of the world point with respect to q. Joints past the
// geometry's body (and all joints for world obstacles) contribute zero
// columns.
inline Eigen::MatrixXd fk_point_jacobian(const Scene& scene, const Eigen::VectorXd& q,
                                         int geom, const Eigen::Vector2d& p_local) {
  if (geom < 0 || geom >= scene.geometry_count())
    throw std::out_of_range("geometry index out of range");
  const int dof = scene.chain.dof();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, dof);
  const SceneGeometry& g = scene.geometries[geom];
  if (!g.is_robot() || g.body == 0) return jac;
  const Eigen::Vector2d w = fk_point(scene, q, geom, p_local);
  for (int j = 1; j <= g.body; ++j) {
    // Joint j rotates the point about the origin of body j-1.
    const Eigen::Vector2d pivot = fk_pose(scene.chain, q, j - 1).t;
    const Eigen::Vector2d r = w - pivot;
    jac(0, j - 1) = -r.y();
    jac(1, j - 1) = r.x();
  }
  return jac;
}

inline double pair_distance_at_config(const Scene& scene, const Eigen::VectorXd& q,
                                      const std::pair<int, int>& pair) {
  return shape_distance(scene.geometries[pair.first].shape,
                        geometry_world_pose(scene, q, pair.first),
                        scene.geometries[pair.second].shape,
                        geometry_world_pose(scene, q, pair.second));
}

// True iff any pair in the collision set intersects at q.
inline bool in_collision(const Scene& scene, const Eigen::VectorXd& q) {
  for (const auto& pair : scene.collision_pairs) {
    if (shapes_intersect(scene.geometries[pair.first].shape,
                         geometry_world_pose(scene, q, pair.first),
                         scene.geometries[pair.second].shape,
                         geometry_world_pose(scene, q, pair.second)))
      return true;
  }
  return false;
}

// All robot-obstacle pairs plus non-adjacent robot-robot pairs.
inline std::vector<std::pair<int, int>> auto_collision_pairs(const Scene& scene) {
  std::vector<std::pair<int, int>> pairs;
  const int n = scene.geometry_count();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& gi = scene.geometries[i];
      const auto& gj = scene.geometries[j];
      if (!gi.is_robot() && !gj.is_robot()) continue;
      if (gi.is_robot() && gj.is_robot() && std::abs(gi.body - gj.body) < 2) continue;
      pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

}  // namespace irisnp
