#pragma once

#include <cmath>
#include <vector>

#include "irisnp/irisnp.hpp"

namespace irisnp::test {

constexpr double kPi = 3.141592653589793238462643383279502884;

// One revolute link of length 1, limits ±π, point collision geometry at the
// tip, disk obstacle of radius 0.1 at (0, 1). The tip traces the unit circle,
// so the colliding set is exactly sin q ≥ 0.995, i.e.
// q ∈ [asin(0.995), π − asin(0.995)].
inline Scene one_link_scene() {
  Scene scene;
  scene.chain.link_lengths = {1.0};
  scene.chain.q_lower = Eigen::VectorXd::Constant(1, -kPi);
  scene.chain.q_upper = Eigen::VectorXd::Constant(1, kPi);
  scene.geometries.push_back({1, RigidTransform2D::Identity(), PointShape{{0.0, 0.0}}});
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{0.0, 1.0}, 0.1}});
  scene.collision_pairs = auto_collision_pairs(scene);
  return scene;
}

inline double one_link_collision_lo() { return std::asin(0.995); }
inline double one_link_collision_hi() { return kPi - std::asin(0.995); }

// Second obstacle for the refinement fixture: a disk on the unit circle at
// angle 1.0 with radius 2·sin(0.05), so the added colliding interval is
// exactly q ∈ [0.9, 1.1].
inline Scene one_link_scene_with_second_disk() {
  Scene scene = one_link_scene();
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(),
       DiskShape{{std::cos(1.0), std::sin(1.0)}, 2.0 * std::sin(0.05)}});
  scene.collision_pairs = auto_collision_pairs(scene);
  return scene;
}

// Two links of length 1, limits ±π, disk geometry on each link midpoint plus
// a point tip, three disk obstacles.
inline Scene two_link_scene() {
  Scene scene;
  scene.chain.link_lengths = {1.0, 1.0};
  scene.chain.q_lower = Eigen::VectorXd::Constant(2, -kPi);
  scene.chain.q_upper = Eigen::VectorXd::Constant(2, kPi);
  scene.geometries.push_back(
      {1, RigidTransform2D::Identity(), DiskShape{{-0.5, 0.0}, 0.08}});
  scene.geometries.push_back(
      {2, RigidTransform2D::Identity(), DiskShape{{-0.5, 0.0}, 0.08}});
  scene.geometries.push_back({2, RigidTransform2D::Identity(), PointShape{{0.0, 0.0}}});
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{1.4, 1.2}, 0.3}});
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{-1.4, 1.2}, 0.3}});
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{0.0, -1.7}, 0.3}});
  scene.collision_pairs = auto_collision_pairs(scene);
  return scene;
}

// Four links among a ring of disk obstacles; used by the certification and
// ordering experiments.
inline Scene four_link_scene() {
  Scene scene;
  scene.chain.link_lengths = {1.0, 0.9, 0.8, 0.7};
  scene.chain.q_lower = Eigen::VectorXd::Constant(4, -kPi);
  scene.chain.q_upper = Eigen::VectorXd::Constant(4, kPi);
  for (int k = 1; k <= 4; ++k) {
    scene.geometries.push_back(
        {k, RigidTransform2D::Identity(),
         DiskShape{{-0.5 * scene.chain.link_lengths[k - 1], 0.0}, 0.1}});
  }
  scene.geometries.push_back({4, RigidTransform2D::Identity(), PointShape{{0.0, 0.0}}});
  const std::vector<Eigen::Vector2d> centers = {
      {2.2, 1.3}, {-1.6, 2.0}, {-2.3, -1.1}, {0.4, -2.5}, {2.6, -0.9}, {0.9, 2.6}};
  for (const auto& c : centers)
    scene.geometries.push_back({-1, RigidTransform2D::Identity(), DiskShape{c, 0.45}});
  scene.collision_pairs = auto_collision_pairs(scene);
  return scene;
}

}  // namespace irisnp::test
