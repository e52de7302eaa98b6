#pragma once

#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "irisnp/chain.hpp"
#include "irisnp/ellipsoid.hpp"
#include "irisnp/nlp.hpp"
#include "irisnp/polytope.hpp"

namespace irisnp {

// Nonlinear program searching the polytope for a configuration that brings a
// collision pair into contact: decision vector x = (q, pˣ, pʸ) with the
// ellipse-metric cost on q, shape membership on the local points, the
// kinematic coincidence equality, and the polytope rows on q.
//
// The returned problem keeps a pointer to `scene`, which must outlive it.
inline NlpProblem build_counterexample_problem(const Scene& scene,
                                               const std::pair<int, int>& pair,
                                               const Hyperellipsoid& ellipse,
                                               const HPolyhedron& polytope) {
  const int dof = scene.chain.dof();
  const int dim = dof + 4;
  const int gi = pair.first;
  const int gj = pair.second;

  NlpProblem p;
  p.dim = dim;
  p.cost_hessian = Eigen::MatrixXd::Zero(dim, dim);
  p.cost_hessian.topLeftCorner(dof, dof) = ellipse.C.transpose() * ellipse.C;
  p.cost_center = Eigen::VectorXd::Zero(dim);
  p.cost_center.head(dof) = ellipse.d;

  p.lower = Eigen::VectorXd::Constant(dim, -std::numeric_limits<double>::infinity());
  p.upper = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  p.lower.head(dof) = scene.chain.q_lower;
  p.upper.head(dof) = scene.chain.q_upper;

  // Polytope rows act on the q block only.
  p.lin_G = Eigen::MatrixXd::Zero(polytope.rows(), dim);
  p.lin_G.leftCols(dof) = polytope.A();
  p.lin_h = polytope.b();

  auto add_membership = [&](int geom, int offset) {
    const MembershipConstraints m =
        membership_constraints(scene.geometries[geom].shape);
    // Point memberships become tight bounds; disks and polygons rely on the
    // ball / edge constraints alone (a redundant bounding box would be
    // tangent to them, which stalls the projection).
    if (m.equality_point) {
      p.lower.segment(offset, 2) = m.lower;
      p.upper.segment(offset, 2) = m.upper;
    }
    if (m.ball) {
      QuadraticInequality q;
      q.S = Eigen::MatrixXd::Zero(2, dim);
      q.S(0, offset) = 1.0;
      q.S(1, offset + 1) = 1.0;
      q.s = -m.ball->center;
      q.radius = m.ball->radius;
      p.quad_ineqs.push_back(std::move(q));
    }
    if (m.edge_normals.rows() > 0) {
      const int old = static_cast<int>(p.lin_G.rows());
      p.lin_G.conservativeResize(old + m.edge_normals.rows(), Eigen::NoChange);
      p.lin_G.bottomRows(m.edge_normals.rows()).setZero();
      p.lin_G.block(old, offset, m.edge_normals.rows(), 2) = m.edge_normals;
      p.lin_h.conservativeResize(old + m.edge_offsets.size());
      p.lin_h.tail(m.edge_offsets.size()) = m.edge_offsets;
    }
  };
  add_membership(gi, dof);
  add_membership(gj, dof + 2);

  const Scene* sc = &scene;
  p.eq_count = 2;
  p.eq_residual = [sc, gi, gj, dof](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd q = x.head(dof);
    const Eigen::Vector2d px = x.segment(dof, 2);
    const Eigen::Vector2d py = x.segment(dof + 2, 2);
    return fk_point(*sc, q, gi, px) - fk_point(*sc, q, gj, py);
  };
  p.eq_jacobian = [sc, gi, gj, dof, dim](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const Eigen::VectorXd q = x.head(dof);
    const Eigen::Vector2d px = x.segment(dof, 2);
    const Eigen::Vector2d py = x.segment(dof + 2, 2);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, dim);
    jac.leftCols(dof) = fk_point_jacobian(*sc, q, gi, px) -
                        fk_point_jacobian(*sc, q, gj, py);
    const RigidTransform2D xi = geometry_world_pose(*sc, q, gi);
    const RigidTransform2D xj = geometry_world_pose(*sc, q, gj);
    jac(0, dof) = xi.c;
    jac(0, dof + 1) = -xi.s;
    jac(1, dof) = xi.s;
    jac(1, dof + 1) = xi.c;
    jac(0, dof + 2) = -xj.c;
    jac(0, dof + 3) = xj.s;
    jac(1, dof + 2) = -xj.s;
    jac(1, dof + 3) = -xj.c;
    return jac;
  };
  return p;
}

// Deterministic starting point: q at the supplied guess, local points at the
// shape centroids.
inline Eigen::VectorXd counterexample_initial_guess(const Scene& scene,
                                                    const std::pair<int, int>& pair,
                                                    const Eigen::VectorXd& q_guess) {
  const int dof = scene.chain.dof();
  Eigen::VectorXd x0(dof + 4);
  x0.head(dof) = q_guess;
  x0.segment(dof, 2) = shape_centroid(scene.geometries[pair.first].shape);
  x0.segment(dof + 2, 2) = shape_centroid(scene.geometries[pair.second].shape);
  return x0;
}

enum class ConstraintKind { Inequality, Equality };

// User constraint g(q) ≤ 0 on the region, with exact gradient.
struct ConstraintFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  ConstraintKind kind = ConstraintKind::Inequality;
  std::string name;
};

// Violation search for an extra constraint: minimize the ellipse metric
// subject to g(q) ≥ 0 and the polytope rows.
inline NlpProblem build_constraint_counterexample_problem(
    const ConstraintFunction& g, const Hyperellipsoid& ellipse,
    const HPolyhedron& polytope) {
  const int dim = polytope.dim();
  NlpProblem p;
  p.dim = dim;
  p.cost_hessian = ellipse.C.transpose() * ellipse.C;
  p.cost_center = ellipse.d;
  p.lin_G = polytope.A();
  p.lin_h = polytope.b();
  p.lower = Eigen::VectorXd::Constant(dim, -std::numeric_limits<double>::infinity());
  p.upper = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  p.nl_ineqs.push_back({g.value, g.gradient});
  return p;
}

}  // namespace irisnp
