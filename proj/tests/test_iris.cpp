#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "irisnp/iris.hpp"

using namespace irisnp;
using irisnp::test::kPi;

namespace {

Scene obstacle_free_box() {
  Scene scene;
  scene.chain.link_lengths = {1.0, 1.0};
  scene.chain.q_lower = Eigen::VectorXd::Constant(2, -1.0);
  scene.chain.q_upper = Eigen::VectorXd::Constant(2, 1.0);
  return scene;
}

// Upper bound of a 1D polytope: min over rows with positive coefficient.
double interval_upper(const HPolyhedron& p) {
  double ub = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i)
    if (p.A()(i, 0) > 1e-12) ub = std::min(ub, p.b()[i] / p.A()(i, 0));
  return ub;
}

double interval_lower(const HPolyhedron& p) {
  double lb = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i)
    if (p.A()(i, 0) < -1e-12) lb = std::max(lb, p.b()[i] / p.A()(i, 0));
  return lb;
}

ConstraintFunction coordinate_limit(int index, double bound) {
  ConstraintFunction g;
  g.value = [index, bound](const Eigen::VectorXd& q) { return q[index] - bound; };
  g.gradient = [index](const Eigen::VectorXd& q) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(q.size());
    grad[index] = 1.0;
    return grad;
  };
  g.name = "coordinate limit";
  return g;
}

bool interiors_intersect(const HPolyhedron& a, const HPolyhedron& b, double shrink) {
  const HPolyhedron stacked = HPolyhedron::Intersection(a, b);
  const HPolyhedron shrunk(stacked.A(),
                           stacked.b() - Eigen::VectorXd::Constant(stacked.rows(), shrink));
  const auto [center, radius] = chebyshev_center(shrunk);
  (void)center;
  return radius >= 0.0;
}

}  // namespace

TEST_CASE("initialize builds the limit box and the seed sphere") {
  const Scene scene = obstacle_free_box();
  Eigen::VectorXd q0(2);
  q0 << 0.0, 0.0;
  const auto [p, e] = initialize(scene, q0, 0.01);
  CHECK(p.rows() == 4);
  CHECK(p.contains(q0, 0.0));
  CHECK((e.C - 100.0 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.d == q0);

  q0 << 0.99, 0.0;
  CHECK_NOTHROW(initialize(scene, q0, 0.01));
  q0 << 2.0, 0.0;
  CHECK_THROWS_AS(initialize(scene, q0, 0.01), DomainError);

  const Scene one = irisnp::test::one_link_scene();
  Eigen::VectorXd qc(1);
  qc << kPi / 2;  // tip at the disk center
  CHECK_THROWS_AS(initialize(one, qc, 0.01), DomainError);
}

TEST_CASE("order_collision_pairs sorts by seed-configuration distance") {
  // Three obstacles at increasing distance from the tip at q0 = 0.
  Scene scene = irisnp::test::one_link_scene();
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{1.2, 0.0}, 0.1}});  // closest
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{-2.0, 0.0}, 0.1}});  // farthest
  scene.collision_pairs = auto_collision_pairs(scene);
  REQUIRE(scene.collision_pairs.size() == 3);

  Eigen::VectorXd q0(1);
  q0 << 0.0;
  const auto ordered = order_collision_pairs(scene, q0);
  double prev = -1.0;
  for (const auto& pair : ordered) {
    const double d = pair_distance_at_config(scene, q0, pair);
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(ordered[0].second == 2);  // disk at (1.2, 0) is nearest to tip (1, 0)

  // Stability: equal distances keep the original order.
  Scene tie = irisnp::test::one_link_scene();
  tie.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{0.0, -1.0}, 0.1}});  // same distance
  tie.collision_pairs = auto_collision_pairs(tie);
  const auto tied = order_collision_pairs(tie, q0);
  CHECK(tied == tie.collision_pairs);

  // A colliding pair (distance zero) sorts first.
  Eigen::VectorXd qc(1);
  qc << kPi / 2;
  const auto colliding_first = order_collision_pairs(scene, qc);
  CHECK(pair_distance_at_config(scene, qc, colliding_first[0]) == 0.0);
}

TEST_CASE("hyperplane_with_margin closed forms") {
  Hyperellipsoid e{Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()};
  Eigen::VectorXd q(2);
  q << 1, 0;
  Hyperplane h = hyperplane_with_margin(e, q, 0.01);
  CHECK((h.a - Eigen::Vector2d(1, 0)).norm() < 1e-12);
  CHECK(h.b == Catch::Approx(0.99).margin(1e-12));

  e.C = 2.0 * Eigen::Matrix2d::Identity();
  h = hyperplane_with_margin(e, q, 0.01);
  CHECK((h.a - Eigen::Vector2d(1, 0)).norm() < 1e-12);
  CHECK(h.b == Catch::Approx(0.99).margin(1e-12));

  e.C = Eigen::Vector2d(1, 2).asDiagonal();
  q << 1, 1;
  h = hyperplane_with_margin(e, q, 0.0);
  CHECK((h.a - Eigen::Vector2d(1.0 / std::sqrt(17.0), 4.0 / std::sqrt(17.0))).norm() <
        1e-12);
  CHECK(h.b == Catch::Approx(5.0 / std::sqrt(17.0)).margin(1e-12));

  // Margin identity a·q* − b = δ.
  RngState rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd c(3, 3);
    for (int i = 0; i < 9; ++i) c(i / 3, i % 3) = rng.uniform(-1, 1);
    c += 2.5 * Eigen::Matrix3d::Identity();
    const Hyperellipsoid e3{c, Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                               rng.uniform(-1, 1))};
    const Eigen::VectorXd qs = e3.d + rng.unit_direction(3) * rng.uniform(0.1, 2.0);
    const double delta = rng.uniform(0.0, 0.1);
    const Hyperplane plane = hyperplane_with_margin(e3, qs, delta);
    CHECK(std::abs(plane.a.norm() - 1.0) <= 1e-9);
    CHECK(std::abs(plane.a.dot(qs) - plane.b - delta) <= 1e-9);
  }

  CHECK_THROWS_AS(hyperplane_with_margin(e, e.d, 0.01), DomainError);
}

TEST_CASE("tangent_hyperplane closed forms and support property") {
  Hyperellipsoid e{Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()};
  Eigen::VectorXd x(2);
  x << 0, 2;
  Hyperplane h = tangent_hyperplane(e, x);
  CHECK((h.a - Eigen::Vector2d(0, 2)).norm() < 1e-12);
  CHECK(h.b == Catch::Approx(4.0).margin(1e-12));

  e.d = Eigen::Vector2d(1, 0);
  x << 2, 0;
  h = tangent_hyperplane(e, x);
  CHECK((h.a - Eigen::Vector2d(1, 0)).norm() < 1e-12);
  CHECK(h.b == Catch::Approx(2.0).margin(1e-12));

  // All ellipse points satisfy a·x ≤ b for tangent points on the boundary.
  RngState rng(17);
  Eigen::MatrixXd c(2, 2);
  c << 1.3, 0.2, -0.1, 0.8;
  const Hyperellipsoid e2{c, Eigen::Vector2d(0.3, -0.2)};
  const Eigen::MatrixXd ct = ellipsoid_inverse_factor(e2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd boundary = e2.d + ct * rng.unit_direction(2);
    const Hyperplane tangent = tangent_hyperplane(e2, boundary);
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd pt = e2.d + ct * rng.unit_direction(2);
      CHECK(tangent.a.dot(pt) <= tangent.b + 1e-9);
    }
  }
}

TEST_CASE("sweep with no pairs returns the box unchanged") {
  const Scene scene = obstacle_free_box();
  const HPolyhedron box = HPolyhedron::Box(scene.chain.q_lower, scene.chain.q_upper);
  const Hyperellipsoid e = Hyperellipsoid::Sphere(0.01, Eigen::Vector2d(0, 0));
  IrisOptions opts;
  const HPolyhedron swept =
      add_separating_hyperplanes(e, scene.collision_pairs, box, scene, opts);
  CHECK(swept.rows() == box.rows());
}

TEST_CASE("one-link sweep adds exactly the closed-form plane") {
  const Scene scene = irisnp::test::one_link_scene();
  const HPolyhedron box = HPolyhedron::Box(scene.chain.q_lower, scene.chain.q_upper);
  const Hyperellipsoid e = Hyperellipsoid::Sphere(0.01, Eigen::VectorXd::Zero(1));
  IrisOptions opts;
  SweepStats stats;
  RngState rng(1);
  std::vector<CounterexampleRecord> log;
  const HPolyhedron swept = add_separating_hyperplanes(
      e, scene.collision_pairs, box, scene, opts, &rng, &stats, &log, 1);
  REQUIRE(swept.rows() == 3);
  CHECK(stats.planes == 1);
  CHECK(stats.solves >= 2);  // success then infeasible
  const double expected = std::asin(0.995) - 0.01;
  CHECK(std::abs(interval_upper(swept) - expected) < 1e-3);
  REQUIRE(log.size() == 1);
  CHECK(std::abs(log[0].plane.a.dot(log[0].q) - log[0].plane.b - 0.01) <= 1e-9);
}

TEST_CASE("separating the nearer obstacle also separates the farther one") {
  Scene scene = irisnp::test::one_link_scene();
  // Wider disk at the same bearing: its colliding interval strictly contains
  // the small disk's.
  scene.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{0.0, 1.0}, 0.25}});
  scene.collision_pairs = auto_collision_pairs(scene);
  REQUIRE(scene.collision_pairs.size() == 2);

  const HPolyhedron box = HPolyhedron::Box(scene.chain.q_lower, scene.chain.q_upper);
  const Hyperellipsoid e = Hyperellipsoid::Sphere(0.01, Eigen::VectorXd::Zero(1));
  Eigen::VectorXd q0(1);
  q0 << 0.0;
  IrisOptions opts;
  SweepStats stats;
  RngState rng(1);
  const HPolyhedron swept = add_separating_hyperplanes(
      e, order_collision_pairs(scene, q0), box, scene, opts, &rng, &stats, nullptr, 1);
  CHECK(stats.planes == 1);
  const double expected = std::asin(1.0 - 0.0625 / 2.0) - 0.01;
  CHECK(std::abs(interval_upper(swept) - expected) < 1e-3);
}

TEST_CASE("separate_cspace_obstacle tangent planes") {
  const Hyperellipsoid disk{Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()};
  HPolyhedron working =
      HPolyhedron::Box(Eigen::Vector2d(-10, -10), Eigen::Vector2d(10, 10));

  // Disjoint obstacle: nothing happens.
  HPolyhedron faraway =
      HPolyhedron::Box(Eigen::Vector2d(20, 20), Eigen::Vector2d(21, 21));
  CHECK(separate_cspace_obstacle(disk, &working, faraway) == 0);
  CHECK(working.rows() == 4);

  // Box obstacle to the right: single tangent plane at (2, 0).
  HPolyhedron obstacle = HPolyhedron::Box(Eigen::Vector2d(2, -1), Eigen::Vector2d(3, 1));
  const int added = separate_cspace_obstacle(disk, &working, obstacle);
  CHECK(added == 1);
  const Eigen::VectorXd row = working.A().row(working.rows() - 1).transpose();
  CHECK((row - Eigen::Vector2d(1, 0)).norm() < 1e-6);
  CHECK(working.b()[working.rows() - 1] == Catch::Approx(2.0).margin(1e-6));

  // Obstacle containing the ellipse center cannot be separated.
  HPolyhedron around =
      HPolyhedron::Box(Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.5, 0.5));
  HPolyhedron fresh = HPolyhedron::Box(Eigen::Vector2d(-10, -10), Eigen::Vector2d(10, 10));
  CHECK_THROWS_AS(separate_cspace_obstacle(disk, &fresh, around), DomainError);
}

TEST_CASE("iris_np on an obstacle-free box returns the box") {
  const Scene scene = obstacle_free_box();
  IrisOptions opts;
  const RegionResult result = iris_np(scene, Eigen::Vector2d(0, 0), opts);
  CHECK(result.polytope.rows() == 4);
  CHECK(result.termination == TerminationReason::GrowthThreshold);
  CHECK(result.iterations.size() == 2);
  const Eigen::MatrixXd f = ellipsoid_inverse_factor(result.ellipsoid);
  CHECK((f - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(ellipsoid_in_polytope(result.ellipsoid, result.polytope, 1e-6));
}

TEST_CASE("iris_np recovers the one-link closed-form region") {
  const Scene scene = irisnp::test::one_link_scene();
  IrisOptions opts;
  opts.seed = 7;
  const RegionResult result = iris_np(scene, Eigen::VectorXd::Zero(1), opts);

  CHECK(std::abs(interval_upper(result.polytope) - (std::asin(0.995) - 0.01)) < 5e-3);
  CHECK(interval_lower(result.polytope) == Catch::Approx(-kPi).margin(1e-12));
  CHECK(ellipsoid_in_polytope(result.ellipsoid, result.polytope, 1e-6));

  // Monotone log det across iterations.
  for (size_t i = 1; i < result.iterations.size(); ++i)
    CHECK(result.iterations[i].log_det >= result.iterations[i - 1].log_det - 1e-9);

  // Margin identity and collision soundness for every accepted counterexample.
  REQUIRE(!result.counterexamples.empty());
  for (const auto& ce : result.counterexamples) {
    CHECK(std::abs(ce.plane.a.dot(ce.q) - ce.plane.b - opts.margin) <= 1e-9);
    REQUIRE(ce.pair.first >= 0);
    CHECK(pair_distance_at_config(scene, ce.q, ce.pair) <= 1e-8);
  }
}

TEST_CASE("iris_np with an extra constraint trims the box") {
  const Scene scene = obstacle_free_box();
  IrisOptions opts;
  opts.extra_constraints.push_back(coordinate_limit(0, 0.5));
  const RegionResult result = iris_np(scene, Eigen::Vector2d(0, 0), opts);

  // Upper bound on q1 is 0.5 − δ.
  double ub = std::numeric_limits<double>::infinity();
  for (int i = 0; i < result.polytope.rows(); ++i) {
    const Eigen::VectorXd a = result.polytope.A().row(i).transpose();
    if (a[0] > 0.9)  // nearly axis-aligned rows only
      ub = std::min(ub, result.polytope.b()[i] / a[0]);
  }
  CHECK(std::abs(ub - 0.49) < 5e-3);

  // Constraint counterexamples are logged with their constraint index.
  bool saw_constraint = false;
  for (const auto& ce : result.counterexamples)
    if (ce.constraint_index == 0) {
      saw_constraint = true;
      CHECK(opts.extra_constraints[0].value(ce.q) >= -1e-6);
    }
  CHECK(saw_constraint);
}

TEST_CASE("equality extra constraints are rejected at validation") {
  const Scene scene = obstacle_free_box();
  IrisOptions opts;
  ConstraintFunction g = coordinate_limit(0, 0.5);
  g.kind = ConstraintKind::Equality;
  opts.extra_constraints.push_back(g);
  CHECK_THROWS_AS(iris_np(scene, Eigen::Vector2d(0, 0), opts), std::invalid_argument);
}

TEST_CASE("seed violating an extra constraint is rejected") {
  const Scene scene = obstacle_free_box();
  IrisOptions opts;
  opts.extra_constraints.push_back(coordinate_limit(0, 0.5));
  CHECK_THROWS_AS(iris_np(scene, Eigen::Vector2d(0.7, 0), opts), DomainError);
}

TEST_CASE("refine keeps the region when the new obstacle is unreachable") {
  const Scene scene = irisnp::test::one_link_scene();
  IrisOptions opts;
  const RegionResult original = iris_np(scene, Eigen::VectorXd::Zero(1), opts);

  Scene changed = scene;
  changed.geometries.push_back(
      {-1, RigidTransform2D::Identity(), DiskShape{{5.0, 5.0}, 0.2}});
  changed.collision_pairs = auto_collision_pairs(changed);
  const std::vector<std::pair<int, int>> new_pairs = {changed.collision_pairs[1]};
  REQUIRE(changed.collision_pairs.size() == 2);

  const RegionResult refined =
      refine_region(original, changed, new_pairs, std::nullopt, opts);
  CHECK(refined.polytope.rows() == original.polytope.rows());
  CHECK(refined.polytope.A() == original.polytope.A());
  CHECK(refined.polytope.b() == original.polytope.b());
}

TEST_CASE("refine cuts the new colliding interval") {
  const Scene scene = irisnp::test::one_link_scene();
  IrisOptions opts;
  opts.seed = 3;
  const RegionResult original = iris_np(scene, Eigen::VectorXd::Zero(1), opts);

  const Scene changed = irisnp::test::one_link_scene_with_second_disk();
  REQUIRE(changed.collision_pairs.size() == 2);
  // The pair involving the added disk (geometry index 2).
  std::vector<std::pair<int, int>> new_pairs;
  for (const auto& pair : changed.collision_pairs)
    if (pair.second == 2) new_pairs.push_back(pair);
  REQUIRE(new_pairs.size() == 1);

  const RegionResult refined =
      refine_region(original, changed, new_pairs, std::nullopt, opts);

  // Rows are a superset; the refined upper bound is near 0.9 − δ.
  CHECK(refined.polytope.rows() > original.polytope.rows());
  CHECK(refined.polytope.A().topRows(original.polytope.rows()) == original.polytope.A());
  CHECK(std::abs(interval_upper(refined.polytope) - 0.89) < 5e-3);
  CHECK(ellipsoid_in_polytope(refined.ellipsoid, refined.polytope, 1e-6));

  // Refined region samples stay inside the original region.
  RngState rng(11);
  Eigen::VectorXd x = refined.ellipsoid.d;
  for (int i = 0; i < 500; ++i) {
    x = hit_and_run_sample(refined.polytope, x, rng, 10);
    REQUIRE(original.polytope.contains(x, 1e-9));
  }

  // A fallback seed that survives refinement leaves the result unchanged.
  Eigen::VectorXd qf(1);
  qf << 0.5;
  const RegionResult with_fallback =
      refine_region(original, changed, new_pairs, qf, opts);
  CHECK(with_fallback.polytope.A() == refined.polytope.A());
  CHECK(with_fallback.polytope.b() == refined.polytope.b());
}

TEST_CASE("refine falls back to re-growing from the configuration of interest") {
  const Scene scene = irisnp::test::one_link_scene();
  IrisOptions opts;
  const RegionResult original = iris_np(scene, Eigen::VectorXd::Zero(1), opts);

  // New obstacle colliding exactly on q ∈ [0.9, 1.1]; a fallback seed above
  // the cut (q = 1.3) is excluded by the refinement sweep, so the region is
  // re-grown around it inside the original polytope.
  const Scene changed = irisnp::test::one_link_scene_with_second_disk();
  std::vector<std::pair<int, int>> new_pairs;
  for (const auto& pair : changed.collision_pairs)
    if (pair.second == 2) new_pairs.push_back(pair);

  Eigen::VectorXd qf(1);
  qf << 1.3;
  const RegionResult regrown = refine_region(original, changed, new_pairs, qf, opts);
  CHECK(regrown.polytope.contains(qf, 1e-9));
  // Grown inside the original region: upper bound still at the original cut,
  // lower bound above the new obstacle interval.
  CHECK(interval_upper(regrown.polytope) <=
        interval_upper(original.polytope) + 1e-9);
  CHECK(interval_lower(regrown.polytope) >= 1.1 - 5e-3 - 1e-9);

  // A colliding fallback seed is a domain error.
  Eigen::VectorXd bad(1);
  bad << 1.0;
  CHECK_THROWS_AS(refine_region(original, changed, new_pairs, bad, opts), DomainError);
}

TEST_CASE("grow_regions_cover produces disjoint regions") {
  const Scene scene = irisnp::test::two_link_scene();
  IrisOptions opts;
  opts.seed = 11;

  // Single seed behaves exactly like iris_np.
  const std::vector<Eigen::VectorXd> single = {Eigen::Vector2d(0.0, 0.0)};
  const RegionResult direct = iris_np(scene, single[0], opts);
  const auto one = grow_regions_cover(scene, single, opts);
  REQUIRE(one.size() == 1);
  CHECK(one[0].polytope.A() == direct.polytope.A());
  CHECK(one[0].polytope.b() == direct.polytope.b());

  // Seed inside an earlier region errors (obstacle-free box engulfs all).
  const Scene box_scene = obstacle_free_box();
  CHECK_THROWS_AS(
      grow_regions_cover(box_scene,
                         {Eigen::Vector2d(0, 0), Eigen::Vector2d(0.5, 0.5)}, opts),
      DomainError);
}

TEST_CASE("cover regions are pairwise disjoint in a two-link scene") {
  const Scene scene = irisnp::test::two_link_scene();
  IrisOptions opts;
  opts.seed = 13;
  opts.require_containment = true;
  const std::vector<Eigen::VectorXd> seeds = {Eigen::Vector2d(0.0, 0.0),
                                              Eigen::Vector2d(2.6, 0.0)};
  const auto regions = grow_regions_cover(scene, seeds, opts);
  REQUIRE(regions.size() == 2);
  for (size_t i = 0; i < regions.size(); ++i) {
    CHECK(regions[i].polytope.contains(seeds[i], 1e-9));
    CHECK(ellipsoid_in_polytope(regions[i].ellipsoid, regions[i].polytope, 1e-6));
  }
  CHECK_FALSE(interiors_intersect(regions[0].polytope, regions[1].polytope, 1e-6));
}

TEST_CASE("iris_np is deterministic for a fixed seed") {
  const Scene scene = irisnp::test::four_link_scene();
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(4);
  q0 << 0.3, -0.4, 0.5, 0.2;
  REQUIRE_FALSE(in_collision(scene, q0));
  IrisOptions opts;
  opts.seed = 99;
  opts.iteration_limit = 2;
  const RegionResult a = iris_np(scene, q0, opts);
  const RegionResult b = iris_np(scene, q0, opts);
  REQUIRE(a.polytope.rows() == b.polytope.rows());
  CHECK(a.polytope.A() == b.polytope.A());
  CHECK(a.polytope.b() == b.polytope.b());
  CHECK(a.ellipsoid.C == b.ellipsoid.C);
  CHECK(a.ellipsoid.d == b.ellipsoid.d);
}
