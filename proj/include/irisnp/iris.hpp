#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "irisnp/chain.hpp"
#include "irisnp/counterexample.hpp"
#include "irisnp/ellipsoid.hpp"
#include "irisnp/mvie.hpp"
#include "irisnp/nlp.hpp"
#include "irisnp/polytope.hpp"
#include "irisnp/sampling.hpp"

namespace irisnp {

// Domain failures (seed in collision, seed inside another region, ...) as
// opposed to malformed input.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IrisOptions {
  double margin = 0.01;             // configuration-space margin δ
  double initial_radius = 1e-2;     // seed ellipse radius ε
  int iteration_limit = 5;
  double termination_threshold = 0.02;  // relative ellipsoid det growth
  bool require_containment = false;
  int max_consecutive_infeasible = 1;
  std::uint64_t seed = 0;
  std::vector<HPolyhedron> cspace_obstacles;
  std::vector<ConstraintFunction> extra_constraints;
  bool sort_pairs = true;
  int mcmc_mixing_steps = 50;
  SolveOptions solver;

  void validate() const {
    if (margin < 0.0) throw std::invalid_argument("margin must be nonnegative");
    if (!(initial_radius > 0.0))
      throw std::invalid_argument("initial ellipse radius must be positive");
    if (!(termination_threshold > 0.0))
      throw std::invalid_argument("termination threshold must be positive");
    if (iteration_limit < 1) throw std::invalid_argument("iteration limit must be >= 1");
    if (max_consecutive_infeasible < 1)
      throw std::invalid_argument("max consecutive infeasible must be >= 1");
    for (const auto& g : extra_constraints)
      if (g.kind == ConstraintKind::Equality)
        throw std::invalid_argument(
            "equality constraints are not supported: they collapse the region "
            "to zero volume");
  }
};

enum class TerminationReason { GrowthThreshold, IterationLimit, SeedEscaped, SingleSweep };

struct CounterexampleRecord {
  Eigen::VectorXd q;
  Hyperplane plane;
  std::pair<int, int> pair{-1, -1};  // geometry indices; {-1,-1} for constraints
  int constraint_index = -1;
  int iteration = 0;
};

struct IterationStats {
  int faces_added = 0;
  double log_det = 0.0;  // log det C̃ after the ellipsoid step
  int solves = 0;
  int successes = 0;
  double wall_seconds = 0.0;
};

struct RegionResult {
  HPolyhedron polytope;
  Hyperellipsoid ellipsoid;
  std::vector<IterationStats> iterations;
  TerminationReason termination = TerminationReason::IterationLimit;
  std::vector<CounterexampleRecord> counterexamples;
};

// --- hyperplanes -----------------------------------------------------------

// Eq.-4 style plane: normalized ellipse-metric gradient at q*, offset backed
// off by the margin so q* violates the new row by exactly δ.
inline Hyperplane hyperplane_with_margin(const Hyperellipsoid& e,
                                         const Eigen::VectorXd& q_star,
                                         double margin) {
  Eigen::VectorXd w = e.C.transpose() * (e.C * (q_star - e.d));
  const double norm = w.norm();
  if (norm < 1e-12)
    throw DomainError("counterexample coincides with the ellipse center");
  w /= norm;
  return {w, w.dot(q_star) - margin};
}

// Unnormalized tangent plane of the metric level set through x*.
inline Hyperplane tangent_hyperplane(const Hyperellipsoid& e,
                                     const Eigen::VectorXd& x_star) {
  Eigen::VectorXd a = e.C.transpose() * (e.C * (x_star - e.d));
  if (a.norm() < 1e-12)
    throw DomainError("tangent point coincides with the ellipse center");
  return {a, a.dot(x_star)};
}

// --- initialization and ordering -------------------------------------------

// P₀ = joint-limit box, E₀ = radius-ε sphere at the seed.
inline std::pair<HPolyhedron, Hyperellipsoid> initialize(const Scene& scene,
                                                         const Eigen::VectorXd& q0,
                                                         double epsilon) {
  const PlanarChain& chain = scene.chain;
  if (q0.size() != chain.dof())
    throw std::invalid_argument("initialize: seed dimension mismatch");
  for (int i = 0; i < chain.dof(); ++i)
    if (!(chain.q_lower[i] < q0[i] && q0[i] < chain.q_upper[i]))
      throw DomainError("seed outside joint limits");
  if (in_collision(scene, q0)) throw DomainError("seed in collision");
  return {HPolyhedron::Box(chain.q_lower, chain.q_upper),
          Hyperellipsoid::Sphere(epsilon, q0)};
}

// Pairs sorted ascending by task-space distance at the seed configuration
// (stable, so ties keep their original order).
inline std::vector<std::pair<int, int>> order_collision_pairs(
    const Scene& scene, const Eigen::VectorXd& q0) {
  std::vector<std::pair<int, int>> pairs = scene.collision_pairs;
  std::vector<double> dist(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i)
    dist[i] = pair_distance_at_config(scene, q0, pairs[i]);
  std::vector<size_t> idx(pairs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return dist[a] < dist[b]; });
  std::vector<std::pair<int, int>> out(pairs.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = pairs[idx[i]];
  return out;
}

// --- hyperplane sweep -------------------------------------------------------

struct SweepStats {
  int solves = 0;
  int planes = 0;
};

namespace detail {

// Draws the next restart configuration from the current polytope; re-enters
// at the Chebyshev center when the chain point was cut off by a new plane.
class RestartSampler {
 public:
  RestartSampler(RngState* rng, int mixing_steps)
      : rng_(rng), mixing_(mixing_steps) {}

  std::optional<Eigen::VectorXd> next(const HPolyhedron& p) {
    if (chain_.size() != p.dim() || !p.contains(chain_, 0.0)) {
      const auto [center, radius] = chebyshev_center(p);
      if (radius <= 1e-10) return std::nullopt;
      chain_ = center;
    }
    chain_ = hit_and_run_sample(p, chain_, *rng_, mixing_);
    return chain_;
  }

 private:
  RngState* rng_;
  int mixing_;
  Eigen::VectorXd chain_;
};

}  // namespace detail

// One plane per loop, tangent at the metric-closest point of
// obstacle ∩ working polytope, until the intersection interior is empty.
inline int separate_cspace_obstacle(const Hyperellipsoid& e, HPolyhedron* working,
                                    const HPolyhedron& obstacle) {
  int added = 0;
  for (int guard = 0; guard < 1000; ++guard) {
    const HPolyhedron overlap = HPolyhedron::Intersection(obstacle, *working);
    const auto [center, radius] = chebyshev_center(overlap);
    (void)center;
    if (radius <= 1e-9) return added;
    const auto closest = closest_point_in_polytope_metric(e, overlap);
    if (!closest) return added;
    if ((*closest - e.d).norm() < 1e-10)
      throw DomainError("seed inside configuration-space obstacle");
    Hyperplane plane = tangent_hyperplane(e, *closest);
    const double norm = plane.a.norm();
    plane.a /= norm;
    plane.b /= norm;
    working->add_hyperplane(plane);
    ++added;
  }
  throw std::runtime_error("separate_cspace_obstacle failed to converge");
}

// Algorithm: for each collision pair (in order), repeatedly solve the
// counterexample program, adding a margin-backed plane per success, until
// max_consecutive_infeasible failures in a row; then the extra constraints
// the same way; then the configuration-space obstacles.
inline HPolyhedron add_separating_hyperplanes(
    const Hyperellipsoid& e, const std::vector<std::pair<int, int>>& ordered_pairs,
    const HPolyhedron& p0, const Scene& scene, const IrisOptions& opts,
    RngState* rng = nullptr, SweepStats* stats = nullptr,
    std::vector<CounterexampleRecord>* log = nullptr, int iteration = 0) {
  HPolyhedron p = p0;
  RngState local_rng(opts.seed);
  if (rng == nullptr) rng = &local_rng;
  detail::RestartSampler sampler(rng, opts.mcmc_mixing_steps);
  const int dof = scene.chain.dof();
  const Eigen::VectorXd q_default =
      e.d.cwiseMax(scene.chain.q_lower).cwiseMin(scene.chain.q_upper);

  auto record = [&](const Eigen::VectorXd& q_star, const Hyperplane& plane,
                    const std::pair<int, int>& pair, int constraint_index) {
    if (log != nullptr)
      log->push_back({q_star, plane, pair, constraint_index, iteration});
    if (stats != nullptr) ++stats->planes;
  };

  auto sweep_entity = [&](auto&& solve_once, const std::pair<int, int>& pair,
                          int constraint_index) {
    int failures = 0;
    bool first = true;
    int guard = 0;
    while (failures < opts.max_consecutive_infeasible) {
      if (++guard > 10000)
        throw std::runtime_error("hyperplane sweep failed to terminate");
      Eigen::VectorXd q_guess;
      if (first) {
        q_guess = q_default;
      } else {
        const auto sample = sampler.next(p);
        if (!sample) break;  // polytope interior too thin to sample
        q_guess = *sample;
      }
      first = false;
      if (stats != nullptr) ++stats->solves;
      const std::optional<Eigen::VectorXd> q_star = solve_once(q_guess);
      if (q_star) {
        const Hyperplane plane = hyperplane_with_margin(e, *q_star, opts.margin);
        p.add_hyperplane(plane);
        record(*q_star, plane, pair, constraint_index);
        failures = 0;
      } else {
        ++failures;
      }
    }
  };

  for (const auto& pair : ordered_pairs) {
    sweep_entity(
        [&](const Eigen::VectorXd& q_guess) -> std::optional<Eigen::VectorXd> {
          const NlpProblem problem = build_counterexample_problem(scene, pair, e, p);
          const Eigen::VectorXd x0 = counterexample_initial_guess(scene, pair, q_guess);
          const SolveOutcome outcome = solve_local(problem, x0, opts.solver);
          if (outcome.status != SolveStatus::FeasibleOptimum) return std::nullopt;
          return outcome.x.head(dof);
        },
        pair, -1);
  }

  for (size_t k = 0; k < opts.extra_constraints.size(); ++k) {
    sweep_entity(
        [&](const Eigen::VectorXd& q_guess) -> std::optional<Eigen::VectorXd> {
          const NlpProblem problem = build_constraint_counterexample_problem(
              opts.extra_constraints[k], e, p);
          const SolveOutcome outcome = solve_local(problem, q_guess, opts.solver);
          if (outcome.status != SolveStatus::FeasibleOptimum) return std::nullopt;
          return outcome.x;
        },
        {-1, -1}, static_cast<int>(k));
  }

  for (const auto& obstacle : opts.cspace_obstacles) {
    const int added = separate_cspace_obstacle(e, &p, obstacle);
    if (stats != nullptr) stats->planes += added;
  }
  return p;
}

// --- main loop ---------------------------------------------------------------

// Alternates hyperplane sweeps (fresh from the joint-limit box each
// iteration) with maximum-volume inscribed ellipsoids, until the ellipsoid
// volume growth falls below the threshold, the iteration limit is reached, or
// (with require_containment) the seed escapes — in which case the previous
// iteration's region is returned.
inline RegionResult iris_np(const Scene& scene, const Eigen::VectorXd& q0,
                            const IrisOptions& opts,
                            const HPolyhedron* p0_override = nullptr) {
  opts.validate();
  scene.validate();
  auto [p_base, ellipse] = initialize(scene, q0, opts.initial_radius);
  if (p0_override != nullptr) {
    if (p0_override->dim() != scene.chain.dof())
      throw std::invalid_argument("iris_np: initial polytope dimension mismatch");
    if (!p0_override->contains(q0, 0.0))
      throw DomainError("seed outside the initial polytope");
    p_base = *p0_override;
  }
  for (const auto& g : opts.extra_constraints)
    if (g.value(q0) > 0.0)
      throw DomainError("seed violates extra constraint" +
                        (g.name.empty() ? "" : " '" + g.name + "'"));

  const std::vector<std::pair<int, int>> pairs =
      opts.sort_pairs ? order_collision_pairs(scene, q0) : scene.collision_pairs;

  RngState rng(opts.seed);
  RegionResult result;
  result.polytope = p_base;
  result.ellipsoid = ellipse;
  double det_prev = std::exp(scene.chain.dof() * std::log(opts.initial_radius));

  for (int iter = 1; iter <= opts.iteration_limit; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepStats stats;
    const HPolyhedron swept = add_separating_hyperplanes(
        ellipse, pairs, p_base, scene, opts, &rng, &stats,
        &result.counterexamples, iter);
    if (opts.require_containment && !swept.contains(q0, 0.0)) {
      result.termination = TerminationReason::SeedEscaped;
      return result;
    }
    const MvieResult mvie = max_inscribed_ellipsoid_detail(swept);
    const auto t1 = std::chrono::steady_clock::now();

    IterationStats it;
    it.faces_added = swept.rows() - p_base.rows();
    it.log_det = mvie.log_det;
    it.solves = stats.solves;
    it.successes = stats.planes;
    it.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.iterations.push_back(it);

    result.polytope = swept;
    result.ellipsoid = mvie.ellipsoid;
    ellipse = mvie.ellipsoid;

    const double det = std::exp(mvie.log_det);
    if ((det - det_prev) / det_prev < opts.termination_threshold) {
      result.termination = TerminationReason::GrowthThreshold;
      return result;
    }
    det_prev = det;
  }
  result.termination = TerminationReason::IterationLimit;
  return result;
}

// One sweep over the changed pairs only, keeping the original rows and
// metric. If the fallback seed gets excluded, re-grow from it inside the
// original polytope instead.
inline RegionResult refine_region(const RegionResult& original, const Scene& scene,
                                  const std::vector<std::pair<int, int>>& changed_pairs,
                                  const std::optional<Eigen::VectorXd>& fallback_seed,
                                  const IrisOptions& opts) {
  opts.validate();
  scene.validate();
  for (const auto& pair : changed_pairs) {
    bool found = false;
    for (const auto& known : scene.collision_pairs)
      if (known == pair) found = true;
    if (!found)
      throw std::invalid_argument("refine_region: changed pair not in the scene pair set");
  }
  if (fallback_seed && in_collision(scene, *fallback_seed))
    throw DomainError("fallback seed in collision");

  std::vector<std::pair<int, int>> pairs = changed_pairs;
  if (opts.sort_pairs) {
    const Eigen::VectorXd ref = original.ellipsoid.d.cwiseMax(scene.chain.q_lower)
                                    .cwiseMin(scene.chain.q_upper);
    std::vector<double> dist(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i)
      dist[i] = pair_distance_at_config(scene, ref, pairs[i]);
    std::vector<size_t> idx(pairs.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return dist[a] < dist[b]; });
    std::vector<std::pair<int, int>> sorted(pairs.size());
    for (size_t i = 0; i < idx.size(); ++i) sorted[i] = pairs[idx[i]];
    pairs = sorted;
  }

  IrisOptions sweep_opts = opts;
  sweep_opts.extra_constraints.clear();
  sweep_opts.cspace_obstacles.clear();

  RngState rng(opts.seed);
  RegionResult result;
  const auto t0 = std::chrono::steady_clock::now();
  SweepStats stats;
  const HPolyhedron refined =
      add_separating_hyperplanes(original.ellipsoid, pairs, original.polytope,
                                 scene, sweep_opts, &rng, &stats,
                                 &result.counterexamples, 1);
  if (fallback_seed && !refined.contains(*fallback_seed, 0.0))
    return iris_np(scene, *fallback_seed, opts, &original.polytope);

  const MvieResult mvie = max_inscribed_ellipsoid_detail(refined);
  const auto t1 = std::chrono::steady_clock::now();
  IterationStats it;
  it.faces_added = refined.rows() - original.polytope.rows();
  it.log_det = mvie.log_det;
  it.solves = stats.solves;
  it.successes = stats.planes;
  it.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  result.iterations.push_back(it);
  result.polytope = refined;
  result.ellipsoid = mvie.ellipsoid;
  result.termination = TerminationReason::SingleSweep;
  return result;
}

// Sequential multi-region growth: every finished region becomes a
// configuration-space obstacle for the next, so the interiors stay disjoint.
inline std::vector<RegionResult> grow_regions_cover(
    const Scene& scene, const std::vector<Eigen::VectorXd>& seeds,
    const IrisOptions& opts) {
  std::vector<RegionResult> regions;
  IrisOptions local = opts;
  for (size_t k = 0; k < seeds.size(); ++k) {
    for (size_t j = 0; j < regions.size(); ++j) {
      if (regions[j].polytope.contains(seeds[k], 0.0))
        throw DomainError("seed " + std::to_string(k) + " lies inside region " +
                          std::to_string(j));
    }
    local.seed = opts.seed ^ static_cast<std::uint64_t>(k);
    regions.push_back(iris_np(scene, seeds[k], local));
    local.cspace_obstacles.push_back(regions.back().polytope);
  }
  return regions;
}

}  // namespace irisnp
