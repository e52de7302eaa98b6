#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "irisnp/chain.hpp"
#include "irisnp/linprog.hpp"
#include "irisnp/mvie.hpp"
#include "irisnp/polytope.hpp"
#include "irisnp/rng.hpp"

namespace irisnp {

// Hit-and-run step: random chord through the current point, uniform point on
// the chord. Asymptotically uniform on the polytope.
inline Eigen::VectorXd hit_and_run_sample(const HPolyhedron& p,
                                          const Eigen::VectorXd& x_current,
                                          RngState& rng, int mixing_steps) {
  if (!p.contains(x_current, 0.0))
    throw std::invalid_argument("hit_and_run_sample: start point outside polytope");
  Eigen::VectorXd x = x_current;
  const int n = p.dim();
  for (int step = 0; step < mixing_steps; ++step) {
    double t_lo = 0.0, t_hi = 0.0;
    Eigen::VectorXd u;
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      u = rng.unit_direction(n);
      t_lo = -std::numeric_limits<double>::infinity();
      t_hi = std::numeric_limits<double>::infinity();
      for (int i = 0; i < p.rows(); ++i) {
        const double au = p.A().row(i).dot(u);
        const double slack = p.b()[i] - p.A().row(i).dot(x);
        if (au > 1e-14) {
          t_hi = std::min(t_hi, slack / au);
        } else if (au < -1e-14) {
          t_lo = std::max(t_lo, slack / au);
        }
      }
      if (!std::isfinite(t_lo) || !std::isfinite(t_hi))
        throw std::runtime_error("hit_and_run_sample: unbounded chord");
      if (t_hi - t_lo >= 1e-12) {
        ok = true;
        break;
      }
    }
    if (!ok) throw std::runtime_error("hit_and_run_sample: degenerate chord");
    double xi = rng.uniform();
    xi = std::min(std::max(xi, 1e-9), 1.0 - 1e-9);
    x += (t_lo + xi * (t_hi - t_lo)) * u;
  }
  return x;
}

// Axis-aligned bounding box of a bounded polytope, via 2n LPs.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> polytope_bounding_box(
    const HPolyhedron& p) {
  const int n = p.dim();
  Eigen::VectorXd lower(n), upper(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c[i] = 1.0;
    LpResult hi = lp_maximize(c, p.A(), p.b());
    c[i] = -1.0;
    LpResult lo = lp_maximize(c, p.A(), p.b());
    if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal)
      throw std::runtime_error("polytope_bounding_box: polytope unbounded or empty");
    upper[i] = hi.value;
    lower[i] = -lo.value;
  }
  return {lower, upper};
}

// n uniform samples from a bounded polytope: rejection from the bounding box,
// falling back to hit-and-run when the acceptance rate drops below 1e-4.
inline std::vector<Eigen::VectorXd> uniform_polytope_samples(const HPolyhedron& p,
                                                             int n_samples,
                                                             RngState& rng) {
  const auto [center, radius] = chebyshev_center(p);
  if (radius <= 0.0)
    throw std::runtime_error("uniform_polytope_samples: polytope has empty interior");
  const auto [lower, upper] = polytope_bounding_box(p);
  const int n = p.dim();

  std::vector<Eigen::VectorXd> samples;
  samples.reserve(n_samples);
  long attempts = 0;
  Eigen::VectorXd x(n);
  while (static_cast<int>(samples.size()) < n_samples) {
    ++attempts;
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(lower[i], upper[i]);
    if (p.contains(x, 0.0)) samples.push_back(x);
    if (attempts >= 50000 &&
        static_cast<double>(samples.size()) < 1e-4 * static_cast<double>(attempts)) {
      // Thin region: switch to MCMC for the remainder.
      Eigen::VectorXd chain = center;
      while (static_cast<int>(samples.size()) < n_samples) {
        chain = hit_and_run_sample(p, chain, rng, 50);
        samples.push_back(chain);
      }
      break;
    }
  }
  return samples;
}

// Monte-Carlo colliding fraction of a region.
inline double estimate_collision_fraction(const Scene& scene, const HPolyhedron& p,
                                          int n_samples, RngState& rng) {
  if (n_samples <= 0)
    throw std::invalid_argument("estimate_collision_fraction: need positive sample count");
  const std::vector<Eigen::VectorXd> samples =
      uniform_polytope_samples(p, n_samples, rng);
  long colliding = 0;
  for (const auto& q : samples)
    if (in_collision(scene, q)) ++colliding;
  return static_cast<double>(colliding) / static_cast<double>(n_samples);
}

}  // namespace irisnp
