#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace irisnp {

// ‖Sx + s‖ ≤ radius. S must have orthonormal rows (coordinate selectors in
// practice) so that exact projection is available.
struct QuadraticInequality {
  Eigen::MatrixXd S;
  Eigen::VectorXd s;
  double radius = 0.0;
};

// Scalar smooth inequality required to satisfy value(x) ≥ 0.
struct ScalarInequality {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct NlpProblem {
  int dim = 0;
  Eigen::MatrixXd cost_hessian;  // H (PSD); cost is (x−c)ᵀH(x−c)
  Eigen::VectorXd cost_center;   // c
  Eigen::MatrixXd lin_G;         // Gx ≤ h
  Eigen::VectorXd lin_h;
  std::vector<QuadraticInequality> quad_ineqs;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eq_residual;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eq_jacobian;
  int eq_count = 0;
  std::vector<ScalarInequality> nl_ineqs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const {
    if (dim <= 0) throw std::invalid_argument("NlpProblem: empty decision vector");
    if (cost_hessian.rows() != dim || cost_hessian.cols() != dim ||
        cost_center.size() != dim)
      throw std::invalid_argument("NlpProblem: cost dimension mismatch");
    if ((cost_hessian - cost_hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("NlpProblem: cost Hessian not symmetric");
    if (lin_G.rows() != lin_h.size() || (lin_G.rows() > 0 && lin_G.cols() != dim))
      throw std::invalid_argument("NlpProblem: linear constraint dimension mismatch");
    if (lower.size() != dim || upper.size() != dim)
      throw std::invalid_argument("NlpProblem: bounds dimension mismatch");
    for (const auto& qi : quad_ineqs) {
      if (qi.S.cols() != dim || qi.S.rows() != qi.s.size())
        throw std::invalid_argument("NlpProblem: quadratic constraint dimension mismatch");
      const Eigen::MatrixXd sst = qi.S * qi.S.transpose();
      if ((sst - Eigen::MatrixXd::Identity(qi.S.rows(), qi.S.rows()))
              .cwiseAbs()
              .maxCoeff() > 1e-9)
        throw std::invalid_argument("NlpProblem: quadratic constraint rows must be orthonormal");
    }
    if (eq_count > 0 && (!eq_residual || !eq_jacobian))
      throw std::invalid_argument("NlpProblem: missing equality callbacks");
  }
};

enum class SolveStatus { FeasibleOptimum, Infeasible, IterationLimit };

struct SolveOutcome {
  SolveStatus status = SolveStatus::IterationLimit;
  Eigen::VectorXd x;
  double max_violation = std::numeric_limits<double>::infinity();
  int outer_iterations = 0;
  int inner_iterations = 0;
};

struct SolveOptions {
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  int max_outer = 40;
  int max_inner = 200;
};

namespace detail {

inline void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& m,
                         const char* what) {
  if (!m.allFinite()) {
    throw std::runtime_error(std::string("solve_local: non-finite value from ") + what);
  }
}

class NlpWorkspace {
 public:
  NlpWorkspace(const NlpProblem& p, const SolveOptions& opts)
      : p_(p), opts_(opts),
        // The cost enters the augmented Lagrangian on a normalized scale so
        // the penalty ramp behaves the same for any ellipse metric; the
        // minimizer is unchanged.
        cost_scale_(std::max(1.0, p.cost_hessian.cwiseAbs().maxCoeff())),
        hs_(p.cost_hessian / cost_scale_) {}

  // Projection onto the convex constraint set (bounds ∩ Gx≤h ∩ balls) via
  // Dykstra's alternating projections; the box alone is a single clamp.
  Eigen::VectorXd project(const Eigen::VectorXd& y) const {
    Eigen::VectorXd x = y.cwiseMax(p_.lower).cwiseMin(p_.upper);
    const int mg = static_cast<int>(p_.lin_G.rows());
    const int nb = static_cast<int>(p_.quad_ineqs.size());
    if (mg == 0 && nb == 0) return x;
    if (convex_violation(x) <= 1e-14) return x;

    const int sets = 1 + mg + nb;
    if (corr_.rows() != sets || corr_.cols() != p_.dim)
      corr_.resize(sets, p_.dim);
    corr_.setZero();
    x = y;
    z_.resize(p_.dim);
    for (int sweep = 0; sweep < 3000; ++sweep) {
      double moved = 0.0;
      for (int s = 0; s < sets; ++s) {
        z_.noalias() = x + corr_.row(s).transpose();
        if (s == 0) {
          x = z_.cwiseMax(p_.lower).cwiseMin(p_.upper);
        } else if (s <= mg) {
          const int i = s - 1;
          const double denom = p_.lin_G.row(i).squaredNorm();
          x = z_;
          if (denom > 1e-30) {
            const double excess = p_.lin_G.row(i).dot(z_) - p_.lin_h[i];
            if (excess > 0.0)
              x.noalias() -= (excess / denom) * p_.lin_G.row(i).transpose();
          }
        } else {
          const auto& ball = p_.quad_ineqs[s - 1 - mg];
          const Eigen::VectorXd w = ball.S * z_ + ball.s;
          x = z_;
          const double norm = w.norm();
          if (norm > ball.radius)
            x.noalias() += ball.S.transpose() * (w * (ball.radius / norm) - w);
        }
        // movement of the primal iterate (z_ - corr is the previous x)
        moved = std::max(moved,
                         (x - (z_ - corr_.row(s).transpose())).lpNorm<Eigen::Infinity>());
        corr_.row(s) = (z_ - x).transpose();
      }
      if (moved <= 1e-13) break;
    }
    return x;
  }

  double convex_violation(const Eigen::VectorXd& x) const {
    double v = 0.0;
    v = std::max(v, (x - p_.upper).maxCoeff());
    v = std::max(v, (p_.lower - x).maxCoeff());
    if (p_.lin_G.rows() > 0)
      v = std::max(v, (p_.lin_G * x - p_.lin_h).maxCoeff());
    for (const auto& ball : p_.quad_ineqs)
      v = std::max(v, (ball.S * x + ball.s).norm() - ball.radius);
    return v;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    if (p_.eq_count == 0) return Eigen::VectorXd();
    Eigen::VectorXd r = p_.eq_residual(x);
    check_finite(r, "equality residual");
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd j = p_.eq_jacobian(x);
    check_finite(j, "equality Jacobian");
    return j;
  }

  // Max-norm violation over every constraint in the problem.
  double total_violation(const Eigen::VectorXd& x) const {
    double v = std::max(0.0, convex_violation(x));
    if (p_.eq_count > 0) v = std::max(v, residual(x).lpNorm<Eigen::Infinity>());
    for (const auto& g : p_.nl_ineqs) {
      const double gv = g.value(x);
      if (!std::isfinite(gv))
        throw std::runtime_error("solve_local: non-finite value from inequality callback");
      v = std::max(v, -gv);
    }
    return v;
  }

  // Augmented Lagrangian value (with the normalized cost).
  double al_value(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                  const Eigen::VectorXd& mu_ineq, double rho) const {
    double f = (x - p_.cost_center).dot(hs_ * (x - p_.cost_center));
    if (p_.eq_count > 0) {
      const Eigen::VectorXd r = residual(x);
      f += lambda.dot(r) + 0.5 * rho * r.squaredNorm();
    }
    for (size_t j = 0; j < p_.nl_ineqs.size(); ++j) {
      const double g = p_.nl_ineqs[j].value(x);
      if (!std::isfinite(g))
        throw std::runtime_error("solve_local: non-finite value from inequality callback");
      const double shifted = std::max(0.0, mu_ineq[j] - rho * g);
      f += (shifted * shifted - mu_ineq[j] * mu_ineq[j]) / (2.0 * rho);
    }
    return f;
  }

  void al_gradient_model(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                         const Eigen::VectorXd& mu_ineq, double rho,
                         Eigen::VectorXd* grad, Eigen::MatrixXd* model) const {
    *grad = 2.0 * hs_ * (x - p_.cost_center);
    *model = 2.0 * hs_;
    if (p_.eq_count > 0) {
      const Eigen::VectorXd r = residual(x);
      const Eigen::MatrixXd J = jacobian(x);
      *grad += J.transpose() * (lambda + rho * r);
      *model += rho * J.transpose() * J;
    }
    for (size_t j = 0; j < p_.nl_ineqs.size(); ++j) {
      const double g = p_.nl_ineqs[j].value(x);
      const double shifted = mu_ineq[j] - rho * g;
      if (shifted > 0.0) {
        const Eigen::VectorXd gg = p_.nl_ineqs[j].gradient(x);
        check_finite(gg, "inequality gradient");
        *grad -= shifted * gg;
        *model += rho * gg * gg.transpose();
      }
    }
  }

  // Projected quasi-Newton minimization of the augmented Lagrangian over the
  // convex set: a Gauss-Newton step restricted to the free variables (bound
  // constraints at their active limit are frozen), with spectral
  // projected-gradient (Barzilai-Borwein) steps as the fallback. Returns the
  // infinity norm of the projected gradient.
  double inner_minimize(Eigen::VectorXd* x, const Eigen::VectorXd& lambda,
                        const Eigen::VectorXd& mu_ineq, double rho, double tol,
                        int* inner_count) const {
    Eigen::VectorXd grad, grad_prev, x_prev;
    Eigen::MatrixXd model;
    double pg = std::numeric_limits<double>::infinity();
    double bb_alpha = 1.0;
    double lm = 0.0;  // Levenberg-Marquardt damping, adapted across iterations
    double f_prev = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < opts_.max_inner; ++it) {
      ++(*inner_count);
      al_gradient_model(*x, lambda, mu_ineq, rho, &grad, &model);
      // Scaled projected-gradient measure: ‖x − P(x − αg)‖/α with α ≤ 1 is
      // an upper bound on the unit-step value, and keeps the projection
      // input near the feasible set even for penalty-sized gradients.
      const double alpha = 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
      pg = (*x - project(*x - alpha * grad)).lpNorm<Eigen::Infinity>() / alpha;
      if (pg <= tol) return pg;
      const double f0 = al_value(*x, lambda, mu_ineq, rho);
      // Numerical floor: the objective has stopped moving.
      if (f_prev - f0 <= 1e-13 * std::max(1.0, std::abs(f0))) {
        if (++stall >= 3) return pg;
      } else {
        stall = 0;
      }
      f_prev = f0;

      // Barzilai-Borwein scaling from the previous iterate's pair.
      if (x_prev.size() == p_.dim) {
        const Eigen::VectorXd s = *x - x_prev;
        const Eigen::VectorXd y = grad - grad_prev;
        const double sy = s.dot(y);
        bb_alpha = (sy > 1e-16) ? std::min(std::max(s.squaredNorm() / sy, 1e-8), 1e8)
                                : 1.0;
      }
      x_prev = *x;
      grad_prev = grad;

      bool accepted = false;

      // Newton attempt: bound-frozen variables are eliminated, and ε-active
      // balls/halfspaces enter the step as tangential equalities (dropped
      // again when their multiplier turns negative).
      std::vector<int> free_idx;
      for (int i = 0; i < p_.dim; ++i) {
        if (p_.upper[i] - p_.lower[i] < 1e-15) continue;
        if ((*x)[i] <= p_.lower[i] + 1e-12 && grad[i] > 0.0) continue;
        if ((*x)[i] >= p_.upper[i] - 1e-12 && grad[i] < 0.0) continue;
        free_idx.push_back(i);
      }
      if (!free_idx.empty()) {
        const int nf = static_cast<int>(free_idx.size());
        Eigen::MatrixXd bf(nf, nf);
        Eigen::VectorXd gf(nf);
        for (int a = 0; a < nf; ++a) {
          gf[a] = grad[free_idx[a]];
          for (int b = 0; b < nf; ++b) bf(a, b) = model(free_idx[a], free_idx[b]);
        }
        const double diag_scale = std::max(1.0, bf.trace() / nf);

        std::vector<Eigen::VectorXd> normals;  // in free coordinates
        for (int i = 0; i < p_.lin_G.rows(); ++i) {
          if (p_.lin_G.row(i).dot(*x) >= p_.lin_h[i] - 1e-9) {
            Eigen::VectorXd n(nf);
            for (int a = 0; a < nf; ++a) n[a] = p_.lin_G(i, free_idx[a]);
            if (n.norm() > 1e-12) normals.push_back(n / n.norm());
          }
        }
        for (const auto& ball : p_.quad_ineqs) {
          const Eigen::VectorXd w = ball.S * (*x) + ball.s;
          if (w.norm() >= ball.radius - 1e-9 && w.norm() > 1e-12) {
            const Eigen::VectorXd full = ball.S.transpose() * (w / w.norm());
            Eigen::VectorXd n(nf);
            for (int a = 0; a < nf; ++a) n[a] = full[free_idx[a]];
            if (n.norm() > 1e-12) normals.push_back(n / n.norm());
          }
        }

        auto kkt_step = [&](double damping) -> Eigen::VectorXd {
          Eigen::MatrixXd bd = bf;
          bd.diagonal().array() += (1e-10 + damping) * diag_scale;
          std::vector<bool> keep(normals.size(), true);
          Eigen::VectorXd sf;
          for (int round = 0; round <= static_cast<int>(normals.size()); ++round) {
            int na = 0;
            for (bool k : keep) na += k ? 1 : 0;
            if (na == 0) {
              sf = Eigen::LDLT<Eigen::MatrixXd>(bd).solve(-gf);
              break;
            }
            Eigen::MatrixXd kkt(nf + na, nf + na);
            kkt.setZero();
            kkt.topLeftCorner(nf, nf) = bd;
            int r = 0;
            for (size_t k = 0; k < normals.size(); ++k) {
              if (!keep[k]) continue;
              kkt.block(nf + r, 0, 1, nf) = normals[k].transpose();
              kkt.block(0, nf + r, nf, 1) = normals[k];
              ++r;
            }
            Eigen::VectorXd rhs(nf + na);
            rhs.head(nf) = -gf;
            rhs.tail(na).setZero();
            const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
            sf = sol.head(nf);
            // A negative multiplier means the constraint wants to release.
            bool dropped = false;
            r = 0;
            for (size_t k = 0; k < normals.size(); ++k) {
              if (!keep[k]) continue;
              if (sol[nf + r] < -1e-12) {
                keep[k] = false;
                dropped = true;
              }
              ++r;
            }
            if (!dropped) break;
          }
          return sf;
        };

        for (int attempt = 0; attempt < 6 && !accepted; ++attempt) {
          const Eigen::VectorXd sf = kkt_step(lm);
          if (sf.size() != nf || !sf.allFinite()) {
            lm = std::max(1e-4, lm * 10.0);
            continue;
          }
          Eigen::VectorXd step = Eigen::VectorXd::Zero(p_.dim);
          for (int a = 0; a < nf; ++a) step[free_idx[a]] = sf[a];
          const double step_norm = step.lpNorm<Eigen::Infinity>();
          if (step_norm > 1e2) step *= 1e2 / step_norm;
          // Project the full step once; the chord back to x stays feasible.
          const Eigen::VectorXd d = project(*x + step) - *x;
          const double pred = grad.dot(d);
          if (pred < 0.0 && d.lpNorm<Eigen::Infinity>() > 0.0 &&
              al_value(*x + d, lambda, mu_ineq, rho) <= f0 + 1e-4 * pred) {
            *x += d;
            accepted = true;
            lm *= 0.25;
            if (lm < 1e-12) lm = 0.0;
          } else {
            lm = std::max(1e-4, lm * 10.0);
          }
        }
      }

      if (!accepted) {
        // Spectral projected-gradient step. The trial point
        // (1−t)·x + t·P(x − αg) stays feasible by convexity, so the line
        // search needs no further projections.
        const Eigen::VectorXd d = project(*x - bb_alpha * grad) - *x;
        const double pred = grad.dot(d);
        if (pred >= 0.0 || d.lpNorm<Eigen::Infinity>() == 0.0) return pg;
        double t = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
          if (al_value(*x + t * d, lambda, mu_ineq, rho) <= f0 + 1e-4 * t * pred) {
            accepted = true;
            break;
          }
          t *= 0.5;
        }
        if (!accepted) return pg;
        *x += t * d;
      }
    }
    return pg;
  }

  // Gauss-Newton polish of the equality residual inside the convex set.
  void polish(Eigen::VectorXd* x) const {
    if (p_.eq_count == 0) return;
    for (int it = 0; it < 10; ++it) {
      const Eigen::VectorXd r = residual(*x);
      if (r.lpNorm<Eigen::Infinity>() <= 1e-11) return;
      const Eigen::MatrixXd J = jacobian(*x);
      Eigen::MatrixXd JJt = J * J.transpose();
      JJt.diagonal().array() += 1e-14;
      const Eigen::VectorXd step = -J.transpose() * JJt.ldlt().solve(r);
      const Eigen::VectorXd cand = project(*x + step);
      if (residual(cand).lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
        *x = cand;
      } else {
        return;
      }
    }
  }

 private:
  const NlpProblem& p_;
  SolveOptions opts_;
  double cost_scale_;
  Eigen::MatrixXd hs_;
  mutable Eigen::MatrixXd corr_;  // Dykstra corrections scratch
  mutable Eigen::VectorXd z_;
};

}  // namespace detail

// Augmented-Lagrangian local solver. Convex constraints (bounds, linear
// rows, balls) are enforced by projection at every iterate; the nonlinear
// equalities and scalar inequalities are handled by multiplier plus penalty
// updates (×10 growth from 10, capped at 1e8).
inline SolveOutcome solve_local(const NlpProblem& problem, Eigen::VectorXd x0,
                                const SolveOptions& opts = {}) {
  problem.validate();
  if (x0.size() != problem.dim)
    throw std::invalid_argument("solve_local: initial guess dimension mismatch");
  detail::NlpWorkspace ws(problem, opts);

  constexpr double kPenaltyCap = 1e8;
  Eigen::VectorXd x = ws.project(x0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(problem.eq_count);
  Eigen::VectorXd mu_ineq = Eigen::VectorXd::Zero(problem.nl_ineqs.size());
  double rho = 10.0;
  double prev_violation = std::numeric_limits<double>::infinity();

  SolveOutcome out;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    out.outer_iterations = outer + 1;
    const bool pure_convex = problem.eq_count == 0 && problem.nl_ineqs.empty();
    const double inner_tol =
        pure_convex ? opts.opt_tol
                    : std::max(opts.opt_tol, 1e-2 * std::pow(0.1, outer));
    const double pg =
        ws.inner_minimize(&x, lambda, mu_ineq, rho, inner_tol, &out.inner_iterations);
    double violation = ws.total_violation(x);

    if (violation <= opts.feas_tol && pg <= opts.opt_tol) {
      ws.polish(&x);
      out.status = SolveStatus::FeasibleOptimum;
      out.x = x;
      out.max_violation = ws.total_violation(x);
      return out;
    }

    if (violation <= 0.25 * prev_violation) {
      prev_violation = violation;
    } else {
      if (rho >= kPenaltyCap && violation > opts.feas_tol) {
        out.status = SolveStatus::Infeasible;
        out.x = x;
        out.max_violation = violation;
        return out;
      }
      // Fully stagnant large violations ramp the penalty faster; the cap is
      // still what declares infeasibility.
      const bool stagnant =
          violation > 100.0 * opts.feas_tol && violation > 0.99 * prev_violation;
      rho = std::min(rho * (stagnant ? 1000.0 : 10.0), kPenaltyCap);
    }
    if (problem.eq_count > 0) lambda += rho * ws.residual(x);
    for (size_t j = 0; j < problem.nl_ineqs.size(); ++j)
      mu_ineq[j] = std::max(0.0, mu_ineq[j] - rho * problem.nl_ineqs[j].value(x));
  }
  out.status = SolveStatus::IterationLimit;
  out.x = x;
  out.max_violation = ws.total_violation(x);
  return out;
}

}  // namespace irisnp
