#include "tmvn/tilting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmvn/error.hpp"
#include "tmvn/special_fn.hpp"

namespace tmvn {
namespace {

// Psi and Psi' at (x, mu) for every coordinate.
struct Ratios {
  Vector value;
  Vector deriv;
};

Ratios eval_ratios(const FactoredProblem& fp, const Vector& x, const Vector& mu) {
  Vector lo, hi;
  fp.sequential_bounds(x, lo, hi);
  const Index m = fp.m();
  Ratios r{Vector(m), Vector(m)};
  for (Index k = 0; k < m; ++k) {
    const PsiRatio pr = psi_ratio(Interval1D(lo[k], hi[k]), mu[k]);
    r.value[k] = pr.value;
    r.deriv[k] = pr.derivative;
  }
  return r;
}

Vector lower_mul(const FactoredProblem& fp, const Vector& v) {
  return fp.coupling().triangularView<Eigen::StrictlyLower>() * v;
}

Vector lower_tmul(const FactoredProblem& fp, const Vector& v) {
  return fp.coupling().triangularView<Eigen::StrictlyLower>().transpose() * v;
}

// Stacked gradient (d/dx, d/dmu).
Vector stacked_gradient(const FactoredProblem& fp, const Vector& x, const Vector& mu,
                        const Ratios& r) {
  const Index m = fp.m();
  Vector f(2 * m);
  f.head(m) = -mu + lower_tmul(fp, r.value);
  f.tail(m) = mu - x + r.value;
  return f;
}

// Hessian-vector product with the stacked (x, mu) ordering.
Vector hess_mul(const FactoredProblem& fp, const Ratios& r, const Vector& p) {
  const Index m = fp.m();
  const Vector px = p.head(m);
  const Vector pm = p.tail(m);
  const Vector cpx = lower_mul(fp, px);
  Vector out(2 * m);
  out.head(m) = lower_tmul(fp, r.deriv.cwiseProduct(cpx) + r.deriv.cwiseProduct(pm)) - pm;
  out.tail(m) = r.deriv.cwiseProduct(cpx) - px + pm + r.deriv.cwiseProduct(pm);
  return out;
}

// Hessian of x -> min_mu psi(x, mu): L~^T diag(Psi'/(1+Psi')) L~ - I.
Matrix reduced_hessian(const FactoredProblem& fp, const Ratios& r) {
  const Vector w = r.deriv.array() / (1.0 + r.deriv.array());
  const Matrix& ut = fp.unit_lower();
  Matrix s = ut.transpose() * (w.asDiagonal() * ut);
  s.diagonal().array() -= 1.0;
  return s;
}

// Newton step for the stacked system, eliminating mu through its diagonal
// block. Returns false if the reduced system cannot be factored.
bool newton_step(const FactoredProblem& fp, const Ratios& r, const Vector& f, Vector& step) {
  const Index m = fp.m();
  const Vector dinv = (1.0 + r.deriv.array()).inverse();
  const Vector fx = f.head(m);
  const Vector fm = f.tail(m);
  // B^T D^{-1} F_mu with B = diag(Psi') c - I.
  const Vector dfm = dinv.cwiseProduct(fm);
  const Vector bt = lower_tmul(fp, r.deriv.cwiseProduct(dfm)) - dfm;
  const Matrix neg_s = -reduced_hessian(fp, r);
  Eigen::LLT<Matrix> llt(neg_s);
  if (llt.info() != Eigen::Success) return false;
  const Vector px = llt.solve(fx - bt);
  const Vector bpx = r.deriv.cwiseProduct(lower_mul(fp, px)) - px;
  step.resize(2 * m);
  step.head(m) = px;
  step.tail(m) = dinv.cwiseProduct(-fm - bpx);
  return step.allFinite();
}

struct DoglegOutcome {
  Vector x;
  Vector mu;
  double grad_norm;
  int iterations;
};

DoglegOutcome dogleg(const FactoredProblem& fp, Vector x, Vector mu, const TiltingOptions& opt) {
  const Index m = fp.m();
  Ratios r = eval_ratios(fp, x, mu);
  Vector f = stacked_gradient(fp, x, mu, r);
  double merit = 0.5 * f.squaredNorm();
  double radius = opt.initial_radius;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (f.lpNorm<Eigen::Infinity>() <= opt.grad_tol) break;
    const Vector g = hess_mul(fp, r, f);  // gradient of the merit (J symmetric)
    const Vector jg = hess_mul(fp, r, g);
    const double gg = g.squaredNorm();
    const Vector cauchy = -(gg / jg.squaredNorm()) * g;
    Vector newton;
    const bool have_newton = newton_step(fp, r, f, newton);

    Vector p;
    if (have_newton && newton.norm() <= radius) {
      p = newton;
    } else if (!have_newton || cauchy.norm() >= radius) {
      p = -(radius / std::sqrt(gg)) * g;
    } else {
      // Point on the segment cauchy -> newton at distance radius.
      const Vector dir = newton - cauchy;
      const double a = dir.squaredNorm();
      const double b = 2.0 * cauchy.dot(dir);
      const double c = cauchy.squaredNorm() - radius * radius;
      const double tau = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
      p = cauchy + tau * dir;
    }

    const double pred = merit - 0.5 * (f + hess_mul(fp, r, p)).squaredNorm();
    const Vector x_new = x + p.head(m);
    const Vector mu_new = mu + p.tail(m);
    double rho = -kInf;
    Ratios r_new;
    Vector f_new;
    try {
      r_new = eval_ratios(fp, x_new, mu_new);
      f_new = stacked_gradient(fp, x_new, mu_new, r_new);
      if (f_new.allFinite() && pred > 0.0) rho = (merit - 0.5 * f_new.squaredNorm()) / pred;
    } catch (const DegenerateInterval&) {
      // Step left the region where the interval masses are representable.
    }

    const double pnorm = p.norm();
    if (rho < 0.25) {
      radius = 0.25 * pnorm;
    } else if (rho > 0.75 && pnorm >= 0.99 * radius) {
      radius *= 2.0;
    }
    if (rho > 0.1) {
      x = x_new;
      mu = mu_new;
      r = std::move(r_new);
      f = std::move(f_new);
      merit = 0.5 * f.squaredNorm();
    }
    if (radius <= 1e-15 * (1.0 + std::sqrt(x.squaredNorm() + mu.squaredNorm()))) {
      ++it;
      break;
    }
  }
  return {x, mu, f.lpNorm<Eigen::Infinity>(), it};
}

// Solves mu + Psi([lo, hi]; mu) = target for mu, i.e. the tilt whose
// truncated mean equals target. Requires lo < target < hi.
double match_tilt(double lo, double hi, double target, double mu) {
  const Interval1D iv(lo, hi);
  double below = -kInf;
  double above = kInf;
  for (int it = 0; it < 200; ++it) {
    const PsiRatio pr = psi_ratio(iv, mu);
    const double g = mu + pr.value - target;
    if (g == 0.0) return mu;
    if (g < 0.0) {
      below = mu;
    } else {
      above = mu;
    }
    double next = mu - g / std::max(1.0 + pr.derivative, 1e-300);
    if (!(next > below && next < above)) {
      if (std::isfinite(below) && std::isfinite(above)) {
        next = 0.5 * (below + above);
      } else {
        next = mu + (g < 0.0 ? 1.0 : -1.0) * std::max(1.0, 2.0 * std::fabs(mu));
      }
    }
    if (std::fabs(next - mu) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(mu))) {
      return next;
    }
    mu = next;
  }
  return mu;
}

struct Slacks {
  Vector lower;  // L~ x - l/D, +inf where l = -inf
  Vector upper;  // u/D - L~ x, +inf where u = inf
};

Slacks slacks(const FactoredProblem& fp, const Vector& x) {
  const Vector lx = fp.unit_lower().triangularView<Eigen::Lower>() * x;
  return {lx - fp.scaled_lower(), fp.scaled_upper() - lx};
}

bool strictly_inside(const Slacks& s) {
  return (s.lower.array() > 0.0).all() && (s.upper.array() > 0.0).all();
}

// Objective of the barrier problem and the tilt that attains the inner min.
struct BarrierPoint {
  Vector x;
  Vector mu;
  Slacks s;
  double value;  // psi(x, mu(x)) + t * sum log slacks
};

bool barrier_eval(const FactoredProblem& fp, const Vector& x, const Vector& mu_guess, double t,
                  BarrierPoint& out) {
  Slacks s = slacks(fp, x);
  if (!strictly_inside(s)) return false;
  Vector lo, hi;
  fp.sequential_bounds(x, lo, hi);
  Vector mu(fp.m());
  try {
    for (Index k = 0; k < fp.m(); ++k) mu[k] = match_tilt(lo[k], hi[k], x[k], mu_guess[k]);
    double v = psi(fp, x, mu);
    for (Index k = 0; k < fp.m(); ++k) {
      if (std::isfinite(s.lower[k])) v += t * std::log(s.lower[k]);
      if (std::isfinite(s.upper[k])) v += t * std::log(s.upper[k]);
    }
    if (!std::isfinite(v)) return false;
    out = {x, std::move(mu), std::move(s), v};
  } catch (const DegenerateInterval&) {
    return false;
  }
  return true;
}

Vector inverse_or_zero(const Vector& s) {
  Vector out(s.size());
  for (Index k = 0; k < s.size(); ++k) out[k] = std::isfinite(s[k]) ? 1.0 / s[k] : 0.0;
  return out;
}

}  // namespace

double psi(const FactoredProblem& fp, const Vector& x, const Vector& mu) {
  Vector lo, hi;
  fp.sequential_bounds(x, lo, hi);
  double v = -x.dot(mu) + 0.5 * mu.squaredNorm();
  for (Index k = 0; k < fp.m(); ++k) v += log_prob_interval(Interval1D(lo[k], hi[k]), mu[k]);
  return v;
}

PsiGradient grad_psi(const FactoredProblem& fp, const Vector& x, const Vector& mu) {
  const Ratios r = eval_ratios(fp, x, mu);
  return {-mu + lower_tmul(fp, r.value), mu - x + r.value};
}

PsiHessian hess_blocks(const FactoredProblem& fp, const Vector& x, const Vector& mu) {
  const Ratios r = eval_ratios(fp, x, mu);
  const Index m = fp.m();
  const Matrix c = fp.coupling().triangularView<Eigen::StrictlyLower>();
  PsiHessian h;
  h.mu_mu = Matrix::Identity(m, m);
  h.mu_mu.diagonal() += r.deriv;
  h.mu_x = r.deriv.asDiagonal() * c;
  h.mu_x.diagonal().array() -= 1.0;
  h.x_x = c.transpose() * r.deriv.asDiagonal() * c;
  return h;
}

Vector initial_point(const FactoredProblem& fp) {
  const Index m = fp.m();
  Vector x = Vector::Zero(m);
  const Matrix& c = fp.coupling();
  for (Index k = 0; k < m; ++k) {
    const double shift = c.row(k).head(k).dot(x.head(k));
    const Interval1D iv(fp.scaled_lower()[k] - shift, fp.scaled_upper()[k] - shift);
    x[k] = psi_ratio(iv, 0.0).value;
  }
  return x;
}

bool is_feasible(const FactoredProblem& fp, const Vector& x, double tol) {
  const Vector lx = fp.L().triangularView<Eigen::Lower>() * x;
  for (Index k = 0; k < fp.m(); ++k) {
    const double l = fp.lower()[k];
    const double u = fp.upper()[k];
    if (std::isfinite(l) && lx[k] < l - tol * std::max(1.0, std::fabs(l))) return false;
    if (std::isfinite(u) && lx[k] > u + tol * std::max(1.0, std::fabs(u))) return false;
  }
  return true;
}

double kkt_residual(const FactoredProblem& fp, const KktCandidate& c) {
  const PsiGradient g = grad_psi(fp, c.x, c.mu);
  const Matrix& ut = fp.unit_lower();
  const Vector stat = g.dx - ut.transpose() * c.eta_upper + ut.transpose() * c.eta_lower;
  double res = std::max(stat.lpNorm<Eigen::Infinity>(), g.dmu.lpNorm<Eigen::Infinity>());
  const Slacks s = slacks(fp, c.x);
  for (Index k = 0; k < fp.m(); ++k) {
    res = std::max({res, -c.eta_upper[k], -c.eta_lower[k]});
    if (std::isfinite(s.upper[k])) {
      res = std::max({res, -s.upper[k], std::fabs(c.eta_upper[k] * s.upper[k])});
    } else if (c.eta_upper[k] != 0.0) {
      res = kInf;
    }
    if (std::isfinite(s.lower[k])) {
      res = std::max({res, -s.lower[k], std::fabs(c.eta_lower[k] * s.lower[k])});
    } else if (c.eta_lower[k] != 0.0) {
      res = kInf;
    }
  }
  return res;
}

TiltingSolution solve_tilting_constrained(const FactoredProblem& fp, const Vector& x_start,
                                          const TiltingOptions& opt) {
  const Index m = fp.m();
  const Vector x0 = initial_point(fp);
  Vector x = x_start;
  // Pull the start toward the sequential means until it is strictly inside.
  for (double theta = 1.0; !strictly_inside(slacks(fp, x)); theta *= 0.5) {
    if (theta < 1e-12) {
      x = x0;
      break;
    }
    x = x0 + theta * (x_start - x0);
  }

  Index constraints = 0;
  for (Index k = 0; k < m; ++k) {
    constraints += std::isfinite(fp.scaled_lower()[k]) + std::isfinite(fp.scaled_upper()[k]);
  }
  constexpr double kGap = 1e-10;
  double t = constraints > 0 ? 1.0 : 0.0;

  BarrierPoint cur;
  if (!barrier_eval(fp, x, Vector::Zero(m), t, cur)) {
    throw NoConvergence("constrained tilting could not evaluate its starting point");
  }
  int iterations = 0;
  for (;;) {
    for (int inner = 0; inner < opt.max_iter; ++inner, ++iterations) {
      const Ratios r = eval_ratios(fp, cur.x, cur.mu);
      const Vector il = inverse_or_zero(cur.s.lower);
      const Vector iu = inverse_or_zero(cur.s.upper);
      const Matrix& ut = fp.unit_lower();
      const Vector grad = -cur.mu + lower_tmul(fp, r.value) + t * ut.transpose() * (il - iu);
      Matrix neg_h = -reduced_hessian(fp, r);
      const Vector curv = t * (il.cwiseAbs2() + iu.cwiseAbs2());
      neg_h.noalias() += ut.transpose() * curv.asDiagonal() * ut;
      Eigen::LDLT<Matrix> ldlt(neg_h);
      const Vector p = ldlt.solve(grad);
      const double decrement = grad.dot(p);
      if (!p.allFinite() || !(decrement > 0.0)) break;
      if (0.5 * decrement <= 1e-28 * std::max(1.0, std::fabs(cur.value))) break;
      // Close to the centre point the barrier value no longer resolves the
      // Armijo test, so full Newton steps are taken without it.
      const bool local = decrement <= 1e-10 * std::max(1.0, std::fabs(cur.value));
      // Largest step that keeps every slack positive, then backtrack.
      const Vector lp = ut.triangularView<Eigen::Lower>() * p;
      double step = 1.0;
      for (Index k = 0; k < m; ++k) {
        if (lp[k] < 0.0 && std::isfinite(cur.s.lower[k])) step = std::min(step, -0.99 * cur.s.lower[k] / lp[k]);
        if (lp[k] > 0.0 && std::isfinite(cur.s.upper[k])) step = std::min(step, 0.99 * cur.s.upper[k] / lp[k]);
      }
      BarrierPoint trial;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        if (barrier_eval(fp, cur.x + step * p, cur.mu, t, trial) &&
            (local || trial.value >= cur.value + 1e-4 * step * decrement)) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      cur = std::move(trial);
    }
    if (static_cast<double>(constraints) * t <= kGap) break;
    t *= 0.2;
    BarrierPoint rescaled;
    if (!barrier_eval(fp, cur.x, cur.mu, t, rescaled)) break;
    cur = std::move(rescaled);
  }

  TiltingSolution sol;
  sol.x_star = cur.x;
  sol.mu_star = cur.mu;
  sol.psi_star = psi(fp, cur.x, cur.mu);
  sol.eta_lower = t * inverse_or_zero(cur.s.lower);
  sol.eta_upper = t * inverse_or_zero(cur.s.upper);
  const PsiGradient g = grad_psi(fp, cur.x, cur.mu);
  sol.grad_norm = std::max(g.dx.lpNorm<Eigen::Infinity>(), g.dmu.lpNorm<Eigen::Infinity>());
  sol.iterations = iterations;
  sol.used_fallback = true;
  sol.kkt_residual = kkt_residual(fp, {sol.x_star, sol.mu_star, sol.eta_upper, sol.eta_lower});
  return sol;
}

TiltingSolution solve_tilting(const FactoredProblem& fp, const TiltingOptions& opt) {
  const Index m = fp.m();
  const Vector x0 = initial_point(fp);
  const DoglegOutcome dl = dogleg(fp, x0, Vector::Zero(m), opt);

  if (dl.grad_norm <= opt.certify_tol && is_feasible(fp, dl.x, opt.feasibility_tol)) {
    TiltingSolution sol;
    sol.x_star = dl.x;
    sol.mu_star = dl.mu;
    sol.psi_star = psi(fp, dl.x, dl.mu);
    sol.grad_norm = dl.grad_norm;
    sol.eta_upper = Vector::Zero(m);
    sol.eta_lower = Vector::Zero(m);
    sol.iterations = dl.iterations;
    sol.used_fallback = false;
    sol.kkt_residual = kkt_residual(fp, {sol.x_star, sol.mu_star, sol.eta_upper, sol.eta_lower});
    return sol;
  }

  TiltingSolution sol = solve_tilting_constrained(fp, dl.x, opt);
  sol.iterations += dl.iterations;
  if (!(sol.kkt_residual <= opt.certify_tol)) {
    throw NoConvergence("tilting stopped with gradient norm " + std::to_string(dl.grad_norm) +
                        " and constrained residual " + std::to_string(sol.kkt_residual));
  }
  return sol;
}

}  // namespace tmvn
