#include "tmvn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tmvn/error.hpp"
#include "tmvn/special_fn.hpp"
#include "tmvn/tilting.hpp"

namespace tmvn {
namespace {

// Per-coordinate pieces of the bound for one (nu_i, log sigma_i).
struct CoordTerm {
  double g;     // separable part of -log l_L
  double mean;  // E[X_i] under the product measure
};

CoordTerm coord_term(double lo, double hi, double prec_ii, double nu, double tau) {
  const double s = std::exp(tau);
  const Interval1D iv((lo - nu) / s, (hi - nu) / s);
  const double log_p = log_prob_interval(iv, 0.0);
  if (log_p == -kInf) return {kInf, nu};
  const PsiRatio r = psi_ratio(iv, 0.0);
  const double second = r.derivative + r.value * r.value;  // (a phi(a) - b phi(b)) / p
  const double g = 0.5 * prec_ii * s * s * (1.0 + r.derivative) - 0.5 * second - 0.5 - tau - log_p;
  return {g, nu + s * r.value};
}

class LowerBoundObjective {
 public:
  explicit LowerBoundObjective(const FactoredProblem& fp)
      : fp_(fp), d_(fp.m()) {
    linv_ = fp.L().triangularView<Eigen::Lower>().solve(Matrix::Identity(d_, d_));
    prec_diag_ = linv_.colwise().squaredNorm().transpose();
    log_det_half_ = fp.L().diagonal().array().log().sum();
  }

  Index dim() const { return 2 * d_; }
  const Vector& prec_diag() const { return prec_diag_; }

  // theta = (nu, log sigma); returns -log l_L.
  double value(const Vector& theta) const {
    double f = log_det_half_;
    Vector mean(d_);
    for (Index i = 0; i < d_; ++i) {
      const CoordTerm t = term(i, theta[i], theta[d_ + i]);
      if (!std::isfinite(t.g)) return kInf;
      f += t.g;
      mean[i] = t.mean;
    }
    const Vector w = linv_.triangularView<Eigen::Lower>() * mean;
    return f + 0.5 * w.squaredNorm();
  }

  // Central differences on each separable piece, exact chain rule through
  // the quadratic form.
  double value_and_gradient(const Vector& theta, Vector& grad) const {
    const double f = value(theta);
    grad.resize(2 * d_);
    if (!std::isfinite(f)) return f;
    Vector mean(d_);
    for (Index i = 0; i < d_; ++i) mean[i] = term(i, theta[i], theta[d_ + i]).mean;
    const Vector pm = linv_.transpose() * (linv_.triangularView<Eigen::Lower>() * mean);
    for (Index i = 0; i < d_; ++i) {
      for (int which = 0; which < 2; ++which) {
        const Index idx = which == 0 ? i : d_ + i;
        const double h = 1e-6 * std::max(1.0, std::fabs(theta[idx]));
        const double nu_p = which == 0 ? theta[i] + h : theta[i];
        const double nu_m = which == 0 ? theta[i] - h : theta[i];
        const double tau_p = which == 1 ? theta[d_ + i] + h : theta[d_ + i];
        const double tau_m = which == 1 ? theta[d_ + i] - h : theta[d_ + i];
        const CoordTerm up = term(i, nu_p, tau_p);
        const CoordTerm dn = term(i, nu_m, tau_m);
        if (!std::isfinite(up.g) || !std::isfinite(dn.g)) {
          grad[idx] = 0.0;
          continue;
        }
        grad[idx] = (up.g - dn.g) / (2.0 * h) + pm[i] * (up.mean - dn.mean) / (2.0 * h);
      }
    }
    return f;
  }

 private:
  CoordTerm term(Index i, double nu, double tau) const {
    return coord_term(fp_.lower()[i], fp_.upper()[i], prec_diag_[i], nu, tau);
  }

  const FactoredProblem& fp_;
  Index d_;
  Matrix linv_;
  Vector prec_diag_;
  double log_det_half_;
};

struct BfgsResult {
  Vector theta;
  double value;
  int iterations;
  bool converged;
};

BfgsResult bfgs(const LowerBoundObjective& obj, Vector theta) {
  const Index n = obj.dim();
  Vector g;
  double f = obj.value_and_gradient(theta, g);
  Matrix h = Matrix::Identity(n, n);
  int it = 0;
  bool converged = false;
  int stalls = 0;
  for (; it < 500 && std::isfinite(f); ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-7) {
      converged = true;
      break;
    }
    Vector dir = -h * g;
    if (!(g.dot(dir) < 0.0)) {
      h.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    // Keep the first trial step moderate in the scale parameters.
    const double big = dir.lpNorm<Eigen::Infinity>();
    if (big > 5.0) step = 5.0 / big;
    Vector theta_new;
    double f_new = kInf;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls, step *= 0.5) {
      theta_new = theta + step * dir;
      f_new = obj.value(theta_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * g.dot(dir)) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    Vector g_new;
    obj.value_and_gradient(theta_new, g_new);
    const Vector s = theta_new - theta;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Vector hy = h * y;
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
    }
    stalls = (f - f_new <= 1e-15 * std::max(1.0, std::fabs(f))) ? stalls + 1 : 0;
    theta = theta_new;
    f = f_new;
    g = g_new;
    if (stalls >= 3) {
      converged = true;
      break;
    }
  }
  return {theta, f, it, converged};
}

double center_of(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo + 1.0;
  if (std::isfinite(hi)) return hi - 1.0;
  return 0.0;
}

}  // namespace

double lower_bound_value(const FactoredProblem& fp, const Vector& nu, const Vector& sigma) {
  if (fp.free_dims() != 0) throw InvalidArgument("lower bound needs a full-rank square problem");
  if (nu.size() != fp.m() || sigma.size() != fp.m()) throw InvalidArgument("size mismatch");
  if (!(sigma.array() > 0.0).all()) throw InvalidArgument("scales must be positive");
  const LowerBoundObjective obj(fp);
  Vector theta(2 * fp.m());
  theta << nu, sigma.array().log().matrix();
  return -obj.value(theta);
}

LowerBoundSolution lower_bound(const TruncationProblem& problem, const FactoredProblem& fp) {
  if (problem.m() != fp.m() || problem.d() != fp.d()) {
    throw InvalidArgument("factored problem does not match the problem");
  }
  return lower_bound(fp);
}

LowerBoundSolution lower_bound(const FactoredProblem& fp) {
  if (fp.free_dims() != 0) throw InvalidArgument("lower bound needs a full-rank square problem");
  const Index d = fp.m();
  const LowerBoundObjective obj(fp);
  const Matrix sigma = fp.L() * fp.L().transpose();

  std::vector<Vector> starts;
  Vector t(2 * d);
  for (Index i = 0; i < d; ++i) {
    t[i] = 0.0;
    t[d + i] = 0.5 * std::log(sigma(i, i));
  }
  starts.push_back(t);
  for (Index i = 0; i < d; ++i) t[d + i] = -0.5 * std::log(obj.prec_diag()[i]);
  starts.push_back(t);
  for (Index i = 0; i < d; ++i) {
    t[i] = center_of(fp.lower()[i], fp.upper()[i]);
    t[d + i] = 0.0;
  }
  starts.push_back(t);

  LowerBoundSolution best;
  best.log_lower = -kInf;
  for (const Vector& s : starts) {
    if (!std::isfinite(obj.value(s))) continue;
    const BfgsResult r = bfgs(obj, s);
    if (-r.value > best.log_lower) {
      best.nu = r.theta.head(d);
      best.sigma = r.theta.tail(d).array().exp();
      best.log_lower = -r.value;
      best.iterations = r.iterations;
      best.converged = r.converged;
    }
  }
  if (best.nu.size() == 0) {
    best.nu = Vector::Zero(d);
    best.sigma = Vector::Ones(d);
  }
  return best;
}

TailProgram solve_tail_qp(const FactoredProblem& fp, double gamma, const Vector& p) {
  const Index d = fp.m();
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (p.size() != d || !(p.array() > 0.0).all() || !p.allFinite()) {
    throw InvalidArgument("tail direction p must be finite and positive");
  }
  const Matrix g = fp.L() * fp.L().transpose();
  const Vector b = gamma * p;
  const double tol = 1e-12 * std::max(1.0, b.lpNorm<Eigen::Infinity>()) *
                     std::max(1.0, g.diagonal().maxCoeff());

  // Dual: min lambda^T G lambda / 2 - b^T lambda over lambda >= 0, by the
  // Lawson-Hanson active-set scheme.
  Vector lambda = Vector::Zero(d);
  std::vector<bool> passive(static_cast<std::size_t>(d), false);
  auto solve_passive = [&](Vector& s) {
    std::vector<Index> idx;
    for (Index j = 0; j < d; ++j) if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    const auto k = static_cast<Index>(idx.size());
    Matrix gp(k, k);
    Vector bp(k);
    for (Index a = 0; a < k; ++a) {
      bp[a] = b[idx[static_cast<std::size_t>(a)]];
      for (Index c = 0; c < k; ++c) gp(a, c) = g(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
    }
    const Vector sp = gp.llt().solve(bp);
    s = Vector::Zero(d);
    for (Index a = 0; a < k; ++a) s[idx[static_cast<std::size_t>(a)]] = sp[a];
  };

  int pivots = 0;
  const int max_pivots = static_cast<int>(10 * d + 100);
  for (;;) {
    const Vector w = b - g * lambda;
    Index enter = -1;
    double best = tol;
    for (Index j = 0; j < d; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
        best = w[j];
        enter = j;
      }
    }
    if (enter < 0) break;
    if (++pivots > max_pivots) throw NoConvergence("tail QP exceeded its pivot budget");
    passive[static_cast<std::size_t>(enter)] = true;
    for (;;) {
      Vector s;
      solve_passive(s);
      bool positive = true;
      for (Index j = 0; j < d; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) positive = false;
      }
      if (positive) {
        lambda = s;
        break;
      }
      double alpha = 1.0;
      for (Index j = 0; j < d; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          alpha = std::min(alpha, lambda[j] / (lambda[j] - s[j]));
        }
      }
      lambda += alpha * (s - lambda);
      for (Index j = 0; j < d; ++j) {
        if (passive[static_cast<std::size_t>(j)] && lambda[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          lambda[j] = 0.0;
        }
      }
      if (++pivots > max_pivots) throw NoConvergence("tail QP exceeded its pivot budget");
    }
  }

  TailProgram tp;
  tp.gamma = gamma;
  tp.p = p;
  tp.lambda = lambda;
  tp.x_qp = fp.L().transpose() * lambda;
  tp.pivots = pivots;
  for (Index j = 0; j < d; ++j) {
    (lambda[j] > 0.0 ? tp.active : tp.inactive).push_back(j);
  }
  const auto d1 = static_cast<Index>(tp.active.size());
  const auto d2 = static_cast<Index>(tp.inactive.size());
  Matrix g11(d1, d1), g21(d2, d1), g22(d2, d2);
  Vector p1(d1), p2(d2);
  for (Index a = 0; a < d1; ++a) {
    p1[a] = p[tp.active[static_cast<std::size_t>(a)]];
    for (Index c = 0; c < d1; ++c) g11(a, c) = g(tp.active[static_cast<std::size_t>(a)], tp.active[static_cast<std::size_t>(c)]);
  }
  for (Index a = 0; a < d2; ++a) {
    p2[a] = p[tp.inactive[static_cast<std::size_t>(a)]];
    for (Index c = 0; c < d1; ++c) g21(a, c) = g(tp.inactive[static_cast<std::size_t>(a)], tp.active[static_cast<std::size_t>(c)]);
    for (Index c = 0; c < d2; ++c) g22(a, c) = g(tp.inactive[static_cast<std::size_t>(a)], tp.inactive[static_cast<std::size_t>(c)]);
  }
  tp.L11 = g11.llt().matrixL();
  tp.L21 = tp.L11.triangularView<Eigen::Lower>().solve(g21.transpose()).transpose();
  if (d2 > 0) {
    tp.L22 = Matrix(g22 - tp.L21 * tp.L21.transpose()).llt().matrixL();
  } else {
    tp.L22.resize(0, 0);
  }
  const Vector z1 = tp.L11.triangularView<Eigen::Lower>().solve(p1);
  tp.q = tp.L21 * z1 - p2;
  tp.objective = 0.5 * gamma * gamma * z1.squaredNorm();
  const double qtol = 1e-8 * gamma * p.norm();
  for (Index j = 0; j < d2; ++j) {
    if (std::fabs(tp.q[j]) <= qtol) tp.zero_q.push_back(j);
  }
  return tp;
}

double tail_qp_residual(const FactoredProblem& fp, const TailProgram& tp) {
  const Vector slack = fp.L() * tp.x_qp - tp.gamma * tp.p;
  double res = (tp.x_qp - fp.L().transpose() * tp.lambda).lpNorm<Eigen::Infinity>();
  res = std::max(res, std::max(0.0, -slack.minCoeff()));
  res = std::max(res, std::max(0.0, -tp.lambda.minCoeff()));
  res = std::max(res, std::fabs(tp.lambda.dot(slack)));
  return res;
}

double tail_asymptotic(const FactoredProblem& fp, double gamma, const Vector& p,
                       const TailProgram& tp, Index n, std::uint64_t seed) {
  if (tp.gamma != gamma || tp.p.size() != p.size() || tp.p != p) {
    throw InvalidArgument("tail program was solved for a different gamma or direction");
  }
  if (static_cast<Index>(tp.active.size() + tp.inactive.size()) != fp.m()) {
    throw InvalidArgument("tail program does not match the problem");
  }
  const auto d1 = static_cast<Index>(tp.active.size());
  Vector p1(d1);
  for (Index a = 0; a < d1; ++a) p1[a] = p[tp.active[static_cast<std::size_t>(a)]];
  const auto l11 = tp.L11.triangularView<Eigen::Lower>();
  const Vector z1 = l11.solve(p1);
  const Vector w = l11.transpose().solve(z1);
  double v = -0.5 * gamma * gamma * z1.squaredNorm();
  for (Index k = 0; k < d1; ++k) v -= std::log(gamma * w[k]);
  v -= 0.5 * static_cast<double>(d1) * std::log(2.0 * std::numbers::pi);
  v -= tp.L11.diagonal().array().log().sum();

  const auto nj = static_cast<Index>(tp.zero_q.size());
  if (nj == 1) {
    v += std::log(0.5);
  } else if (nj > 1) {
    const Matrix c22 = tp.L22 * tp.L22.transpose();
    Matrix cj(nj, nj);
    for (Index a = 0; a < nj; ++a) {
      for (Index b = 0; b < nj; ++b) {
        cj(a, b) = c22(tp.zero_q[static_cast<std::size_t>(a)], tp.zero_q[static_cast<std::size_t>(b)]);
      }
    }
    const auto orthant = TruncationProblem::from_covariance(cj, Vector::Zero(nj), Vector::Constant(nj, kInf));
    v += estimate(factorize(orthant), Method::Met, n, seed).log_estimate;
  }
  return v;
}

std::vector<VreRow> vre_diagnostic(const Matrix& sigma, const Vector& base,
                                   const std::vector<double>& gammas, Index n, std::uint64_t seed) {
  if (gammas.empty()) throw InvalidArgument("empty gamma grid");
  for (const double g : gammas) {
    if (!(g > 0.0)) throw InvalidArgument("tail diagnostic needs every gamma > 0");
  }
  const bool positive = (base.array() > 0.0).all();
  if (!positive) {
    const Vector star = sigma.llt().solve(base);
    if (!(star.array() > 0.0).all()) {
      throw InvalidArgument("tail direction must be positive or sigma times a positive vector");
    }
  }
  std::vector<VreRow> rows;
  for (const double gamma : gammas) {
    const Index d = base.size();
    const auto problem = TruncationProblem::from_covariance(sigma, gamma * base, Vector::Constant(d, kInf));
    const FactoredProblem fp = factorize(problem);
    const TiltingSolution tilt = solve_tilting(fp);
    const EstimateResult met = estimate(fp, Method::Met, tilt, n, seed);
    const EstimateResult sov = estimate(fp, Method::Sov, tilt, n, seed);
    VreRow row;
    row.gamma = gamma;
    row.log_psi_star = tilt.psi_star;
    row.log_met = met.log_estimate;
    row.met_rel_error = met.rel_error;
    row.log_sov = sov.log_estimate;
    row.sov_rel_error = sov.rel_error;
    row.envelope_ratio = std::exp(tilt.psi_star - met.log_estimate);
    if (positive) {
      const Vector p = fp.lower() / gamma;
      const TailProgram tp = solve_tail_qp(fp, gamma, p);
      row.log_asymptote = tail_asymptotic(fp, gamma, p, tp, n, seed);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tmvn
