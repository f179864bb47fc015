#pragma once

// Minimax exponential tilting. psi(x; mu) is the log likelihood ratio of
// the sequential tilted proposal at a point x; its saddle point gives the
// tilt mu* and the envelope constant exp(psi*).

#include "tmvn/problem.hpp"

namespace tmvn {

struct TiltingSolution {
  Vector x_star;
  Vector mu_star;
  double psi_star = 0.0;
  double grad_norm = 0.0;  // max-norm of the full gradient at the solution
  Vector eta_upper;        // multipliers of L x <= u (scaled rows)
  Vector eta_lower;        // multipliers of L x >= l
  int iterations = 0;
  bool used_fallback = false;
  double kkt_residual = 0.0;
};

struct TiltingOptions {
  int max_iter = 200;
  double grad_tol = 1e-10;
  /// A result is accepted only if its residual ends below this.
  double certify_tol = 1e-8;
  double feasibility_tol = 1e-9;
  double initial_radius = 1.0;
};

double psi(const FactoredProblem& fp, const Vector& x, const Vector& mu);

struct PsiGradient {
  Vector dx;   // -mu + (L~ - I)^T Psi
  Vector dmu;  // mu - x + Psi
};

PsiGradient grad_psi(const FactoredProblem& fp, const Vector& x, const Vector& mu);

/// Second derivatives. mu_x has rows indexed by mu and columns by x, so the
/// full Hessian in (x, mu) order is [[x_x, mu_x^T], [mu_x, mu_mu]].
struct PsiHessian {
  Matrix mu_mu;  // I + diag(Psi')
  Matrix mu_x;   // diag(Psi') (L~ - I) - I
  Matrix x_x;    // (L~ - I)^T diag(Psi') (L~ - I)
};

PsiHessian hess_blocks(const FactoredProblem& fp, const Vector& x, const Vector& mu);

/// Point with multipliers for the constrained characterization.
struct KktCandidate {
  Vector x;
  Vector mu;
  Vector eta_upper;
  Vector eta_lower;
};

/// Max-norm over stationarity, primal and dual feasibility and
/// complementary slackness. Constraints are taken in the diagonally scaled
/// form L~ x <= u / D, L~ x >= l / D.
double kkt_residual(const FactoredProblem& fp, const KktCandidate& candidate);

/// Dogleg solve of grad psi = 0 with the constrained fallback if the root
/// leaves the feasible set. Throws NoConvergence if neither certifies.
TiltingSolution solve_tilting(const FactoredProblem& fp, const TiltingOptions& options = {});

/// Log-barrier Newton on max_x min_mu psi over l <= L x <= u, started from
/// x_start (pulled into the interior if needed). Exposed for testing.
TiltingSolution solve_tilting_constrained(const FactoredProblem& fp, const Vector& x_start,
                                          const TiltingOptions& options = {});

/// Sequential truncated means: the starting point of the dogleg iteration.
Vector initial_point(const FactoredProblem& fp);

/// True if l <= L x <= u within the feasibility tolerance.
bool is_feasible(const FactoredProblem& fp, const Vector& x, double tol = 1e-9);

}  // namespace tmvn
