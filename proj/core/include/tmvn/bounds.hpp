#pragma once

// Deterministic companions of the estimators: the variational lower bound
// from a product of independent truncated normals, the tail quadratic
// program, and the tail asymptotic it feeds.

#include <cstdint>
#include <optional>
#include <vector>

#include "tmvn/estimator.hpp"
#include "tmvn/problem.hpp"

namespace tmvn {

struct LowerBoundSolution {
  Vector nu;     // location, in the factored problem's ordering
  Vector sigma;  // positive scales
  double log_lower = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// log of the Jensen bound at (nu, sigma) for the covariance L L^T of fp and
/// its bounds. Any (nu, sigma) gives a valid lower bound on log l.
double lower_bound_value(const FactoredProblem& fp, const Vector& nu, const Vector& sigma);

/// Maximizes lower_bound_value by BFGS from a few starting points. Requires
/// m = d. The problem argument is only checked for consistency.
LowerBoundSolution lower_bound(const TruncationProblem& problem, const FactoredProblem& fp);
LowerBoundSolution lower_bound(const FactoredProblem& fp);

/// min ||x||^2 / 2 subject to L x >= gamma p, with L from fp.
struct TailProgram {
  double gamma = 0.0;
  Vector p;
  Vector x_qp;    // minimizer, in the coordinates of fp.L()
  Vector lambda;  // multipliers, x_qp = L^T lambda
  std::vector<Index> active;    // lambda > 0
  std::vector<Index> inactive;  // the rest, in increasing order
  Matrix L11;  // Cholesky factor of the active block of L L^T
  Matrix L21;
  Matrix L22;  // Cholesky factor of the inactive Schur complement
  Vector q;    // L21 L11^{-1} p1 - p2, one entry per inactive index
  std::vector<Index> zero_q;  // positions in `inactive` with q_j ~ 0
  double objective = 0.0;     // gamma^2 / 2 ||L11^{-1} p1||^2
  int pivots = 0;
};

/// Requires gamma > 0 and p > 0.
TailProgram solve_tail_qp(const FactoredProblem& fp, double gamma, const Vector& p);

/// Largest violation of stationarity, feasibility, sign and complementarity
/// for a solved program.
double tail_qp_residual(const FactoredProblem& fp, const TailProgram& tp);

/// log of the tail approximation of P(L Z >= gamma p). When some q_j vanish
/// the orthant factor is estimated with MET using n points and seed.
double tail_asymptotic(const FactoredProblem& fp, double gamma, const Vector& p,
                       const TailProgram& tp, Index n = 10000, std::uint64_t seed = 1);

struct VreRow {
  double gamma = 0.0;
  double log_psi_star = 0.0;
  double log_met = 0.0;
  double met_rel_error = 0.0;
  double log_sov = 0.0;
  double sov_rel_error = 0.0;
  /// exp(psi*) / MET estimate.
  double envelope_ratio = 0.0;
  std::optional<double> log_asymptote;
};

/// Runs the tail family l = gamma * base, u = inf over the gamma grid.
/// base must be positive, or of the form sigma l* with l* > 0; every gamma
/// must be positive.
std::vector<VreRow> vre_diagnostic(const Matrix& sigma, const Vector& base,
                                   const std::vector<double>& gammas, Index n, std::uint64_t seed);

}  // namespace tmvn
