#pragma once

// The truncation problem P(l <= A Z <= u), Z ~ N(0, I_d), and its
// factored form. Every estimator and sampler in the library works on a
// FactoredProblem.

#include <vector>

#include <Eigen/Dense>

namespace tmvn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// perm[k] is the original row index placed at position k.
using Permutation = std::vector<Index>;

class TruncationProblem {
 public:
  /// Constraint form: m x d matrix A with m <= d.
  static TruncationProblem from_constraints(Matrix a, Vector lower, Vector upper);

  /// Covariance form: X ~ N(0, sigma) truncated to [lower, upper]. Throws
  /// NotPositiveDefinite if sigma is asymmetric or fails Cholesky.
  static TruncationProblem from_covariance(Matrix sigma, Vector lower, Vector upper);

  bool covariance_input() const noexcept { return covariance_input_; }

  /// A for the constraint form, sigma for the covariance form.
  const Matrix& matrix() const noexcept { return matrix_; }

  /// sigma, or A A^T for the constraint form.
  Matrix covariance() const;

  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  Index m() const noexcept { return lower_.size(); }
  Index d() const noexcept { return covariance_input_ ? matrix_.rows() : matrix_.cols(); }

 private:
  TruncationProblem(Matrix matrix, Vector lower, Vector upper, bool covariance_input);

  Matrix matrix_;
  Vector lower_;
  Vector upper_;
  bool covariance_input_;
};

/// Permuted and factored problem: P A = L Q_{1..m}^T (or P sigma P^T = L L^T
/// with Q = I). Immutable once built.
class FactoredProblem {
 public:
  /// Validates shapes, the positive diagonal of L and orthonormality is
  /// trusted to the caller. lower/upper are already permuted.
  FactoredProblem(Matrix l, Matrix q, Permutation perm, Vector lower, Vector upper,
                  bool covariance_input);

  const Matrix& L() const noexcept { return l_; }
  const Matrix& Q() const noexcept { return q_; }
  const Permutation& permutation() const noexcept { return perm_; }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  /// D = diag(L).
  const Vector& diag() const noexcept { return diag_; }
  /// D^{-1} L, unit lower triangular.
  const Matrix& unit_lower() const noexcept { return unit_lower_; }
  /// D^{-1} L - I; only the strictly lower part is nonzero.
  const Matrix& coupling() const noexcept { return coupling_; }
  /// Same values in row-major storage, for row-wise sweeps.
  const RowMatrix& coupling_rows() const noexcept { return coupling_rows_; }
  /// l / D and u / D.
  const Vector& scaled_lower() const noexcept { return scaled_lower_; }
  const Vector& scaled_upper() const noexcept { return scaled_upper_; }

  bool covariance_input() const noexcept { return covariance_input_; }
  Index m() const noexcept { return l_.rows(); }
  Index d() const noexcept { return q_.rows(); }
  Index free_dims() const noexcept { return d() - m(); }

  /// Per-coordinate sequential bounds (l~_k, u~_k) at x, i.e.
  /// l/D - (L~ - I) x and u/D - (L~ - I) x.
  void sequential_bounds(const Vector& x, Vector& lo, Vector& hi) const;

 private:
  Matrix l_;
  Matrix q_;
  Permutation perm_;
  Vector lower_;
  Vector upper_;
  Vector diag_;
  Matrix unit_lower_;
  Matrix coupling_;
  RowMatrix coupling_rows_;
  Vector scaled_lower_;
  Vector scaled_upper_;
  bool covariance_input_;
};

/// Greedy ordering: at each step pick the remaining variable whose
/// conditional interval probability is smallest, conditioning earlier
/// variables on their truncated means. Ties go to the lowest original index.
Permutation reorder_heuristic(const TruncationProblem& problem);

FactoredProblem factorize(const TruncationProblem& problem, bool reorder = true);

/// Relative rank tolerance for Cholesky pivots.
inline constexpr double kRankTolerance = 1e-12;

}  // namespace tmvn
