#include "tmvn/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "tmvn/error.hpp"
#include "tmvn/special_fn.hpp"

namespace tmvn {
namespace {

void check_bounds(const Vector& lower, const Vector& upper, Index m) {
  if (lower.size() != m || upper.size() != m) {
    throw InvalidArgument("bounds have length " + std::to_string(lower.size()) + " and " +
                          std::to_string(upper.size()) + ", expected " + std::to_string(m));
  }
  for (Index i = 0; i < m; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i])) {
      throw InvalidArgument("bound " + std::to_string(i) + " is NaN");
    }
    if (lower[i] == kInf || upper[i] == -kInf) {
      throw DegenerateInterval("bound " + std::to_string(i) + " leaves an empty interval");
    }
    static_cast<void>(Interval1D(lower[i], upper[i]));
  }
}

double max_scale(const Matrix& sigma) {
  double s = 0.0;
  for (Index i = 0; i < sigma.rows(); ++i) s = std::max(s, std::sqrt(std::max(sigma(i, i), 0.0)));
  return s;
}

[[noreturn]] void throw_pivot(bool covariance, Index k, double pivot) {
  const std::string msg =
      "pivot " + std::to_string(k) + " is " + std::to_string(pivot) + " (below rank tolerance)";
  if (covariance) throw NotPositiveDefinite(msg);
  throw RankDeficient(msg);
}

// Lower Cholesky factor with the relative pivot test.
Matrix cholesky(const Matrix& s, bool covariance) {
  const Index n = s.rows();
  const double tol = kRankTolerance * max_scale(s);
  Matrix l = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const double d2 = s(k, k) - l.row(k).head(k).squaredNorm();
    if (!(d2 > 0.0) || std::sqrt(d2) <= tol) throw_pivot(covariance, k, d2 > 0 ? std::sqrt(d2) : d2);
    l(k, k) = std::sqrt(d2);
    for (Index i = k + 1; i < n; ++i) {
      l(i, k) = (s(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / l(k, k);
    }
  }
  return l;
}

Matrix permute_rows(const Matrix& a, const Permutation& perm) {
  Matrix out(a.rows(), a.cols());
  for (Index k = 0; k < a.rows(); ++k) out.row(k) = a.row(perm[static_cast<std::size_t>(k)]);
  return out;
}

Vector permute(const Vector& v, const Permutation& perm) {
  Vector out(v.size());
  for (Index k = 0; k < v.size(); ++k) out[k] = v[perm[static_cast<std::size_t>(k)]];
  return out;
}

}  // namespace

TruncationProblem::TruncationProblem(Matrix matrix, Vector lower, Vector upper,
                                     bool covariance_input)
    : matrix_(std::move(matrix)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      covariance_input_(covariance_input) {}

TruncationProblem TruncationProblem::from_constraints(Matrix a, Vector lower, Vector upper) {
  if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument("constraint matrix is empty");
  if (!a.allFinite()) throw InvalidArgument("constraint matrix has non-finite entries");
  if (a.rows() > a.cols()) {
    throw RankDeficient("constraint matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + "; needs m <= d");
  }
  check_bounds(lower, upper, a.rows());
  return TruncationProblem(std::move(a), std::move(lower), std::move(upper), false);
}

TruncationProblem TruncationProblem::from_covariance(Matrix sigma, Vector lower, Vector upper) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) {
    throw InvalidArgument("covariance must be square and nonempty");
  }
  if (!sigma.allFinite()) throw InvalidArgument("covariance has non-finite entries");
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NotPositiveDefinite("covariance is not symmetric");
  }
  check_bounds(lower, upper, sigma.rows());
  cholesky(sigma, true);
  return TruncationProblem(std::move(sigma), std::move(lower), std::move(upper), true);
}

Matrix TruncationProblem::covariance() const {
  if (covariance_input_) return matrix_;
  return matrix_ * matrix_.transpose();
}

FactoredProblem::FactoredProblem(Matrix l, Matrix q, Permutation perm, Vector lower,
                                 Vector upper, bool covariance_input)
    : l_(std::move(l)),
      q_(std::move(q)),
      perm_(std::move(perm)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      covariance_input_(covariance_input) {
  const Index m = l_.rows();
  if (l_.cols() != m || q_.rows() != q_.cols() || q_.rows() < m ||
      static_cast<Index>(perm_.size()) != m) {
    throw InvalidArgument("inconsistent factor shapes");
  }
  check_bounds(lower_, upper_, m);
  diag_ = l_.diagonal();
  if (!(diag_.array() > 0.0).all()) throw RankDeficient("factor has a non-positive diagonal");
  unit_lower_ = diag_.asDiagonal().inverse() * l_.triangularView<Eigen::Lower>().toDenseMatrix();
  coupling_ = unit_lower_;
  coupling_.diagonal().setZero();
  coupling_rows_ = coupling_;
  scaled_lower_ = lower_.cwiseQuotient(diag_);
  scaled_upper_ = upper_.cwiseQuotient(diag_);
}

void FactoredProblem::sequential_bounds(const Vector& x, Vector& lo, Vector& hi) const {
  const Vector shift = coupling_.triangularView<Eigen::StrictlyLower>() * x;
  lo = scaled_lower_ - shift;
  hi = scaled_upper_ - shift;
}

Permutation reorder_heuristic(const TruncationProblem& problem) {
  Matrix s = problem.covariance();
  Vector lo = problem.lower();
  Vector hi = problem.upper();
  const Index n = s.rows();
  Permutation idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  const double tol = kRankTolerance * max_scale(s);

  Matrix l = Matrix::Zero(n, n);
  Vector y = Vector::Zero(n);
  for (Index k = 0; k < n; ++k) {
    Index best = -1;
    double best_val = kInf;
    double best_pivot = 0.0;
    for (Index j = k; j < n; ++j) {
      const double d2 = s(j, j) - l.row(j).head(k).squaredNorm();
      if (!(d2 > 0.0) || std::sqrt(d2) <= tol) continue;
      const double piv = std::sqrt(d2);
      const double cond = l.row(j).head(k).dot(y.head(k));
      const double val = log_prob_interval(Interval1D((lo[j] - cond) / piv, (hi[j] - cond) / piv), 0.0);
      const bool better =
          best < 0 || val < best_val ||
          (val == best_val && idx[static_cast<std::size_t>(j)] < idx[static_cast<std::size_t>(best)]);
      if (better) {
        best = j;
        best_val = val;
        best_pivot = piv;
      }
    }
    if (best < 0) {
      const std::string msg = "no positive pivot left at reordering step " + std::to_string(k);
      if (problem.covariance_input()) throw NotPositiveDefinite(msg);
      throw RankDeficient(msg);
    }
    if (best != k) {
      s.row(k).swap(s.row(best));
      s.col(k).swap(s.col(best));
      l.row(k).swap(l.row(best));
      std::swap(lo[k], lo[best]);
      std::swap(hi[k], hi[best]);
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(best)]);
    }
    l(k, k) = best_pivot;
    for (Index i = k + 1; i < n; ++i) {
      l(i, k) = (s(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / best_pivot;
    }
    const double cond = l.row(k).head(k).dot(y.head(k));
    const Interval1D iv((lo[k] - cond) / best_pivot, (hi[k] - cond) / best_pivot);
    y[k] = psi_ratio(iv, 0.0).value;
  }
  return idx;
}

FactoredProblem factorize(const TruncationProblem& problem, bool reorder) {
  const Index m = problem.m();
  const Index d = problem.d();
  Permutation perm(static_cast<std::size_t>(m));
  if (reorder) {
    perm = reorder_heuristic(problem);
  } else {
    std::iota(perm.begin(), perm.end(), Index{0});
  }
  Vector lower = permute(problem.lower(), perm);
  Vector upper = permute(problem.upper(), perm);

  if (problem.covariance_input()) {
    const Matrix& sigma = problem.matrix();
    Matrix ps(m, m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        ps(i, j) = sigma(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
      }
    }
    return FactoredProblem(cholesky(ps, true), Matrix::Identity(m, m), std::move(perm),
                           std::move(lower), std::move(upper), true);
  }

  // (P A)^T = Q R, so P A = R^T Q^T with L = R_{1..m}^T.
  const Matrix pa = permute_rows(problem.matrix(), perm);
  Eigen::HouseholderQR<Matrix> qr(pa.transpose());
  Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const double tol = kRankTolerance * pa.rowwise().norm().maxCoeff();
  for (Index k = 0; k < m; ++k) {
    if (std::fabs(r(k, k)) <= tol) throw_pivot(false, k, std::fabs(r(k, k)));
    if (r(k, k) < 0.0) {
      r.row(k) *= -1.0;
      q.col(k) *= -1.0;
    }
  }
  Matrix l = r.transpose();
  return FactoredProblem(std::move(l), std::move(q), std::move(perm), std::move(lower),
                         std::move(upper), false);
}

}  // namespace tmvn
