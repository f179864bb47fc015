#pragma once

// Scalar kernels for the standard normal law. Everything here works on the
// log scale where it matters, so that probabilities far below the smallest
// double (1e-300 and beyond) still carry full relative precision.

#include <limits>

namespace tmvn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lower, upper] on the extended real line; lower < upper.
/// Either endpoint may be infinite.
class Interval1D {
 public:
  /// Throws DegenerateInterval unless lower < upper.
  Interval1D(double lower, double upper);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

/// log of the standard normal density.
double log_phi(double x);

/// Upper tail P(Z > x), no log. Underflows to 0 near x = 38.
double phi_bar(double x);

/// log P(Z > x). Full relative precision for |x| <= 37; beyond that the
/// continued fraction for Mills' ratio keeps it finite up to |x| ~ 1e150.
double log_phi_bar(double x);

/// Standard normal quantile (Wichura's AS 241), p in (0, 1).
double normal_quantile(double p);

/// Solves log P(Z > x) = log_q for x, log_q <= log(1/2). Works for log_q far
/// below the double underflow threshold.
double inverse_log_phi_bar(double log_q);

/// log P(a - mu <= Z <= b - mu) for iv = [a, b], computed without
/// subtractive cancellation in either tail.
double log_prob_interval(const Interval1D& iv, double mu);

/// Mean and variance-minus-one of N(mu, 1) truncated to iv, with the mean
/// reported relative to mu: value = E[Z | a-mu <= Z <= b-mu] and
/// derivative = d(value)/d(mu) = Var[...] - 1.
struct PsiRatio {
  double value;
  double derivative;
};

PsiRatio psi_ratio(const Interval1D& iv, double mu);

/// Inverse CDF of N(mu, 1) truncated to iv at level p in (0, 1). The result
/// lies in [a, b]; deep-tail intervals are handled on the log scale.
double trunc_norm_inverse(const Interval1D& iv, double mu, double p);

/// Inverse-CDF draw together with log P(iv) under N(mu, 1); the pair shares
/// all tail evaluations, which is what the sequential samplers need.
struct TruncatedDraw {
  double value;
  double log_mass;
};

TruncatedDraw trunc_norm_draw(const Interval1D& iv, double mu, double p);

/// log(exp(a) + exp(b)) without overflow; -inf inputs are allowed.
double log_add_exp(double a, double b);

/// log(1 - exp(t)) for t <= 0.
double log1m_exp(double t);

}  // namespace tmvn
