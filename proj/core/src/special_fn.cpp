#include "tmvn/special_fn.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "tmvn/error.hpp"

namespace tmvn {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Beyond this point log_phi_bar switches from erfc to the continued fraction.
constexpr double kTailSwitch = 8.0;

// Below this log-probability AS 241 is no longer trusted as a final answer.
constexpr double kQuantilePolishBelow = -20.0;

// Mills' ratio R(x) = P(Z > x) / phi(x) by backward evaluation of
// 1 / (x + 1/(x + 2/(x + 3/(x + ...)))). Converges quickly for x >= 8.
double mills_ratio_cf(double x) {
  constexpr int kTerms = 60;
  double t = x;
  for (int k = kTerms; k >= 1; --k) {
    t = x + k / t;
  }
  return 1.0 / t;
}

double poly(const double* c, int n, double r) {
  double acc = c[n - 1];
  for (int i = n - 2; i >= 0; --i) acc = acc * r + c[i];
  return acc;
}

std::string describe(double a, double b) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << a << ", " << b << "]";
  return os.str();
}

}  // namespace

Interval1D::Interval1D(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!(lower < upper)) {
    throw DegenerateInterval("interval " + describe(lower, upper) + " requires lower < upper");
  }
}

double log_phi(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double phi_bar(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_phi_bar(double x) {
  if (std::isnan(x)) return x;
  if (x == kInf) return -kInf;
  if (x <= 0.0) return std::log1p(-0.5 * std::erfc(-x * kInvSqrt2));
  if (x <= kTailSwitch) return std::log(0.5 * std::erfc(x * kInvSqrt2));
  return log_phi(x) + std::log(mills_ratio_cf(x));
}

double log1m_exp(double t) {
  if (t > -std::numbers::ln2) return std::log(-std::expm1(t));
  return std::log1p(-std::exp(t));
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double normal_quantile(double p) {
  static constexpr double a[8] = {
      3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
      1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[8] = {
      1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
      2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
      5.2264952788528545610e+3};
  static constexpr double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {
      1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9};
  static constexpr double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {
      1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15};

  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw InvalidArgument("normal_quantile requires p in [0, 1]");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, 8, r) / poly(b, 8, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = poly(c, 8, r) / poly(d, 8, r);
  } else {
    r -= 5.0;
    x = poly(e, 8, r) / poly(f, 8, r);
  }
  return q < 0.0 ? -x : x;
}

double inverse_log_phi_bar(double log_q) {
  if (log_q == -kInf) return kInf;
  if (log_q >= 0.0) return -kInf;
  double x;
  int newton_steps;
  if (log_q > -680.0) {
    x = -normal_quantile(std::exp(log_q));
    if (log_q > kQuantilePolishBelow) return x;
    newton_steps = 2;
  } else {
    // -x^2/2 - log x - log sqrt(2 pi) = log_q, fixed point on x.
    const double base = -2.0 * log_q - 2.0 * kLogSqrt2Pi;
    x = std::sqrt(base);
    for (int i = 0; i < 3; ++i) x = std::sqrt(base - 2.0 * std::log(x));
    newton_steps = 30;
  }
  // Newton on log P(Z > x) = log_q; the slope is -phi(x)/P(Z > x).
  for (int i = 0; i < newton_steps; ++i) {
    const double lpb = log_phi_bar(x);
    const double step = (lpb - log_q) * std::exp(lpb - log_phi(x));
    x += step;
    if (std::fabs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x)) break;
  }
  return x;
}

double log_prob_interval(const Interval1D& iv, double mu) {
  const double a = iv.lower() - mu;
  const double b = iv.upper() - mu;
  if (!(a < b)) {
    throw DegenerateInterval("shifted interval " + describe(a, b) + " is empty");
  }
  double result;
  if (a > 0.0) {
    const double la = log_phi_bar(a);
    result = la + log1m_exp(log_phi_bar(b) - la);
  } else if (b < 0.0) {
    const double lb = log_phi_bar(-b);
    result = lb + log1m_exp(log_phi_bar(-a) - lb);
  } else {
    // Interval straddles zero: both tails are at most 1/2.
    const double tails = phi_bar(-a) + phi_bar(b);
    if (tails < 0.5) {
      result = std::log1p(-tails);
    } else {
      result = std::log(0.5 * (std::erf(b * kInvSqrt2) + std::erf(-a * kInvSqrt2)));
    }
  }
  if (result == -kInf && std::isfinite(a) && std::isfinite(b)) {
    // Interval narrower than the resolution of the tail difference.
    result = std::log(b - a) + log_phi(0.5 * (a + b));
  }
  return result;
}

PsiRatio psi_ratio(const Interval1D& iv, double mu) {
  const double a = iv.lower() - mu;
  const double b = iv.upper() - mu;
  const double lp = log_prob_interval(iv, mu);
  if (lp == -kInf) {
    throw DegenerateInterval("interval " + describe(a, b) + " has vanishing normal mass");
  }
  const double fa = std::isfinite(a) ? std::exp(log_phi(a) - lp) : 0.0;
  const double fb = std::isfinite(b) ? std::exp(log_phi(b) - lp) : 0.0;
  const double value = fa - fb;
  const double afa = std::isfinite(a) ? a * fa : 0.0;
  const double bfb = std::isfinite(b) ? b * fb : 0.0;
  return {value, afa - bfb - value * value};
}

TruncatedDraw trunc_norm_draw(const Interval1D& iv, double mu, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("trunc_norm_inverse requires p in (0, 1)");
  }
  const double a = iv.lower() - mu;
  const double b = iv.upper() - mu;
  if (!(a < b)) {
    throw DegenerateInterval("shifted interval " + describe(a, b) + " is empty");
  }
  if (a > 0.0 || b < 0.0) {
    // One-sided tail; reflect the lower tail onto the upper one.
    const bool upper = a > 0.0;
    const double lo = upper ? a : -b;
    const double hi = upper ? b : -a;
    const double level = upper ? p : 1.0 - p;
    const double la = log_phi_bar(lo);
    const double delta = log_phi_bar(hi) - la;
    const double kept = -std::expm1(delta);
    double log_mass = la + log1m_exp(delta);
    double x = inverse_log_phi_bar(la + std::log1p(-level * kept));
    if (x < lo) x = lo;
    if (x > hi) x = hi;
    if (log_mass == -kInf && std::isfinite(hi)) {
      log_mass = std::log(hi - lo) + log_phi(0.5 * (lo + hi));
    }
    return {mu + (upper ? x : -x), log_mass};
  }
  const double log_mass = log_prob_interval(iv, mu);
  const double mass = std::exp(log_mass);
  const double below = phi_bar(-a) + p * mass;  // Phi(a) + p * mass
  double x;
  if (below <= 0.5) {
    x = normal_quantile(below);
  } else {
    x = -normal_quantile(phi_bar(b) + (1.0 - p) * mass);
  }
  if (x < a) x = a;
  if (x > b) x = b;
  return {mu + x, log_mass};
}

double trunc_norm_inverse(const Interval1D& iv, double mu, double p) {
  return trunc_norm_draw(iv, mu, p).value;
}

}  // namespace tmvn
