#include "rareis/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rareis/errors.hpp"

namespace rareis::numerics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln √(2π)

// Beyond these arguments Boost's linear-domain Bessel values risk overflow
// or underflow; the log-domain paths switch to asymptotic expansions.
constexpr double kBesselAsymptoticCrossover = 500.0;

// ln of the Hankel-type large-argument series Σ s^k a_k(ν)/x^k, where
// a_k(ν) = Π_{j=1..k} (4ν² − (2j−1)²) / (k! 8^k). sign = -1 gives I_ν, +1 K_ν.
double log_hankel_series(double nu, double x, double sign) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * x) * sign;
    if (std::abs(next) >= std::abs(term) && k > 1) break;  // asymptotic series turns
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::log(sum);
}

// Mills ratio R(z) = (1 − Φ(z)) / φ(z) for z > 0 by backward recurrence of
// the Laplace continued fraction 1/(z + 1/(z + 2/(z + 3/(z + ...)))).
double mills_ratio(double z) {
  double tail = 0.0;
  for (int k = 80; k >= 1; --k) tail = k / (z + tail);
  return 1.0 / (z + tail);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  return boost::math::lgamma(x);
}

double reg_lower_incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("reg_lower_incomplete_gamma: shape must be positive");
  }
  if (!(x >= 0.0)) throw DomainError("reg_lower_incomplete_gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(a, x);
}

double reg_lower_incomplete_gamma_inv(double a, double p) {
  if (!(a > 0.0)) throw DomainError("reg_lower_incomplete_gamma_inv: shape must be positive");
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("reg_lower_incomplete_gamma_inv: probability must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  return boost::math::gamma_p_inv(a, p);
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_std_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio(-x));
}

double std_normal_cdf_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_cdf_inv: probability must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double std_normal_cdf_inv_log(double log_p) {
  if (!(log_p < 0.0)) throw DomainError("std_normal_cdf_inv_log: log probability must be negative");
  if (log_p > -600.0) return std_normal_cdf_inv(std::exp(log_p));
  // ln Φ(x) ≈ −x²/2 − ln(−x) − ln√(2π) for x → −∞; seed, then Newton polish.
  const double y = -log_p;
  double x = -std::sqrt(2.0 * y - std::log(4.0 * kPi * y));
  for (int it = 0; it < 50; ++it) {
    const double g = log_std_normal_cdf(x) - log_p;
    // d/dx ln Φ(x) = φ(x)/Φ(x) = 1/R(−x)
    const double step = g * mills_ratio(-x);
    x -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
  }
  return x;
}

double bessel_i(double nu, double x) {
  if (!(nu >= 0.0)) throw DomainError("bessel_i: order must be nonnegative");
  if (!(x >= 0.0)) throw DomainError("bessel_i: argument must be nonnegative");
  try {
    return boost::math::cyl_bessel_i(nu, x);
  } catch (const std::overflow_error&) {
    throw NumericalError("bessel_i: result overflows at x = " + std::to_string(x));
  }
}

double bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
  try {
    return boost::math::cyl_bessel_k(nu, x);
  } catch (const std::overflow_error&) {
    throw NumericalError("bessel_k: result overflows at x = " + std::to_string(x));
  }
}

double log_bessel_i(double nu, double x) {
  if (!(nu > -1.0)) throw DomainError("log_bessel_i: order must exceed -1");
  if (!(x > 0.0)) throw DomainError("log_bessel_i: argument must be positive");
  if (x < 1.0) {
    // Power series, every term positive for ν > −1.
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 100 && term > 1e-18 * sum; ++k) {
      term *= q / (k * (k + nu));
      sum += term;
    }
    return nu * std::log(0.5 * x) - boost::math::lgamma(nu + 1.0) + std::log(sum);
  }
  if (x <= kBesselAsymptoticCrossover) return std::log(boost::math::cyl_bessel_i(nu, x));
  return x - 0.5 * std::log(2.0 * kPi * x) + log_hankel_series(nu, x, -1.0);
}

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("log_bessel_k: argument must be positive");
  const double a = std::abs(nu);
  if (x > kBesselAsymptoticCrossover) {
    return 0.5 * std::log(kPi / (2.0 * x)) - x + log_hankel_series(a, x, 1.0);
  }
  double k = std::numeric_limits<double>::infinity();
  try {
    k = boost::math::cyl_bessel_k(a, x);
  } catch (const std::overflow_error&) {
  }
  if (std::isfinite(k) && k > 0.0) return std::log(k);
  // Only reachable for tiny x with a > 0: K_ν(x) ~ Γ(ν)/2 · (2/x)^ν.
  return boost::math::lgamma(a) - std::log(2.0) + a * std::log(2.0 / x);
}

RootResult find_root_bracketed(const ScalarFunction& f, double lo, double hi, double tol,
                               int max_iterations) {
  if (!(tol > 0.0)) throw DomainError("find_root_bracketed: tolerance must be positive");
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return {a, fa, 0};
  if (fb == 0.0) return {b, fb, 0};
  if (std::signbit(fa) == std::signbit(fb)) {
    throw DomainError("find_root_bracketed: no sign change on [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int it = 1; it <= max_iterations; ++it) {
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double half = 0.5 * (c - b);
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    if (std::abs(fb) <= tol || std::abs(half) <= tol1) return {b, fb, it};
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * half * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, half);
    fb = f(b);
    if (std::isnan(fb)) throw NumericalError("find_root_bracketed: function returned NaN");
  }
  throw ConvergenceError("find_root_bracketed: no convergence within " +
                             std::to_string(max_iterations) + " iterations",
                         b);
}

namespace {

template <class Node>
QuadratureResult double_exponential(const ScalarFunction& f, double t_max,
                                    const QuadratureOptions& opts, Node node) {
  std::size_t evaluations = 0;
  auto term = [&](double t) {
    const auto [x, w] = node(t);
    if (w == 0.0 || !std::isfinite(x)) return 0.0;
    const double fx = f(x);
    ++evaluations;
    if (!std::isfinite(fx)) {
      throw NumericalError("quadrature: integrand not finite at x = " + std::to_string(x));
    }
    return fx * w;
  };

  CompensatedSum sum;
  double h = 1.0;
  const int k_max = static_cast<int>(std::floor(t_max));
  for (int k = -k_max; k <= k_max; ++k) sum.add(term(static_cast<double>(k)));
  double estimate = h * sum.value();
  double previous = estimate;
  double diff = std::numeric_limits<double>::infinity();

  for (int level = 1; level <= opts.max_level; ++level) {
    h *= 0.5;
    const int n = static_cast<int>(std::floor(t_max / h));
    for (int k = -n; k <= n; ++k) {
      if ((k & 1) == 0) continue;
      sum.add(term(k * h));
    }
    estimate = h * sum.value();
    diff = std::abs(estimate - previous);
    previous = estimate;
    if (level >= opts.min_level &&
        diff <= std::max(opts.abs_tol, opts.rel_tol * std::abs(estimate))) {
      return {estimate, diff, std::max<std::size_t>(evaluations, 1)};
    }
  }
  throw ConvergenceError("quadrature: tolerance not reached (last change " + std::to_string(diff) +
                             ")",
                         estimate);
}

}  // namespace

QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double tol) {
  QuadratureOptions opts;
  opts.abs_tol = tol;
  return integrate_semi_infinite(f, opts);
}

QuadratureResult integrate_semi_infinite(const ScalarFunction& f, const QuadratureOptions& opts) {
  if (!(opts.abs_tol > 0.0 || opts.rel_tol > 0.0)) {
    throw DomainError("integrate_semi_infinite: tolerance must be positive");
  }
  struct Point {
    double x;
    double w;
  };
  return double_exponential(f, 6.5, opts, [](double t) {
    const double u = 0.5 * kPi * std::sinh(t);
    const double x = std::exp(u);
    return Point{x, x * 0.5 * kPi * std::cosh(t)};
  });
}

QuadratureResult integrate_interval(const ScalarFunction& f, double a, double b,
                                    const QuadratureOptions& opts) {
  if (!(opts.abs_tol > 0.0 || opts.rel_tol > 0.0)) {
    throw DomainError("integrate_interval: tolerance must be positive");
  }
  if (!(b >= a)) throw DomainError("integrate_interval: requires a <= b");
  if (a == b) return {0.0, 0.0, 1};
  const double half_width = 0.5 * (b - a);
  struct Point {
    double x;
    double w;
  };
  return double_exponential(f, 4.5, opts, [=](double t) {
    const double u = 0.5 * kPi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    // distance to the nearer endpoint, free of cancellation
    const double gap = (b - a) * e / (1.0 + e);
    const double x = (t < 0.0) ? a + gap : b - gap;
    const double sech = 2.0 * std::exp(-std::abs(u)) / (1.0 + e);
    const double w = half_width * 0.5 * kPi * std::cosh(t) * sech * sech;
    if (x <= a || x >= b) return Point{x, 0.0};
    return Point{x, w};
  });
}

}  // namespace rareis::numerics
