#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace rareis::numerics {

using ScalarFunction = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Convergence controls for the double-exponential quadrature rules. A level
/// is accepted when successive estimates differ by at most
/// max(abs_tol, rel_tol * |estimate|).
struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int min_level = 4;
  int max_level = 12;
};

// --- special functions -----------------------------------------------------

/// ln Γ(x) for x > 0.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_incomplete_gamma(double a, double x);

/// Inverse of P(a, ·): the x with P(a, x) = p, for p in [0, 1).
double reg_lower_incomplete_gamma_inv(double a, double p);

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// ln Φ(x), accurate far into the left tail (x ≈ -1e8 and beyond).
double log_std_normal_cdf(double x);

/// Φ⁻¹(p) for p in (0, 1).
double std_normal_cdf_inv(double p);

/// Φ⁻¹(exp(log_p)) for log_p < 0; handles probabilities far below the
/// smallest representable double.
double std_normal_cdf_inv_log(double log_p);

/// Modified Bessel function of the first kind, I_ν(x), ν ≥ 0, x ≥ 0.
double bessel_i(double nu, double x);

/// Modified Bessel function of the second kind, K_ν(x), x > 0.
double bessel_k(double nu, double x);

/// ln I_ν(x) for ν > -1, x > 0, without overflow for large x or underflow
/// for tiny x.
double log_bessel_i(double nu, double x);

/// ln K_ν(x) for x > 0, without overflow near 0 or underflow for large x.
double log_bessel_k(double nu, double x);

// --- root finding ----------------------------------------------------------

/// Brent's method: bisection safeguarding inverse quadratic interpolation.
/// Stops once |f(root)| ≤ tol or the bracket width is ≤ tol.
RootResult find_root_bracketed(const ScalarFunction& f, double lo, double hi, double tol,
                               int max_iterations = 200);

// --- quadrature ------------------------------------------------------------

/// ∫₀^∞ f(x) dx by the exp-sinh transform x = exp(π/2·sinh t) with step
/// halving until two successive levels agree.
QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double tol = 1e-10);
QuadratureResult integrate_semi_infinite(const ScalarFunction& f, const QuadratureOptions& opts);

/// ∫ₐᵇ f(x) dx by the tanh-sinh transform; tolerates integrable endpoint
/// singularities. f is never evaluated at a or b.
QuadratureResult integrate_interval(const ScalarFunction& f, double a, double b,
                                    const QuadratureOptions& opts = {});

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace rareis::numerics
