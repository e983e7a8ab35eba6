#pragma once

#include <cstdint>

#include "rareis/monte_carlo.hpp"
#include "rareis/random.hpp"

namespace rareis {

/// Truncation of standard Log-normal summands to (a, ∞) with a = δγ/N.
struct TruncationPlan {
  double a = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  /// Relative bias certificate, ε/2 by construction.
  double bias_bound = 0.0;
  unsigned n = 1;
  double gamma = 1.0;
};

/// N·Φ(log a)·Φ(log γ)^{N−1}/Φ(log(γ/N))ᴺ, evaluated in log domain.
double truncation_bias_bound(double a, unsigned n, double gamma);

/// Chooses δ so the truncation bias bound equals ε/2. Throws DomainError
/// when a ≥ e⁻¹ or δ ≥ 1, NumericalError when δ underflows.
TruncationPlan delta_for_bias(double epsilon, unsigned n, double gamma);

/// Tilted density f̃(x) ∝ (f̄(a) + (x−a)f̄′(a))·e^{θx} on x > a, a mixture of
/// a + Exponential(−θ) and a + Gamma(2, −1/θ).
struct TaylorTilt {
  double theta = 0.0;
  double f_bar_at_a = 0.0;
  double f_bar_prime_at_a = 0.0;
  double normalizer = 0.0;  // M̃(θ)
  double c = 0.0;           // γ/N − a
  double mix_weight_1 = 1.0;
  double mix_weight_2 = 0.0;
  double a = 0.0;

  /// M̃′(θ)/M̃(θ).
  double mean() const;
  /// log f̃(x) for x > a.
  double log_density(double x) const;
};

TaylorTilt taylor_tilt(const TruncationPlan& plan);

/// Solves the tilt quadratic for given expansion values at a.
TaylorTilt taylor_tilt_from(double a, double c, double f_bar, double f_bar_prime);

double sample_taylor_tilt(const TaylorTilt& tilt, const TruncationPlan& plan,
                          RandomStream& stream);

/// Estimates α₁(γ,N), the truncated problem; flagged biased with the truncation
/// bias bound. Recommended samples target ε/2.
EstimatorResult estimate_biased_truncated(double gamma, unsigned n, double epsilon,
                                          std::uint64_t m, const RunConfig& config);

/// k* = ½(log(N/γ) + √(log²(N/γ) + 2)).
double optimal_shape_k(double n, double gamma);

EstimatorResult estimate_gamma_kstar(double gamma, unsigned n, std::uint64_t m,
                                     const RunConfig& config);

}  // namespace rareis
