#pragma once

#include <cstdint>
#include <span>

#include "rareis/distributions.hpp"
#include "rareis/monte_carlo.hpp"

namespace rareis {

enum class ShapeProvenance { AsymptoteDerived, KStarOptimized };

/// Per-summand Gamma proposal. shape·scale = γ/N and tilt = −1/scale.
struct GammaISParams {
  double shape = 1.0;
  double scale = 1.0;
  double tilt = -1.0;
  ShapeProvenance provenance = ShapeProvenance::AsymptoteDerived;
};

/// shape p+1, tilt −(N/γ)(p+1). Throws ValidationError without an asymptote.
GammaISParams gamma_is_params(const PolyAsymptote& asym, double gamma, unsigned n);

/// Gamma proposal with an explicit shape and mean γ/N.
GammaISParams gamma_is_params_with_shape(double shape, double gamma, unsigned n,
                                         ShapeProvenance provenance);

/// Σ[log f(xᵢ) − log g(xᵢ)] with g the Gamma(shape, scale) density.
double log_weight(const Distribution& d, const GammaISParams& params, std::span<const double> x);

/// The same quantity as N·log M̃(θ̃) + Σ[log f(xᵢ) − θ̃xᵢ − p·log xᵢ],
/// with M̃(θ) = Γ(p+1)/(−θ)^{p+1}.
double log_weight_factored(const Distribution& d, const GammaISParams& params,
                           std::span<const double> x);

EstimatorResult estimate_gamma_is(const Distribution& d, double gamma, unsigned n,
                                  std::uint64_t m, const RunConfig& config);

EstimatorResult estimate_gamma_is(const Distribution& d, const GammaISParams& params,
                                  double gamma, unsigned n, std::uint64_t m,
                                  const RunConfig& config);

/// Â₁/Â₂: empirical second moment of the Gamma-IS weights over that of the
/// exponential-twisting weights, M samples each.
double second_moment_ratio(const Distribution& d, double gamma, unsigned n, std::uint64_t m,
                           const RunConfig& config);

}  // namespace rareis
