#include "rareis/gamma_is.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "rareis/errors.hpp"
#include "rareis/numerics.hpp"
#include "rareis/twisting.hpp"

namespace rareis {

namespace nm = numerics;

namespace {

void require_positive_samples(std::span<const double> x) {
  for (double v : x) {
    if (!(v > 0.0)) throw DomainError("log_weight: samples must be positive");
  }
}

}  // namespace

GammaISParams gamma_is_params(const PolyAsymptote& asym, double gamma, unsigned n) {
  if (!asym.has_poly_asymptote) {
    throw ValidationError(
        "gamma_is_params: the density has no polynomial asymptote at zero; use the "
        "optimized-shape route (optimal_shape_k) for Log-normal summands");
  }
  if (!(asym.p > -1.0)) throw ValidationError("gamma_is_params: need p > -1");
  return gamma_is_params_with_shape(asym.p + 1.0, gamma, n, ShapeProvenance::AsymptoteDerived);
}

GammaISParams gamma_is_params_with_shape(double shape, double gamma, unsigned n,
                                         ShapeProvenance provenance) {
  if (!(shape > 0.0) || !(gamma > 0.0) || n == 0) {
    throw ValidationError("gamma_is_params: need shape > 0, gamma > 0, n >= 1");
  }
  GammaISParams p;
  p.shape = shape;
  p.tilt = -(double(n) / gamma) * shape;
  p.scale = -1.0 / p.tilt;
  p.provenance = provenance;
  return p;
}

double log_weight(const Distribution& d, const GammaISParams& params, std::span<const double> x) {
  require_positive_samples(x);
  const double log_norm = nm::log_gamma(params.shape) + params.shape * std::log(params.scale);
  double lw = 0.0;
  for (double v : x) {
    const double log_g = (params.shape - 1.0) * std::log(v) - v / params.scale - log_norm;
    lw += d.log_pdf(v) - log_g;
  }
  return lw;
}

double log_weight_factored(const Distribution& d, const GammaISParams& params,
                           std::span<const double> x) {
  require_positive_samples(x);
  const double p = params.shape - 1.0;
  const double log_mtilde = nm::log_gamma(p + 1.0) - (p + 1.0) * std::log(-params.tilt);
  double lw = double(x.size()) * log_mtilde;
  for (double v : x) lw += d.log_pdf(v) - params.tilt * v - p * std::log(v);
  return lw;
}

EstimatorResult estimate_gamma_is(const Distribution& d, double gamma, unsigned n,
                                  std::uint64_t m, const RunConfig& config) {
  return estimate_gamma_is(d, gamma_is_params(d.poly_asymptote(), gamma, n), gamma, n, m, config);
}

EstimatorResult estimate_gamma_is(const Distribution& d, const GammaISParams& params,
                                  double gamma, unsigned n, std::uint64_t m,
                                  const RunConfig& config) {
  if (n == 0 || !(gamma > 0.0)) throw ValidationError("estimate_gamma_is: need n >= 1, gamma > 0");
  auto factory = [&]() -> SampleFunction {
    return [&d, params, gamma, n, xs = std::vector<double>(n)](RandomStream& stream,
                                                               ARReport&) mutable {
      double sum = 0.0;
      for (unsigned i = 0; i < n; ++i) {
        double v;
        do {
          v = stream.gamma(params.shape, params.scale);
        } while (!(v > 0.0));
        xs[i] = v;
        sum += v;
      }
      if (sum > gamma) return 0.0;
      return std::exp(log_weight(d, params, xs));
    };
  };
  return run_sharded(m, config, factory).result;
}

double second_moment_ratio(const Distribution& d, double gamma, unsigned n, std::uint64_t m,
                           const RunConfig& config) {
  const auto a1 = estimate_gamma_is(d, gamma, n, m, config);
  const auto a2 = estimate_exp_twist(d, gamma, n, m, config);
  if (!(a2.second_moment > 0.0)) {
    throw NumericalError("second_moment_ratio: exponential twisting produced no hits");
  }
  return a1.second_moment / a2.second_moment;
}

}  // namespace rareis
