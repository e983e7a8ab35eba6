#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rareis/distributions.hpp"
#include "rareis/monte_carlo.hpp"

namespace rareis {

/// M(θ) = E[exp(θX)] for θ ≤ 0. Closed form for Exponential and Gamma,
/// quadrature otherwise.
double mgf(const Distribution& d, double theta);
double log_mgf(const Distribution& d, double theta);
/// M′(θ) = E[X exp(θX)].
double mgf_derivative(const Distribution& d, double theta);
/// M′(θ)/M(θ), the mean of the tilted density.
double tilted_mean(const Distribution& d, double theta);

struct TiltSolution {
  double theta = 0.0;
  double normalizer = 1.0;      // M(θ)
  double log_normalizer = 0.0;  // log M(θ), kept separately against underflow
  double residual = 0.0;        // M′(θ)/M(θ) − γ/N
  double mean_under_tilt = 0.0;
};

/// Solves M′(θ)/M(θ) = γ/N for θ < 0. Throws DomainError when γ/N is not
/// below the mean, NumericalError when the bracket search passes −1e12.
TiltSolution solve_tilt(const Distribution& d, double gamma, unsigned n);

/// Exact sampler for f*(x) ∝ f(x)·exp(θx) by acceptance-rejection from a
/// Gamma proposal. Copies are independent; each keeps its own envelope.
class TiltedSampler {
 public:
  TiltedSampler(const Distribution& d, const TiltSolution& tilt);

  /// One draw. Counts proposals and accepts into the report. The first
  /// envelope violation re-estimates the envelope on a finer, wider grid;
  /// a second one throws NumericalError.
  double sample(RandomStream& stream, ARReport& report);

  double proposal_shape() const { return shape_; }
  double proposal_rate() const { return rate_; }
  double envelope_constant() const;
  /// log of f(x)e^{θx} over the unnormalized proposal x^{shape−1}e^{−rate·x}.
  double log_ratio(double x) const;

 private:
  double grid_max(int points, double tail) const;

  Distribution dist_;
  double theta_;
  double shape_ = 1.0;
  double rate_ = 1.0;
  double log_envelope_ = 0.0;
  bool reestimated_ = false;
};

/// One draw from the tilted density with a fresh sampler.
std::pair<double, ARReport> sample_tilted(const Distribution& d, const TiltSolution& tilt,
                                          RandomStream& stream);

/// Exponential-twisting estimator (1/M)Σ 1{Σx ≤ γ}·M(θ*)ᴺ·exp(−θ*Σx).
EstimatorResult estimate_exp_twist(const Distribution& d, double gamma, unsigned n,
                                   std::uint64_t m, const RunConfig& config,
                                   ARReport* ar_report = nullptr);

}  // namespace rareis
