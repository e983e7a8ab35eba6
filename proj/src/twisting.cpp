#include "rareis/twisting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rareis/errors.hpp"
#include "rareis/lognormal_is.hpp"
#include "rareis/numerics.hpp"

namespace rareis {

namespace nm = numerics;

namespace {

constexpr double kThetaFloor = -1e12;
constexpr double kEnvelopeSafety = 1.05;

void require_nonpositive(double theta) {
  if (!(theta <= 0.0)) throw DomainError("mgf: theta must be <= 0, got " + std::to_string(theta));
}

bool closed_form_mgf(const Distribution& d) {
  return d.family() == Family::Exponential || d.family() == Family::Gamma;
}

// Length scale of f(x)e^{θx}: the tilted mean of the local power law, or the
// mode for Log-normal, capped by the untilted mean.
double integrand_scale(const Distribution& d, double theta) {
  const double mean = d.mean();
  if (theta >= -1.0 / mean) return mean;
  const auto asym = d.poly_asymptote();
  if (asym.has_poly_asymptote) return std::min(mean, (asym.p + 1.0) / -theta);
  // Log-normal mode: (1 + log x)/x = θ on (0, e⁻¹)
  const double lam = -theta;
  auto g = [lam](double lx) { return -(1.0 + lx) - lam * std::exp(lx); };
  const double lo = -std::log(lam) - std::log(std::log(lam) + 2.0) - 5.0;
  const auto root = nm::find_root_bracketed(g, std::max(lo, -700.0), -1.0, 1e-12);
  return std::min(mean, std::exp(root.root));
}

struct MgfMoments {
  double log_m0;  // log ∫ f e^{θx}
  double mean;    // ∫ x f e^{θx} / ∫ f e^{θx}
};

MgfMoments quadrature_moments(const Distribution& d, double theta) {
  const double s = integrand_scale(d, theta);
  const double ref = d.log_pdf(s) + theta * s;
  auto base = [&](double u) {
    const double x = s * u;
    if (x <= 0.0) return 0.0;
    const double lv = d.log_pdf(x) + theta * x - ref;
    return std::exp(lv);
  };
  nm::QuadratureOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = 1e-12;
  opts.max_level = 14;
  const auto i0 = nm::integrate_semi_infinite(base, opts);
  const auto i1 = nm::integrate_semi_infinite([&](double u) { return u * base(u); }, opts);
  if (!(i0.value > 0.0)) throw NumericalError("mgf quadrature returned a nonpositive value");
  return {std::log(s) + ref + std::log(i0.value), s * i1.value / i0.value};
}

}  // namespace

double log_mgf(const Distribution& d, double theta) {
  require_nonpositive(theta);
  if (theta == 0.0) return 0.0;
  switch (d.family()) {
    case Family::Exponential: {
      const double k = d.param("k");
      return std::log(k) - std::log(k - theta);
    }
    case Family::Gamma:
      return -d.param("k") * std::log1p(-d.param("beta") * theta);
    default:
      return quadrature_moments(d, theta).log_m0;
  }
}

double mgf(const Distribution& d, double theta) { return std::exp(log_mgf(d, theta)); }

double tilted_mean(const Distribution& d, double theta) {
  require_nonpositive(theta);
  if (theta == 0.0) return d.mean();
  switch (d.family()) {
    case Family::Exponential:
      return 1.0 / (d.param("k") - theta);
    case Family::Gamma:
      return d.param("k") * d.param("beta") / (1.0 - d.param("beta") * theta);
    default:
      return quadrature_moments(d, theta).mean;
  }
}

double mgf_derivative(const Distribution& d, double theta) {
  if (closed_form_mgf(d) || theta == 0.0) return mgf(d, theta) * tilted_mean(d, theta);
  const auto mom = quadrature_moments(d, theta);
  return std::exp(mom.log_m0) * mom.mean;
}

TiltSolution solve_tilt(const Distribution& d, double gamma, unsigned n) {
  if (!(gamma > 0.0) || n == 0) throw DomainError("solve_tilt: need gamma > 0 and n >= 1");
  const double target = gamma / double(n);
  if (target >= d.mean()) {
    throw DomainError("solve_tilt: gamma/N = " + std::to_string(target) +
                      " is not below the mean " + std::to_string(d.mean()) +
                      "; the tilt would be nonnegative");
  }
  double theta = 0.0;
  switch (d.family()) {
    case Family::Exponential:
      theta = d.param("k") - 1.0 / target;
      break;
    case Family::Gamma:
      theta = 1.0 / d.param("beta") - d.param("k") / target;
      break;
    default: {
      auto g = [&](double th) { return tilted_mean(d, th) / target - 1.0; };
      double hi = 0.0;
      double lo = -1.0;
      while (g(lo) > 0.0) {
        hi = lo;
        lo *= 2.0;
        if (lo < kThetaFloor) {
          throw NumericalError("solve_tilt: tilt bracket passed -1e12; the tilt equation is "
                               "numerically degenerate");
        }
      }
      theta = nm::find_root_bracketed(g, lo, hi, 1e-13).root;
    }
  }
  TiltSolution s;
  s.theta = theta;
  s.log_normalizer = log_mgf(d, theta);
  s.normalizer = std::exp(s.log_normalizer);
  s.mean_under_tilt = tilted_mean(d, theta);
  s.residual = s.mean_under_tilt - target;
  return s;
}

TiltedSampler::TiltedSampler(const Distribution& d, const TiltSolution& tilt)
    : dist_(d), theta_(tilt.theta) {
  if (!(theta_ < 0.0)) throw DomainError("TiltedSampler: tilt must be negative");
  const auto asym = d.poly_asymptote();
  const double t = tilt.mean_under_tilt;
  if (asym.has_poly_asymptote) {
    shape_ = asym.p + 1.0;
  } else if (d.family() == Family::LogNormal) {
    shape_ = optimal_shape_k(1.0, t);
  } else {
    throw DomainError("TiltedSampler: no envelope for " + d.describe());
  }
  constexpr int kGrid = 4096;
  constexpr double kTail = 1e-12;
  // Gamma-IS proposal with mean γ/N; its ratio to the tilted density can grow
  // without bound when θ* + rate > 0 and f decays slower than exponentially.
  rate_ = shape_ / t;
  double best = grid_max(kGrid, kTail);
  if (!std::isfinite(best)) {
    rate_ = -theta_;
    best = grid_max(kGrid, kTail);
  }
  if (!std::isfinite(best)) throw NumericalError("TiltedSampler: envelope is not finite");
  log_envelope_ = best + std::log(kEnvelopeSafety);
}

double TiltedSampler::log_ratio(double x) const {
  return dist_.log_pdf(x) + theta_ * x - ((shape_ - 1.0) * std::log(x) - rate_ * x);
}

double TiltedSampler::envelope_constant() const { return std::exp(log_envelope_); }

// Largest log ratio over a log-spaced grid spanning the proposal's
// [tail, 1 − tail] quantiles; +inf when the ratio still increases at the
// right end (unbounded in the tail).
double TiltedSampler::grid_max(int points, double tail) const {
  const double lo = nm::reg_lower_incomplete_gamma_inv(shape_, tail) / rate_;
  const double hi = nm::reg_lower_incomplete_gamma_inv(shape_, 1.0 - tail) / rate_;
  const double step = std::log(hi / lo) / (points - 1);
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int i = 0; i < points; ++i) {
    const double v = log_ratio(lo * std::exp(step * i));
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (arg == points - 1) return std::numeric_limits<double>::infinity();
  return best;
}

double TiltedSampler::sample(RandomStream& stream, ARReport& report) {
  report.envelope_constant = std::max(report.envelope_constant, envelope_constant());
  for (;;) {
    const double y = stream.gamma(shape_, 1.0 / rate_);
    const double u = stream.uniform();
    ++report.proposals;
    if (!(y > 0.0)) continue;
    const double lr = log_ratio(y);
    if (lr > log_envelope_) {
      if (reestimated_) {
        throw NumericalError("TiltedSampler: envelope violated after re-estimation at x = " +
                             std::to_string(y));
      }
      reestimated_ = true;
      log_envelope_ = std::max(grid_max(16384, 1e-15), lr) + std::log(kEnvelopeSafety);
      report.envelope_constant = std::max(report.envelope_constant, envelope_constant());
    }
    if (std::log(u) <= lr - log_envelope_) {
      ++report.accepts;
      return y;
    }
  }
}

std::pair<double, ARReport> sample_tilted(const Distribution& d, const TiltSolution& tilt,
                                          RandomStream& stream) {
  TiltedSampler sampler(d, tilt);
  ARReport report;
  const double x = sampler.sample(stream, report);
  return {x, report};
}

EstimatorResult estimate_exp_twist(const Distribution& d, double gamma, unsigned n,
                                   std::uint64_t m, const RunConfig& config,
                                   ARReport* ar_report) {
  if (n > 0 && gamma / double(n) >= d.mean()) {
    // outside the left-tail regime the optimal tilt is θ = 0: plain Monte Carlo
    auto factory = [&]() -> SampleFunction {
      return [&d, gamma, n](RandomStream& stream, ARReport&) {
        double sum = 0.0;
        for (unsigned i = 0; i < n; ++i) {
          sum += d.sample(stream);
          if (sum > gamma) return 0.0;
        }
        return 1.0;
      };
    };
    auto run = run_sharded(m, config, factory);
    if (ar_report) *ar_report = run.ar;
    return run.result;
  }
  const TiltSolution tilt = solve_tilt(d, gamma, n);
  const TiltedSampler prototype(d, tilt);
  const double log_norm = double(n) * tilt.log_normalizer;
  const double theta = tilt.theta;
  auto factory = [&]() -> SampleFunction {
    return [sampler = prototype, n, gamma, log_norm, theta](RandomStream& stream,
                                                             ARReport& report) mutable {
      double sum = 0.0;
      for (unsigned i = 0; i < n; ++i) {
        sum += sampler.sample(stream, report);
        if (sum > gamma) return 0.0;
      }
      return std::exp(log_norm - theta * sum);
    };
  };
  auto run = run_sharded(m, config, factory);
  if (ar_report) *ar_report = run.ar;
  return run.result;
}

}  // namespace rareis
