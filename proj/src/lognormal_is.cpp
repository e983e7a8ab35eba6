#include "rareis/lognormal_is.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "rareis/distributions.hpp"
#include "rareis/errors.hpp"
#include "rareis/gamma_is.hpp"
#include "rareis/numerics.hpp"

namespace rareis {

namespace nm = numerics;

namespace {

void require_problem(double gamma, unsigned n) {
  if (!(gamma > 0.0) || n == 0) throw ValidationError("need gamma > 0 and n >= 1");
}

}  // namespace

double truncation_bias_bound(double a, unsigned n, double gamma) {
  const double nn = double(n);
  const double log_bound = std::log(nn) + nm::log_std_normal_cdf(std::log(a)) +
                           (nn - 1.0) * nm::log_std_normal_cdf(std::log(gamma)) -
                           nn * nm::log_std_normal_cdf(std::log(gamma / nn));
  return std::exp(log_bound);
}

TruncationPlan delta_for_bias(double epsilon, unsigned n, double gamma) {
  require_problem(gamma, n);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  const double nn = double(n);
  const double log_arg = std::log(epsilon / (2.0 * nn)) +
                         nn * nm::log_std_normal_cdf(std::log(gamma / nn)) -
                         (nn - 1.0) * nm::log_std_normal_cdf(std::log(gamma));
  const double log_a = nm::std_normal_cdf_inv_log(log_arg);
  const double log_delta = std::log(nn / gamma) + log_a;
  if (log_a < -700.0) {
    std::ostringstream msg;
    msg << "delta_for_bias: delta underflows (log delta = " << log_delta << ")";
    throw NumericalError(msg.str());
  }
  TruncationPlan plan;
  plan.a = std::exp(log_a);
  plan.delta = std::exp(log_delta);
  plan.epsilon = epsilon;
  plan.n = n;
  plan.gamma = gamma;
  if (!(plan.a < std::exp(-1.0))) {
    std::ostringstream msg;
    msg << "delta_for_bias: truncation point a = " << plan.a
        << " is not below exp(-1); the Taylor tilt needs a decreasing log-density slope there";
    throw DomainError(msg.str());
  }
  if (!(plan.delta < 1.0)) throw DomainError("delta_for_bias: delta must be below 1");
  plan.bias_bound = truncation_bias_bound(plan.a, n, gamma);
  return plan;
}

double TaylorTilt::mean() const {
  const double lam = -theta;
  const double r = f_bar_prime_at_a / f_bar_at_a;
  return a + (lam + 2.0 * r) / (lam * (lam + r));
}

double TaylorTilt::log_density(double x) const {
  const double lam = -theta;
  const double r = f_bar_prime_at_a / f_bar_at_a;
  const double y = x - a;
  return std::log1p(r * y) - lam * y - std::log(1.0 / lam + r / (lam * lam));
}

TaylorTilt taylor_tilt_from(double a, double c, double f_bar, double f_bar_prime) {
  if (!(f_bar > 0.0) || !(c > 0.0)) throw NumericalError("taylor_tilt: need f_bar > 0, c > 0");
  if (f_bar_prime < 0.0) throw NumericalError("taylor_tilt: f_bar' must be nonnegative");
  const double r = f_bar_prime / f_bar;
  // c·θ² + (1 − c·r)·θ − 2r = 0, negative root
  const double b = 1.0 - c * r;
  const double disc = std::sqrt(b * b + 8.0 * c * r);
  const double theta = b >= 0.0 ? -(b + disc) / (2.0 * c) : -4.0 * r / (disc - b);
  TaylorTilt t;
  t.theta = theta;
  t.a = a;
  t.c = c;
  t.f_bar_at_a = f_bar;
  t.f_bar_prime_at_a = f_bar_prime;
  const double lam = -theta;
  t.normalizer = std::exp(theta * a) * (f_bar / lam + f_bar_prime / (lam * lam));
  t.mix_weight_1 = lam / (lam + r);
  t.mix_weight_2 = r / (lam + r);
  return t;
}

TaylorTilt taylor_tilt(const TruncationPlan& plan) {
  const double la = std::log(plan.a);
  // f̄(a) = φ(log a)/(a·Φ(−log a)); f̄′(a) = f̄(a)·(−(1 + log a)/a)
  const double f_bar = nm::std_normal_pdf(la) / (plan.a * nm::std_normal_cdf(-la));
  const double slope = -(1.0 + la) / plan.a;
  if (!(slope > 0.0)) throw NumericalError("taylor_tilt: f_bar' <= 0 at the truncation point");
  const double c = plan.gamma / double(plan.n) - plan.a;
  return taylor_tilt_from(plan.a, c, f_bar, f_bar * slope);
}

double sample_taylor_tilt(const TaylorTilt& tilt, const TruncationPlan& plan,
                          RandomStream& stream) {
  const double lam = -tilt.theta;
  const double u = stream.uniform();
  if (u < tilt.mix_weight_1) return plan.a + stream.exponential(lam);
  return plan.a + stream.gamma(2.0, 1.0 / lam);
}

EstimatorResult estimate_biased_truncated(double gamma, unsigned n, double epsilon,
                                          std::uint64_t m, const RunConfig& config) {
  const TruncationPlan plan = delta_for_bias(epsilon, n, gamma);
  const TaylorTilt tilt = taylor_tilt(plan);
  const Distribution ln = make_distribution({Family::LogNormal, {}});
  auto factory = [&]() -> SampleFunction {
    return [&](RandomStream& stream, ARReport&) {
      double sum = 0.0;
      double lw = 0.0;
      for (unsigned i = 0; i < n; ++i) {
        const double x = sample_taylor_tilt(tilt, plan, stream);
        sum += x;
        if (sum > gamma) return 0.0;
        lw += ln.log_pdf(x) - tilt.log_density(x);
      }
      return std::exp(lw);
    };
  };
  EstimatorResult r = run_sharded(m, config, factory).result;
  r.biased = true;
  r.bias_bound = plan.bias_bound;
  finalize_result(r, epsilon / 2.0);
  return r;
}

double optimal_shape_k(double n, double gamma) {
  if (!(n > 0.0) || !(gamma > 0.0)) throw ValidationError("optimal_shape_k: need n, gamma > 0");
  const double l = std::log(n / gamma);
  return 0.5 * (l + std::sqrt(l * l + 2.0));
}

EstimatorResult estimate_gamma_kstar(double gamma, unsigned n, std::uint64_t m,
                                     const RunConfig& config) {
  require_problem(gamma, n);
  const auto params = gamma_is_params_with_shape(optimal_shape_k(double(n), gamma), gamma, n,
                                                 ShapeProvenance::KStarOptimized);
  const Distribution ln = make_distribution({Family::LogNormal, {}});
  return estimate_gamma_is(ln, params, gamma, n, m, config);
}

}  // namespace rareis
