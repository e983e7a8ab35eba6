#include "rareis/engine.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rareis/errors.hpp"
#include "rareis/gamma_is.hpp"
#include "rareis/lognormal_is.hpp"
#include "rareis/numerics.hpp"
#include "rareis/twisting.hpp"

namespace rareis {

namespace nm = numerics;

EstimatorResult estimate_naive(const Distribution& d, double gamma, unsigned n, std::uint64_t m,
                               const RunConfig& config) {
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
  return run_sharded(m, config, factory).result;
}

EstimatorResult estimate_truncation(const Distribution& d, double gamma, unsigned n,
                                    std::uint64_t m, const RunConfig& config) {
  const ConditionalScaledSampler sampler(d, gamma);
  const double prefactor = std::exp(double(n) * sampler.log_window_mass());
  auto factory = [&]() -> SampleFunction {
    return [&sampler, prefactor, n](RandomStream& stream, ARReport&) {
      double sum = 0.0;
      for (unsigned i = 0; i < n; ++i) {
        sum += sampler(stream);
        if (sum > 1.0) return 0.0;
      }
      return prefactor;
    };
  };
  return run_sharded(m, config, factory).result;
}

double chernoff_scv_lower_bound(const Distribution& d, double gamma, unsigned n) {
  const double mass = d.cdf(gamma);
  if (!(mass > 0.0)) throw NumericalError("chernoff_scv_lower_bound: F(gamma) underflows");
  nm::QuadratureOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = 1e-12;
  const auto q = nm::integrate_interval(
      [&](double w) { return gamma * d.pdf(gamma * w) * std::exp(-w); }, 0.0, 1.0, opts);
  const double e = q.value / mass;
  return std::exp(-1.0 - double(n) * std::log(e));
}

namespace {

// 8-point Gauss-Legendre on [a, b]
double cell_mass(const Distribution& d, double a, double b) {
  static constexpr double kNodes[4] = {0.1834346424956498, 0.5255324099163290,
                                       0.7966664774136267, 0.9602898564975363};
  static constexpr double kWeights[4] = {0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    sum += kWeights[i] * (d.pdf(mid - half * kNodes[i]) + d.pdf(mid + half * kNodes[i]));
  }
  return half * sum;
}

// Lattice convolution: the mass of each cell [(j−½)h, (j+½)h] sits at jh.
// Cell 0 takes F(h/2), which stays exact for densities singular at 0.
double convolve_alpha(const Distribution& d, double gamma, unsigned n, std::uint64_t g) {
  const double h = gamma / double(g);
  std::vector<double> mass(g + 1);
  mass[0] = d.cdf(0.5 * h);
  for (std::uint64_t j = 1; j <= g; ++j) {
    mass[j] = cell_mass(d, (double(j) - 0.5) * h, (double(j) + 0.5) * h);
  }
  std::vector<double> cur = mass;
  std::vector<double> next(g + 1);
  for (unsigned step = 1; step < n; ++step) {
    for (std::uint64_t k = 0; k <= g; ++k) {
      double acc = 0.0;
      for (std::uint64_t j = 0; j <= k; ++j) acc += mass[j] * cur[k - j];
      next[k] = acc;
    }
    cur.swap(next);
  }
  double total = 0.5 * cur[g];
  for (std::uint64_t k = 0; k < g; ++k) total += cur[k];
  return total;
}

}  // namespace

OracleResult convolution_oracle(const Distribution& d, double gamma, unsigned n,
                                std::uint64_t grid_points) {
  if (n == 0 || n > 16) throw ValidationError("convolution_oracle: n must lie in [1, 16]");
  if (grid_points < 1024 || (grid_points & (grid_points - 1)) != 0) {
    throw ValidationError("convolution_oracle: grid_points must be a power of two >= 1024");
  }
  if (!(gamma > 0.0)) throw ValidationError("convolution_oracle: gamma must be positive");
  OracleResult r;
  r.grid_points = grid_points;
  r.alpha = convolve_alpha(d, gamma, n, grid_points);
  const double coarse = convolve_alpha(d, gamma, n, grid_points / 2);
  r.richardson_error_estimate = std::abs(r.alpha - coarse);
  if (!(r.richardson_error_estimate <= 0.1 * r.alpha)) {
    std::ostringstream msg;
    msg << "convolution_oracle: grid-halving error " << r.richardson_error_estimate
        << " exceeds 10% of alpha " << r.alpha;
    throw NumericalError(msg.str());
  }
  return r;
}

namespace {

struct MethodEntry {
  Method method;
  std::string_view name;
};

constexpr MethodEntry kMethods[] = {
    {Method::Naive, "naive"},         {Method::Truncation, "truncation"},
    {Method::ExpTwist, "exp-twist"},  {Method::GammaIS, "gamma-is"},
    {Method::LnBiased, "ln-biased"},  {Method::LnGammaKStar, "ln-gamma-kstar"},
};

}  // namespace

std::string_view method_name(Method method) {
  for (const auto& e : kMethods) {
    if (e.method == method) return e.name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& e : kMethods) {
    if (e.name == name) return e.method;
  }
  std::string known;
  for (const auto& e : kMethods) known += (known.empty() ? "" : ", ") + std::string(e.name);
  throw ValidationError("unknown method '" + std::string(name) + "' (known: " + known + ")");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> v;
    for (const auto& e : kMethods) v.push_back(e.method);
    return v;
  }();
  return methods;
}

void validate_plan(const ExperimentPlan& plan) {
  std::vector<std::string> problems;
  std::optional<Distribution> dist;
  try {
    dist = make_distribution(plan.dist);
  } catch (const ValidationError& e) {
    problems.emplace_back(e.what());
  }
  if (plan.n == 0) problems.emplace_back("n must be at least 1");
  if (!(plan.gamma > 0.0) || !std::isfinite(plan.gamma)) problems.emplace_back("gamma must be positive");
  if (plan.samples == 0) problems.emplace_back("samples must be positive");
  if (!(plan.epsilon > 0.0 && plan.epsilon < 1.0)) problems.emplace_back("epsilon must lie in (0, 1)");
  const bool lognormal = plan.dist.family == Family::LogNormal;
  if ((plan.method == Method::LnBiased || plan.method == Method::LnGammaKStar) && !lognormal) {
    problems.emplace_back(std::string(method_name(plan.method)) +
                          " requires the lognormal family");
  }
  if (plan.method == Method::GammaIS && dist && !lognormal &&
      !dist->poly_asymptote().has_poly_asymptote) {
    problems.emplace_back("gamma-is requires a polynomial asymptote at zero");
  }
  if (plan.sweep) {
    if (plan.sweep->variable != "n" && plan.sweep->variable != "gamma") {
      problems.emplace_back("sweep variable must be 'n' or 'gamma'");
    }
    if (plan.sweep->values.empty()) problems.emplace_back("sweep values must not be empty");
    for (double v : plan.sweep->values) {
      if (!(v > 0.0) || (plan.sweep->variable == "n" && v != std::floor(v))) {
        problems.emplace_back("invalid sweep value " + std::to_string(v));
        break;
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid plan: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
    throw ValidationError(msg);
  }
}

EstimatorResult run(const ExperimentPlan& plan, unsigned workers) {
  validate_plan(plan);
  const Distribution d = make_distribution(plan.dist);
  const RunConfig config{plan.seed, workers};
  const bool lognormal = plan.dist.family == Family::LogNormal;
  EstimatorResult r;
  switch (plan.method) {
    case Method::Naive:
      r = estimate_naive(d, plan.gamma, plan.n, plan.samples, config);
      break;
    case Method::Truncation:
      r = estimate_truncation(d, plan.gamma, plan.n, plan.samples, config);
      break;
    case Method::ExpTwist:
      r = estimate_exp_twist(d, plan.gamma, plan.n, plan.samples, config);
      break;
    case Method::GammaIS:
      r = lognormal ? estimate_gamma_kstar(plan.gamma, plan.n, plan.samples, config)
                    : estimate_gamma_is(d, plan.gamma, plan.n, plan.samples, config);
      break;
    case Method::LnBiased:
      r = estimate_biased_truncated(plan.gamma, plan.n, plan.epsilon, plan.samples, config);
      break;
    case Method::LnGammaKStar:
      r = estimate_gamma_kstar(plan.gamma, plan.n, plan.samples, config);
      break;
  }
  finalize_result(r, r.biased ? plan.epsilon / 2.0 : plan.epsilon);
  return r;
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const EstimatorResult& r) {
  nlohmann::json j;
  j["estimate"] = r.estimate;
  j["variance_of_mean"] = r.variance_of_mean;
  j["scv"] = number_or_null(r.scv);
  j["ci95_half_width"] = r.ci95_half_width;
  j["samples"] = r.samples;
  j["wall_seconds"] = r.wall_seconds;
  j["wnrv"] = number_or_null(r.wnrv);
  j["seed"] = r.seed;
  j["biased"] = r.biased;
  j["bias_bound"] = r.bias_bound;
  j["recommended_samples"] = r.recommended_samples;
  if (r.biased) j["adjusted_wnrv"] = number_or_null(r.adjusted_wnrv());
  return j;
}

nlohmann::json to_json(const OracleResult& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["grid_points"] = r.grid_points;
  j["error_estimate"] = r.richardson_error_estimate;
  return j;
}

}  // namespace rareis
