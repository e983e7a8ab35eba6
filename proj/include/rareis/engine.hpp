#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rareis/distributions.hpp"
#include "rareis/monte_carlo.hpp"

namespace rareis {

/// Plain Monte Carlo frequency of {ΣXᵢ ≤ γ}.
EstimatorResult estimate_naive(const Distribution& d, double gamma, unsigned n, std::uint64_t m,
                               const RunConfig& config);

/// F(γ)ᴺ times the frequency of {Σwᵢ ≤ 1}, wᵢ = Xᵢ/γ conditioned on Xᵢ ≤ γ.
EstimatorResult estimate_truncation(const Distribution& d, double gamma, unsigned n,
                                    std::uint64_t m, const RunConfig& config);

/// exp(−1 − N·log E[exp(−w)]), the η = 1 lower bound on the truncation
/// estimator's asymptotic SCV.
double chernoff_scv_lower_bound(const Distribution& d, double gamma, unsigned n);

struct OracleResult {
  double alpha = 0.0;
  std::uint64_t grid_points = 0;
  double richardson_error_estimate = 0.0;
};

/// Deterministic α(γ,N) by N-fold lattice convolution of the cell masses of f
/// on [0, γ].
/// Requires n ≤ 16 and grid_points a power of two ≥ 1024. Throws
/// NumericalError when the grid-halving error exceeds 10% of α.
OracleResult convolution_oracle(const Distribution& d, double gamma, unsigned n,
                                std::uint64_t grid_points = 8192);

enum class Method { Naive, Truncation, ExpTwist, GammaIS, LnBiased, LnGammaKStar };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct SweepAxis {
  std::string variable;  // "n" or "gamma"
  std::vector<double> values;

  bool operator==(const SweepAxis&) const = default;
};

struct ExperimentPlan {
  Method method = Method::GammaIS;
  DistributionSpec dist;
  unsigned n = 1;
  double gamma = 1.0;
  std::uint64_t samples = 100000;
  double epsilon = 0.05;
  std::uint64_t seed = 0;
  std::optional<SweepAxis> sweep;

  bool operator==(const ExperimentPlan&) const = default;
};

/// Throws ValidationError listing every inconsistency of the plan.
void validate_plan(const ExperimentPlan& plan);

/// Dispatches to the plan's estimator with seed plan.seed and fills the
/// recommended sample count for plan.epsilon (ε/2 for ln-biased).
EstimatorResult run(const ExperimentPlan& plan, unsigned workers = 0);

nlohmann::json to_json(const EstimatorResult& result);
nlohmann::json to_json(const OracleResult& result);

}  // namespace rareis
