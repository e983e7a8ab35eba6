#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rareis/random.hpp"

namespace rareis {

enum class Family {
  Exponential,
  Gamma,
  Weibull,
  NakagamiM,
  GeneralizedGamma,
  Rice,
  GammaGamma,
  KappaMu,
  LogNormal,
};

/// Canonical lower-case name used in configs and CSV output ("weibull",
/// "gamma-gamma", ...).
std::string_view family_name(Family family);

/// Parses a family name; accepts the canonical names plus a few aliases
/// ("nakagami", "gengamma", "kappa_mu"). Throws ValidationError.
Family parse_family(std::string_view name);

/// Parameter names each family requires, in canonical order.
const std::vector<std::string>& family_parameters(Family family);

/// A summand family with named parameters, e.g. Weibull {k, lambda}.
struct DistributionSpec {
  Family family = Family::Exponential;
  std::map<std::string, double> params;

  bool operator==(const DistributionSpec&) const = default;
};

/// Behaviour of the density at zero: f(x) ~ b·x^p as x → 0⁺.
struct PolyAsymptote {
  double p = 0.0;
  double b = 0.0;
  bool has_poly_asymptote = false;
};

/// Immutable summand distribution. Cheap to copy; safe for concurrent reads.
class Distribution {
 public:
  explicit Distribution(DistributionSpec spec);

  const DistributionSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  double param(const std::string& name) const { return spec_.params.at(name); }

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double sample(RandomStream& stream) const;
  PolyAsymptote poly_asymptote() const { return asymptote_; }
  double mean() const { return mean_; }

  /// True when the CDF has a closed form (otherwise it is a quadrature).
  bool has_closed_form_cdf() const;

  /// Closed-form F⁻¹(v) for families that have one; v in [0, 1).
  /// Throws NumericalError for quadrature-CDF families.
  double closed_form_quantile(double v) const;

  /// A short human-readable description, e.g. "weibull(k=1.5, lambda=1)".
  std::string describe() const;

 private:
  double quadrature_cdf(double x) const;

  DistributionSpec spec_;
  PolyAsymptote asymptote_;
  double log_norm_ = 0.0;  // family-specific log normalizing constant
  double mean_ = 0.0;
};

/// Validates a spec and builds the distribution. Throws ValidationError
/// listing every violated constraint.
Distribution make_distribution(const DistributionSpec& spec);

/// Draws w = X/γ conditional on X ≤ γ, by inverse-CDF composition
/// w = F⁻¹(u·F(γ))/γ. For families whose CDF is a quadrature, F on [0, γ] is
/// tabulated once at construction and inverted per draw on a monotone
/// Hermite interpolant that uses the density as node slopes.
class ConditionalScaledSampler {
 public:
  ConditionalScaledSampler(const Distribution& d, double gamma);

  /// F(γ), the probability mass of the truncation window.
  double window_mass() const { return window_mass_; }
  double log_window_mass() const { return std::log(window_mass_); }
  double gamma() const { return gamma_; }

  /// Maps a uniform u in (0, 1] to w in [0, 1].
  double from_uniform(double u) const;
  double operator()(RandomStream& stream) const { return from_uniform(stream.uniform()); }

 private:
  double tabulated_quantile(double target) const;

  Distribution dist_;
  double gamma_;
  double window_mass_;
  std::vector<double> nodes_;  // x_j on [0, γ]
  std::vector<double> cum_;    // F(x_j)
  std::vector<double> dens_;   // f(x_j)
};

/// Convenience wrapper: one draw of w = X/γ | X ≤ γ.
double conditional_scaled_sample(const Distribution& d, double gamma, RandomStream& stream);

}  // namespace rareis
