#include "rareis/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rareis/errors.hpp"
#include "rareis/numerics.hpp"

namespace rareis {

namespace nm = numerics;

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct FamilyInfo {
  Family family;
  std::string_view name;
  std::vector<std::string> params;
};

const std::array<FamilyInfo, 9>& family_table() {
  static const std::array<FamilyInfo, 9> table{{
      {Family::Exponential, "exponential", {"k"}},
      {Family::Gamma, "gamma", {"k", "beta"}},
      {Family::Weibull, "weibull", {"k", "lambda"}},
      {Family::NakagamiM, "nakagami-m", {"m", "omega"}},
      {Family::GeneralizedGamma, "generalized-gamma", {"a", "d", "p"}},
      {Family::Rice, "rice", {"sigma", "nu"}},
      {Family::GammaGamma, "gamma-gamma", {"k", "m", "omega"}},
      {Family::KappaMu, "kappa-mu", {"kappa", "mu", "omega"}},
      {Family::LogNormal, "lognormal", {}},
  }};
  return table;
}

const FamilyInfo& info(Family family) {
  for (const auto& entry : family_table()) {
    if (entry.family == family) return entry;
  }
  throw ValidationError("unknown distribution family");
}

std::string validation_report(const DistributionSpec& spec) {
  std::vector<std::string> problems;
  const auto& names = family_parameters(spec.family);
  for (const auto& [key, value] : spec.params) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      problems.push_back("unknown parameter '" + key + "'");
    }
  }
  for (const auto& name : names) {
    const auto it = spec.params.find(name);
    if (it == spec.params.end()) {
      problems.push_back("missing parameter '" + name + "'");
      continue;
    }
    const double v = it->second;
    const bool zero_allowed = spec.family == Family::Rice && name == "nu";
    if (!std::isfinite(v) || v < 0.0 || (v == 0.0 && !zero_allowed)) {
      problems.push_back("parameter '" + name + "' must be " +
                         (zero_allowed ? "nonnegative" : "strictly positive") + " and finite");
    }
  }
  if (spec.family == Family::GammaGamma && problems.empty()) {
    const double k = spec.params.at("k");
    const double m = spec.params.at("m");
    if (!(m > k)) {
      problems.push_back("gamma-gamma requires m > k");
    } else {
      const double diff = m - k;
      if (std::abs(diff - std::round(diff)) <= 1e-12 * std::max(1.0, diff)) {
        problems.push_back("gamma-gamma requires m - k not a natural number (m - k = " +
                           std::to_string(diff) + ")");
      }
    }
  }
  std::string report;
  for (const auto& p : problems) {
    if (!report.empty()) report += "; ";
    report += p;
  }
  return report;
}

}  // namespace

std::string_view family_name(Family family) { return info(family).name; }

const std::vector<std::string>& family_parameters(Family family) { return info(family).params; }

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return c == '_' ? '-' : static_cast<char>(std::tolower(c)); });
  for (const auto& entry : family_table()) {
    if (entry.name == lower) return entry.family;
  }
  if (lower == "exp") return Family::Exponential;
  if (lower == "nakagami" || lower == "nakagamim") return Family::NakagamiM;
  if (lower == "gengamma" || lower == "generalizedgamma") return Family::GeneralizedGamma;
  if (lower == "gammagamma" || lower == "gg") return Family::GammaGamma;
  if (lower == "kappamu" || lower == "κ-μ") return Family::KappaMu;
  if (lower == "log-normal" || lower == "ln") return Family::LogNormal;
  throw ValidationError("unknown distribution family '" + std::string(name) + "'");
}

Distribution make_distribution(const DistributionSpec& spec) { return Distribution(spec); }

Distribution::Distribution(DistributionSpec spec) : spec_(std::move(spec)) {
  if (const auto report = validation_report(spec_); !report.empty()) {
    throw ValidationError(std::string(family_name(spec_.family)) + ": " + report);
  }
  const auto& P = spec_.params;
  switch (spec_.family) {
    case Family::Exponential: {
      const double k = P.at("k");
      log_norm_ = std::log(k);
      asymptote_ = {0.0, k, true};
      mean_ = 1.0 / k;
      break;
    }
    case Family::Gamma: {
      const double k = P.at("k");
      const double beta = P.at("beta");
      log_norm_ = -k * std::log(beta) - nm::log_gamma(k);
      asymptote_ = {k - 1.0, std::exp(log_norm_), true};
      mean_ = k * beta;
      break;
    }
    case Family::Weibull: {
      const double k = P.at("k");
      const double lambda = P.at("lambda");
      log_norm_ = std::log(k) - k * std::log(lambda);
      asymptote_ = {k - 1.0, std::exp(log_norm_), true};
      mean_ = lambda * std::exp(nm::log_gamma(1.0 + 1.0 / k));
      break;
    }
    case Family::NakagamiM: {
      const double m = P.at("m");
      const double omega = P.at("omega");
      log_norm_ = std::log(2.0) + m * std::log(m) - nm::log_gamma(m) - m * std::log(omega);
      asymptote_ = {2.0 * m - 1.0, std::exp(log_norm_), true};
      mean_ = std::exp(nm::log_gamma(m + 0.5) - nm::log_gamma(m)) * std::sqrt(omega / m);
      break;
    }
    case Family::GeneralizedGamma: {
      const double a = P.at("a");
      const double d = P.at("d");
      const double p = P.at("p");
      log_norm_ = std::log(p) - d * std::log(a) - nm::log_gamma(d / p);
      asymptote_ = {d - 1.0, std::exp(log_norm_), true};
      mean_ = a * std::exp(nm::log_gamma((d + 1.0) / p) - nm::log_gamma(d / p));
      break;
    }
    case Family::Rice: {
      const double sigma = P.at("sigma");
      const double nu = P.at("nu");
      const double s2 = sigma * sigma;
      log_norm_ = -2.0 * std::log(sigma);
      // I₀(z) ~ 1 at z = 0, so f(x) ~ x·exp(−ν²/2σ²)/σ².
      asymptote_ = {1.0, std::exp(-nu * nu / (2.0 * s2)) / s2, true};
      // σ√(π/2)·L_{1/2}(−ν²/2σ²) with q = ν²/4σ²
      const double q = nu * nu / (4.0 * s2);
      double scaled_i0 = 1.0;
      double scaled_i1 = 0.0;
      if (q > 0.0) {
        scaled_i0 = std::exp(nm::log_bessel_i(0.0, q) - q);
        scaled_i1 = std::exp(nm::log_bessel_i(1.0, q) - q);
      }
      mean_ = sigma * std::sqrt(std::numbers::pi / 2.0) *
              ((1.0 + 2.0 * q) * scaled_i0 + 2.0 * q * scaled_i1);
      break;
    }
    case Family::GammaGamma: {
      const double k = P.at("k");
      const double m = P.at("m");
      const double omega = P.at("omega");
      log_norm_ = std::log(2.0) + 0.5 * (k + m) * std::log(k * m) - nm::log_gamma(k) -
                  nm::log_gamma(m) - std::log(omega);
      // K_{k−m}(z) ~ Γ(m−k)/2·(z/2)^{−(m−k)} near 0
      const double log_b = k * std::log(k * m) + nm::log_gamma(m - k) - nm::log_gamma(k) -
                           nm::log_gamma(m) - k * std::log(omega);
      asymptote_ = {k - 1.0, std::exp(log_b), true};
      mean_ = omega;
      break;
    }
    case Family::KappaMu: {
      const double kappa = P.at("kappa");
      const double mu = P.at("mu");
      const double omega = P.at("omega");
      log_norm_ = std::log(2.0 * mu) + 0.5 * (mu + 1.0) * std::log1p(kappa) -
                  0.5 * (mu + 1.0) * std::log(omega) - 0.5 * (mu - 1.0) * std::log(kappa) -
                  mu * kappa;
      // I_{μ−1}(z) ~ (z/2)^{μ−1}/Γ(μ) near 0
      const double log_b = std::log(2.0) + mu * std::log(mu) + mu * std::log1p(kappa) -
                           nm::log_gamma(mu) - mu * std::log(omega) - mu * kappa;
      asymptote_ = {2.0 * mu - 1.0, std::exp(log_b), true};
      nm::QuadratureOptions opts;
      opts.abs_tol = 0.0;
      opts.rel_tol = 1e-12;
      const double scale = std::sqrt(omega);
      mean_ = scale * nm::integrate_semi_infinite(
                          [&](double u) { return u * scale * pdf(u * scale); }, opts)
                          .value;
      break;
    }
    case Family::LogNormal: {
      log_norm_ = -kLogSqrt2Pi;
      asymptote_ = {0.0, 0.0, false};
      mean_ = std::exp(0.5);
      break;
    }
  }
}

double Distribution::log_pdf(double x) const {
  if (!(x >= 0.0)) throw DomainError("log_pdf: x must be nonnegative");
  if (x == 0.0) {
    if (!asymptote_.has_poly_asymptote) return -kInf;
    if (asymptote_.p > 0.0) return -kInf;
    if (asymptote_.p < 0.0) return kInf;
    return std::log(asymptote_.b);
  }
  if (std::isinf(x)) return -kInf;
  const auto& P = spec_.params;
  const double lx = std::log(x);
  switch (spec_.family) {
    case Family::Exponential:
      return log_norm_ - P.at("k") * x;
    case Family::Gamma:
      return log_norm_ + (P.at("k") - 1.0) * lx - x / P.at("beta");
    case Family::Weibull: {
      const double k = P.at("k");
      return log_norm_ + (k - 1.0) * lx - std::pow(x / P.at("lambda"), k);
    }
    case Family::NakagamiM: {
      const double m = P.at("m");
      return log_norm_ + (2.0 * m - 1.0) * lx - m * x * x / P.at("omega");
    }
    case Family::GeneralizedGamma: {
      return log_norm_ + (P.at("d") - 1.0) * lx - std::pow(x / P.at("a"), P.at("p"));
    }
    case Family::Rice: {
      const double sigma = P.at("sigma");
      const double nu = P.at("nu");
      const double s2 = sigma * sigma;
      const double dx = x - nu;
      double value = log_norm_ + lx - dx * dx / (2.0 * s2);
      const double z = x * nu / s2;
      // exp(−(x²+ν²)/2σ²)·I₀(z) = exp(−(x−ν)²/2σ²)·e^{−z}I₀(z)
      if (z > 0.0) value += nm::log_bessel_i(0.0, z) - z;
      return value;
    }
    case Family::GammaGamma: {
      const double k = P.at("k");
      const double m = P.at("m");
      const double omega = P.at("omega");
      const double z = 2.0 * std::sqrt(k * m * x / omega);
      return log_norm_ + (0.5 * (k + m) - 1.0) * (lx - std::log(omega)) +
             nm::log_bessel_k(k - m, z);
    }
    case Family::KappaMu: {
      const double kappa = P.at("kappa");
      const double mu = P.at("mu");
      const double omega = P.at("omega");
      const double z = 2.0 * mu * std::sqrt(kappa * (kappa + 1.0) / omega) * x;
      return log_norm_ + mu * lx - (1.0 + kappa) * mu * x * x / omega +
             nm::log_bessel_i(mu - 1.0, z);
    }
    case Family::LogNormal:
      return log_norm_ - lx - 0.5 * lx * lx;
  }
  return -kInf;
}

double Distribution::pdf(double x) const {
  const double lp = log_pdf(x);
  return std::exp(lp);
}

bool Distribution::has_closed_form_cdf() const {
  switch (spec_.family) {
    case Family::Rice:
    case Family::GammaGamma:
    case Family::KappaMu:
      return false;
    default:
      return true;
  }
}

double Distribution::cdf(double x) const {
  if (!(x >= 0.0)) throw DomainError("cdf: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const auto& P = spec_.params;
  switch (spec_.family) {
    case Family::Exponential:
      return -std::expm1(-P.at("k") * x);
    case Family::Gamma:
      return nm::reg_lower_incomplete_gamma(P.at("k"), x / P.at("beta"));
    case Family::Weibull:
      return -std::expm1(-std::pow(x / P.at("lambda"), P.at("k")));
    case Family::NakagamiM: {
      const double m = P.at("m");
      return nm::reg_lower_incomplete_gamma(m, m * x * x / P.at("omega"));
    }
    case Family::GeneralizedGamma: {
      const double p = P.at("p");
      return nm::reg_lower_incomplete_gamma(P.at("d") / p, std::pow(x / P.at("a"), p));
    }
    case Family::LogNormal:
      return nm::std_normal_cdf(std::log(x));
    default:
      return quadrature_cdf(x);
  }
}

double Distribution::quadrature_cdf(double x) const {
  nm::QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-12;
  auto density = [this](double t) { return pdf(t); };
  if (x <= mean_) {
    return std::clamp(nm::integrate_interval(density, 0.0, x, opts).value, 0.0, 1.0);
  }
  const double scale = mean_;
  const double tail =
      scale * nm::integrate_semi_infinite([&](double u) { return pdf(x + u * scale); }, opts).value;
  return std::clamp(1.0 - tail, 0.0, 1.0);
}

double Distribution::closed_form_quantile(double v) const {
  if (!(v >= 0.0 && v < 1.0)) throw DomainError("closed_form_quantile: v must lie in [0, 1)");
  if (v == 0.0) return 0.0;
  const auto& P = spec_.params;
  switch (spec_.family) {
    case Family::Exponential:
      return -std::log1p(-v) / P.at("k");
    case Family::Gamma:
      return P.at("beta") * nm::reg_lower_incomplete_gamma_inv(P.at("k"), v);
    case Family::Weibull:
      return P.at("lambda") * std::pow(-std::log1p(-v), 1.0 / P.at("k"));
    case Family::NakagamiM: {
      const double m = P.at("m");
      return std::sqrt(P.at("omega") / m * nm::reg_lower_incomplete_gamma_inv(m, v));
    }
    case Family::GeneralizedGamma: {
      const double p = P.at("p");
      return P.at("a") * std::pow(nm::reg_lower_incomplete_gamma_inv(P.at("d") / p, v), 1.0 / p);
    }
    case Family::LogNormal:
      return std::exp(nm::std_normal_cdf_inv(v));
    default:
      throw NumericalError("closed_form_quantile: " + std::string(family_name(spec_.family)) +
                           " has no closed-form quantile");
  }
}

double Distribution::sample(RandomStream& stream) const {
  const auto& P = spec_.params;
  switch (spec_.family) {
    case Family::Exponential:
      return stream.exponential(P.at("k"));
    case Family::Gamma:
      return stream.gamma(P.at("k"), P.at("beta"));
    case Family::Weibull:
      return P.at("lambda") * std::pow(-std::log(stream.uniform()), 1.0 / P.at("k"));
    case Family::NakagamiM: {
      const double m = P.at("m");
      return std::sqrt(stream.gamma(m, P.at("omega") / m));
    }
    case Family::GeneralizedGamma: {
      const double p = P.at("p");
      return P.at("a") * std::pow(stream.gamma(P.at("d") / p, 1.0), 1.0 / p);
    }
    case Family::Rice: {
      const double sigma = P.at("sigma");
      const double re = sigma * stream.normal() + P.at("nu");
      const double im = sigma * stream.normal();
      return std::hypot(re, im);
    }
    case Family::GammaGamma: {
      const double k = P.at("k");
      const double m = P.at("m");
      return P.at("omega") * stream.gamma(k, 1.0 / k) * stream.gamma(m, 1.0 / m);
    }
    case Family::KappaMu: {
      // R² = Ω/(μ(1+κ))·Gamma(μ + J, 1), J ~ Poisson(μκ): the noncentral χ²
      // with 2μ degrees of freedom as a Poisson mixture.
      const double kappa = P.at("kappa");
      const double mu = P.at("mu");
      const long j = stream.poisson(mu * kappa);
      const double g = stream.gamma(mu + static_cast<double>(j), 1.0);
      return std::sqrt(P.at("omega") / (mu * (1.0 + kappa)) * g);
    }
    case Family::LogNormal:
      return std::exp(stream.normal());
  }
  return 0.0;
}

std::string Distribution::describe() const {
  std::ostringstream out;
  out << family_name(spec_.family) << "(";
  bool first = true;
  for (const auto& name : family_parameters(spec_.family)) {
    if (!first) out << ", ";
    out << name << "=" << spec_.params.at(name);
    first = false;
  }
  out << ")";
  return out.str();
}

// --- conditional sampling ----------------------------------------------------

namespace {
constexpr int kWindowCells = 512;
}

ConditionalScaledSampler::ConditionalScaledSampler(const Distribution& d, double gamma)
    : dist_(d), gamma_(gamma) {
  if (!(gamma > 0.0)) throw DomainError("conditional sampler: gamma must be positive");
  if (dist_.has_closed_form_cdf()) {
    window_mass_ = dist_.cdf(gamma);
  } else {
    nodes_.resize(kWindowCells + 1);
    cum_.resize(kWindowCells + 1);
    dens_.resize(kWindowCells + 1);
    nm::QuadratureOptions opts;
    opts.abs_tol = 0.0;
    opts.rel_tol = 1e-12;
    const double h = gamma / kWindowCells;
    nm::CompensatedSum mass;
    auto density = [this](double t) { return dist_.pdf(t); };
    for (int j = 0; j <= kWindowCells; ++j) {
      nodes_[j] = (j == kWindowCells) ? gamma : h * j;
      dens_[j] = dist_.pdf(nodes_[j]);
      if (j > 0) mass.add(nm::integrate_interval(density, nodes_[j - 1], nodes_[j], opts).value);
      cum_[j] = mass.value();
    }
    window_mass_ = cum_.back();
  }
  if (!(window_mass_ > 1e-300)) {
    throw NumericalError("conditional sampler: F(gamma) underflows (gamma = " +
                         std::to_string(gamma) +
                         "); the truncation estimator cannot work here, use an IS estimator");
  }
}

double ConditionalScaledSampler::from_uniform(double u) const {
  const double target = u * window_mass_;
  if (target >= window_mass_) return 1.0;
  if (target <= 0.0) return 0.0;
  const double x =
      dist_.has_closed_form_cdf() ? dist_.closed_form_quantile(target) : tabulated_quantile(target);
  return std::clamp(x / gamma_, 0.0, 1.0);
}

double ConditionalScaledSampler::tabulated_quantile(double target) const {
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  const std::size_t j =
      std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cum_.begin(), 1) - 1, kWindowCells - 1);
  const double x0 = nodes_[j];
  const double x1 = nodes_[j + 1];
  const double f0 = cum_[j];
  const double f1 = cum_[j + 1];
  const double width = x1 - x0;
  const double dmass = f1 - f0;
  if (!(dmass > 0.0)) return x0 + 0.5 * width;

  const auto asym = dist_.poly_asymptote();
  if (j == 0 && asym.has_poly_asymptote && asym.p != 0.0) {
    // F(x) ≈ F(x₁)·(x/x₁)^{p+1} in the first cell
    return x1 * std::pow(target / f1, 1.0 / (asym.p + 1.0));
  }

  // Cubic Hermite on [x0, x1] with the density as slopes, Fritsch-Carlson limited.
  const double secant = dmass / width;
  double m0 = dens_[j];
  double m1 = dens_[j + 1];
  const double a = m0 / secant;
  const double b = m1 / secant;
  if (a * a + b * b > 9.0) {
    const double tau = 3.0 / std::sqrt(a * a + b * b);
    m0 = tau * a * secant;
    m1 = tau * b * secant;
  }
  auto hermite = [&](double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return (h00 * f0 + h10 * width * m0 + h01 * f1 + h11 * width * m1 - target) / dmass;
  };
  const auto root = nm::find_root_bracketed(hermite, 0.0, 1.0, 1e-13);
  return x0 + root.root * width;
}

double conditional_scaled_sample(const Distribution& d, double gamma, RandomStream& stream) {
  return ConditionalScaledSampler(d, gamma)(stream);
}

}  // namespace rareis
