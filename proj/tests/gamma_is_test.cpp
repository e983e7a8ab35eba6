#include "rareis/gamma_is.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rareis/engine.hpp"
#include "rareis/errors.hpp"
#include "test_support.hpp"

using namespace rareis;
using namespace rareis::testing;

TEST(GammaISParams, Examples) {
  const auto e = gamma_is_params({0.0, 1.0, true}, 0.5, 10);
  EXPECT_EQ(e.shape, 1.0);
  EXPECT_EQ(e.tilt, -20.0);
  EXPECT_DOUBLE_EQ(e.scale, 0.05);
  EXPECT_EQ(e.provenance, ShapeProvenance::AsymptoteDerived);

  const auto w = gamma_is_params({0.5, 1.5, true}, 0.5, 12);
  EXPECT_EQ(w.shape, 1.5);
  EXPECT_EQ(w.tilt, -36.0);
  EXPECT_DOUBLE_EQ(w.scale, 1.0 / 36.0);

  const auto nak = make(Family::NakagamiM, {{"m", 1.0}, {"omega", 1.0}});
  const auto n = gamma_is_params(nak.poly_asymptote(), 1.0, 4);
  EXPECT_DOUBLE_EQ(n.shape, 2.0);
  EXPECT_DOUBLE_EQ(n.scale, 0.125);

  EXPECT_THROW(gamma_is_params(lognormal().poly_asymptote(), 0.5, 9), ValidationError);
}

TEST(GammaISParams, MeanIsGammaOverN) {
  for (double shape : {0.3, 1.0, 1.5, 3.0541, 7.2}) {
    for (double gamma : {1e-6, 0.05, 0.5, 3.0}) {
      for (unsigned n : {1u, 7u, 16u}) {
        const auto p = gamma_is_params_with_shape(shape, gamma, n, ShapeProvenance::KStarOptimized);
        EXPECT_NEAR(p.shape * p.scale / (gamma / n), 1.0, 4e-16);
        EXPECT_DOUBLE_EQ(p.tilt, -1.0 / p.scale);
      }
    }
  }
}

TEST(LogWeight, ExponentialClosedForm) {
  const double gamma = 0.7;
  const unsigned n = 3;
  const auto params = gamma_is_params({0.0, 1.0, true}, gamma, n);
  const std::vector<double> x{0.01, 0.2, 0.35};
  double want = 0.0;
  for (double v : x) want += -v - (std::log(n / gamma) - (n / gamma) * v);
  EXPECT_NEAR(log_weight(exponential(), params, x), want, 1e-13);
}

TEST(LogWeight, TwoRoutesAgree) {
  const auto d = weibull();
  const auto params = gamma_is_params(d.poly_asymptote(), 0.5, 2);
  const std::vector<double> x{0.01, 0.01};
  EXPECT_NEAR(log_weight(d, params, x), log_weight_factored(d, params, x), 1e-10);
  for (const auto& dist :
       {make(Family::GammaGamma, {{"k", 1.7}, {"m", 4.0}, {"omega", 1.0}}),
        make(Family::Rice, {{"sigma", 0.8}, {"nu", 1.0}}), weibull(0.5, 2.0)}) {
    const auto p = gamma_is_params(dist.poly_asymptote(), 0.3, 4);
    const std::vector<double> y{0.003, 0.05, 0.1, 0.0001};
    EXPECT_NEAR(log_weight(dist, p, y), log_weight_factored(dist, p, y), 1e-10);
  }
}

TEST(LogWeight, GammaSummandsMatchDirectRatio) {
  // f(x) = x e^{−x}, g(x) = x e^{−x/s}/s²: ratio s²·e^{x/s − x}
  const auto d = make(Family::Gamma, {{"k", 2.0}, {"beta", 1.0}});
  const auto params = gamma_is_params(d.poly_asymptote(), 1.0, 3);
  const double s = params.scale;
  const std::vector<double> x{0.1, 0.25, 0.4};
  double want = 0.0;
  for (double v : x) want += 2.0 * std::log(s) + v / s - v;
  EXPECT_NEAR(log_weight(d, params, x), want, 1e-12);
  EXPECT_THROW(log_weight(d, params, std::vector<double>{0.1, 0.0, 0.2}), DomainError);
}

TEST(GammaIS, ShapeOneIsTheExponentialProposal) {
  // with p = 0 the proposal density is (N/γ)e^{−(N/γ)x}
  const auto params = gamma_is_params({0.0, 1.0, true}, 0.4, 8);
  const auto unit = exponential(1.0);
  for (double x = 0.001; x < 1.0; x *= 1.7) {
    const double log_g = unit.log_pdf(x) - log_weight(unit, params, std::vector<double>{x});
    EXPECT_NEAR(std::exp(log_g), 20.0 * std::exp(-20.0 * x), 1e-12 * 20.0);
  }
}

TEST(GammaIS, ErlangOracle) {
  const auto d = exponential();
  const auto r4 = estimate_gamma_is(d, 1.0, 4, 100000, {201, 1});
  EXPECT_LE(z_score(r4, 0.0189881569), 3.0);
  const auto r1 = estimate_gamma_is(d, 1.0, 1, 100000, {202, 1});
  EXPECT_LE(z_score(r1, 1.0 - std::exp(-1.0)), 3.0);
}

TEST(GammaIS, WeibullRareRegimeAgainstOracle) {
  const auto d = weibull();
  const auto oracle = convolution_oracle(d, 0.5, 12);
  const auto r = estimate_gamma_is(d, 0.5, 12, 100000, {203, 1});
  EXPECT_LE(standard_error(r) / r.estimate, 0.05);
  EXPECT_LE(std::abs(r.estimate - oracle.alpha),
            3.0 * standard_error(r) + oracle.richardson_error_estimate);
}

TEST(GammaIS, AgreesWithNaiveOnNonRareCases) {
  struct Case {
    Distribution d;
    unsigned n;
    double gamma;
  };
  const std::vector<Case> cases{
      {exponential(), 2, 0.5},
      {exponential(2.0), 5, 1.5},
      {weibull(), 3, 1.0},
      {weibull(0.5, 1.0), 4, 0.3},
      {make(Family::Gamma, {{"k", 2.5}, {"beta", 0.7}}), 2, 1.5},
      {make(Family::NakagamiM, {{"m", 1.8}, {"omega", 1.2}}), 3, 1.8},
      {make(Family::GeneralizedGamma, {{"a", 1.1}, {"d", 2.2}, {"p", 1.7}}), 2, 1.2},
      {make(Family::Rice, {{"sigma", 0.8}, {"nu", 1.0}}), 2, 1.0},
      {make(Family::GammaGamma, {{"k", 1.7}, {"m", 4.0}, {"omega", 1.0}}), 3, 1.2},
      {make(Family::KappaMu, {{"kappa", 1.5}, {"mu", 1.3}, {"omega", 1.0}}), 2, 0.9},
  };
  std::uint64_t seed = 300;
  for (const auto& c : cases) {
    const auto naive = estimate_naive(c.d, c.gamma, c.n, 100000, {seed++, 1});
    const auto is = estimate_gamma_is(c.d, c.gamma, c.n, 100000, {seed++, 1});
    ASSERT_GE(naive.estimate, 0.01) << c.d.describe();
    const double combined = std::sqrt(naive.variance_of_mean + is.variance_of_mean);
    EXPECT_LE(std::abs(naive.estimate - is.estimate), 3.0 * combined) << c.d.describe();
  }
}

TEST(GammaIS, NearlyFlatScvAcrossN) {
  const auto d = weibull();
  const auto r2 = estimate_gamma_is(d, 0.5, 2, 100000, {401, 1});
  const auto r12 = estimate_gamma_is(d, 0.5, 12, 100000, {402, 1});
  EXPECT_LE(r12.scv, 10.0 * r2.scv);
}

TEST(SecondMomentRatio, ExponentialProposalsCoincide) {
  const double ratio = second_moment_ratio(exponential(), 0.5, 10, 100000, {501, 1});
  EXPECT_NEAR(ratio, 1.0, 0.1);
}

TEST(SecondMomentRatio, WeibullBand) {
  const double ratio = second_moment_ratio(weibull(), 0.05, 12, 100000, {502, 1});
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(ratio, 2.0);
}

TEST(SecondMomentRatio, SelfComparisonIsExact) {
  const auto a = estimate_gamma_is(weibull(), 0.5, 4, 10000, {503, 1});
  const auto b = estimate_gamma_is(weibull(), 0.5, 4, 10000, {503, 1});
  EXPECT_EQ(a.second_moment / b.second_moment, 1.0);
}
