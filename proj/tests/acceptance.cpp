// End-to-end acceptance checks. Usage: acceptance [criterion 1..10 | all].
// Each criterion prints one PASS/FAIL line; the exit status is nonzero if any
// selected criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rareis/cli.hpp"
#include "rareis/engine.hpp"
#include "rareis/errors.hpp"
#include "rareis/gamma_is.hpp"
#include "rareis/lognormal_is.hpp"
#include "rareis/twisting.hpp"
#include "test_support.hpp"

namespace {

using namespace rareis;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 1;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ExperimentPlan plan(Method m, DistributionSpec dist, unsigned n, double gamma, std::uint64_t samples,
                    std::uint64_t seed = kSeed) {
  ExperimentPlan p;
  p.method = m;
  p.dist = std::move(dist);
  p.n = n;
  p.gamma = gamma;
  p.samples = samples;
  p.seed = seed;
  return p;
}

const DistributionSpec kExp1{Family::Exponential, {{"k", 1.0}}};
const DistributionSpec kWeibull{Family::Weibull, {{"k", 1.5}, {"lambda", 1.0}}};
const DistributionSpec kLogNormal{Family::LogNormal, {}};

double se(const EstimatorResult& r) { return std::sqrt(r.variance_of_mean); }

void criterion1(Verdict& v) {
  const double truth = testing::erlang_cdf(4, 1.0);
  v.detail << "oracle=" << truth;
  const std::pair<Method, std::uint64_t> runs[] = {{Method::Naive, 1000000},
                                                   {Method::Truncation, 1000000},
                                                   {Method::ExpTwist, 100000},
                                                   {Method::GammaIS, 100000}};
  for (const auto& [m, samples] : runs) {
    const auto t0 = Clock::now();
    const auto r = run(plan(m, kExp1, 4, 1.0, samples));
    const double secs = seconds_since(t0);
    const double z = std::abs(r.estimate - truth) / se(r);
    v.detail << " " << method_name(m) << ": est=" << r.estimate << " z=" << z << " t=" << secs
             << "s;";
    v.check(z <= 3.0, std::string(method_name(m)) + " outside 3 SE");
    v.check(secs < 5.0, std::string(method_name(m)) + " slower than 5 s");
  }
}

void criterion2(Verdict& v) {
  const auto t0 = Clock::now();
  const Distribution d = make_distribution(kWeibull);
  for (unsigned n : {5u, 8u, 12u}) {
    const auto oracle = convolution_oracle(d, 0.5, n);
    const auto r = run(plan(Method::GammaIS, kWeibull, n, 0.5, 100000));
    const double rel_se = se(r) / r.estimate;
    const double gap = std::abs(r.estimate - oracle.alpha);
    v.detail << " N=" << n << ": oracle=" << oracle.alpha << " est=" << r.estimate
             << " relSE=" << rel_se << ";";
    v.check(rel_se <= 0.05, "relative SE above 5% at N=" + std::to_string(n));
    v.check(gap <= 3.0 * se(r) + oracle.richardson_error_estimate,
            "oracle mismatch at N=" + std::to_string(n));
  }
  const double secs = seconds_since(t0);
  v.detail << " total=" << secs << "s";
  v.check(secs < 30.0, "slower than 30 s");
}

void criterion3(Verdict& v) {
  const Distribution d = make_distribution(kWeibull);
  const double ratio = second_moment_ratio(d, 0.05, 12, 100000, RunConfig{kSeed, 0});
  v.detail << " second-moment ratio gamma-is/exp-twist=" << ratio;
  v.check(ratio >= 0.5 && ratio <= 2.0, "ratio outside [0.5, 2]");
}

void criterion4(Verdict& v) {
  double worst = 0.0;
  for (double eps : {0.01, 0.05}) {
    for (unsigned n : {2u, 5u, 9u}) {
      for (double gamma : {0.5, 1.0}) {
        const auto tp = delta_for_bias(eps, n, gamma);
        const double a = tp.delta * gamma / double(n);
        const double lhs = double(n) * phi(std::log(a)) * std::pow(phi(std::log(gamma)), n - 1) /
                           std::pow(phi(std::log(gamma / double(n))), n);
        const double rel = std::abs(lhs / (eps / 2.0) - 1.0);
        worst = std::max(worst, rel);
        v.check(rel <= 1e-6, "bias identity off at eps=" + std::to_string(eps) +
                                  " N=" + std::to_string(n) + " gamma=" + std::to_string(gamma));
        v.check(a < std::exp(-1.0), "delta*gamma/N not below 1/e");
      }
    }
  }
  v.detail << " worst relative deviation=" << worst;
}

void criterion5(Verdict& v) {
  for (unsigned n : {1u, 2u, 9u}) {
    for (double gamma : {0.5, 1.0}) {
      double truth = 0.0;
      double oracle_err = 0.0;
      if (n == 1) {
        truth = phi(std::log(gamma));
      } else {
        const auto o = convolution_oracle(make_distribution(kLogNormal), gamma, n);
        truth = o.alpha;
        oracle_err = o.richardson_error_estimate;
      }
      auto kstar = run(plan(Method::LnGammaKStar, kLogNormal, n, gamma, 100000));
      auto p = plan(Method::LnBiased, kLogNormal, n, gamma, 100000);
      p.epsilon = 0.05;
      auto biased = run(p);
      const double zk = std::abs(kstar.estimate - truth) / se(kstar);
      const double tol_b = 3.0 * se(biased) + biased.bias_bound * biased.estimate + oracle_err;
      v.detail << " N=" << n << ",g=" << gamma << ": truth=" << truth << " kstar z=" << zk
               << " biased gap/tol=" << std::abs(biased.estimate - truth) / tol_b << ";";
      const std::string tag = " at N=" + std::to_string(n) + " gamma=" + std::to_string(gamma);
      v.check(std::abs(kstar.estimate - truth) <= 3.0 * se(kstar) + oracle_err, "ln-gamma-kstar" + tag);
      v.check(std::abs(biased.estimate - truth) <= tol_b, "ln-biased" + tag);
    }
  }
}

// Golden-section refinement of the best point on a fine grid.
double brute_force_kstar(double n, double gamma) {
  const double l = std::log(n / gamma);
  auto f = [l](double k) { return k * k - 2.0 * k * l - std::log(k); };
  double best = 1e-4;
  for (double k = 1e-4; k <= 50.0; k += 1e-3) {
    if (f(k) < f(best)) best = k;
  }
  double a = std::max(1e-9, best - 2e-3);
  double b = best + 2e-3;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  while (b - a > 1e-12) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

void criterion6(Verdict& v) {
  const double k = optimal_shape_k(9.0, 0.5);
  const double brute = brute_force_kstar(9.0, 0.5);
  const double big = optimal_shape_k(1e4, 1.0) / std::log(1e4);
  v.detail << " k*(9,0.5)=" << k << " brute=" << brute << " k*/log(N/gamma) at 1e4=" << big;
  v.check(std::abs(k - brute) <= 1e-6, "k* differs from brute-force minimizer");
  v.check(big >= 0.9 && big <= 1.2, "k*/log(N/gamma) outside [0.9, 1.2]");
}

void criterion7(Verdict& v) {
  const auto kstar = run(plan(Method::LnGammaKStar, kLogNormal, 9, 0.5, 100000));
  const auto twist = run(plan(Method::ExpTwist, kLogNormal, 9, 0.5, 100000));
  const auto biased = run(plan(Method::LnBiased, kLogNormal, 9, 0.5, 100000));
  const double ratio = twist.scv / kstar.scv;
  v.detail << " SCV ln-gamma-kstar=" << kstar.scv << " exp-twist=" << twist.scv
           << " ln-biased=" << biased.scv << " ratio exp-twist/kstar=" << ratio;
  v.check(kstar.scv < twist.scv, "ln-gamma-kstar SCV not below exp-twist");
  v.check(ratio >= 5.0, "ratio below 5");
}

void criterion8(Verdict& v) {
  const double gamma = 0.5;
  // E[e^{-w}] for w = X/γ, X ~ Exp(1) conditioned on X ≤ γ
  const double e = gamma * (1.0 - std::exp(-(gamma + 1.0))) /
                   ((gamma + 1.0) * (1.0 - std::exp(-gamma)));
  const double bound8 = std::exp(-1.0 - 8.0 * std::log(e));
  const auto r4 = run(plan(Method::Truncation, kExp1, 4, gamma, 1000000));
  const auto r8 = run(plan(Method::Truncation, kExp1, 8, gamma, 1000000));
  v.detail << " SCV(N=4)=" << r4.scv << " SCV(N=8)=" << r8.scv << " bound(N=8)=" << bound8
           << " ratio=" << r8.scv / r4.scv;
  v.check(r8.scv > bound8, "SCV at N=8 below the Chernoff bound");
  v.check(r8.scv / r4.scv > 10.0, "SCV ratio not above 10");
}

void criterion9(Verdict& v) {
  const std::vector<ExperimentPlan> plans = {
      plan(Method::Naive, kExp1, 4, 1.0, 50000),
      plan(Method::Truncation, kExp1, 4, 1.0, 50000),
      plan(Method::ExpTwist, kWeibull, 6, 0.5, 50000),
      plan(Method::GammaIS, kExp1, 4, 1.0, 50000),
      plan(Method::LnBiased, kLogNormal, 5, 0.5, 50000),
      plan(Method::LnGammaKStar, kLogNormal, 5, 0.5, 50000),
  };
  for (const auto& p : plans) {
    const auto one = run(p, 1);
    const auto eight = run(p, 8);
    v.check(one.estimate == eight.estimate && one.variance_of_mean == eight.variance_of_mean,
            std::string(method_name(p.method)) + " differs between 1 and 8 workers");
  }
  const double truth = testing::erlang_cdf(4, 1.0);
  int covered = 0;
  constexpr int kSeeds = 200;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto r = run(plan(Method::GammaIS, kExp1, 4, 1.0, 100000, std::uint64_t(s)));
    if (std::abs(r.estimate - truth) <= r.ci95_half_width) ++covered;
  }
  v.detail << " worker replays compared for 6 methods; CI coverage " << covered << "/" << kSeeds;
  v.check(covered >= 180, "coverage below 90%");
}

struct Protocol {
  std::string name;
  std::vector<std::string> args;
  std::size_t rows;
};

void criterion10(Verdict& v) {
  const std::vector<std::string> weibull15 = {"--dist", "weibull", "--param", "k=1.5", "--param",
                                              "lambda=1"};
  auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const std::vector<std::string> common = {"--samples", "10000", "--seed", std::to_string(kSeed)};
  std::vector<Protocol> protocols = {
      {"weibull k=1.5 vs N",
       with(with({"sweep", "--method", "gamma-is", "--method", "exp-twist", "--gamma", "0.5",
                  "--sweep-var", "n", "--sweep-values", "2:12"},
                 weibull15),
            common),
       22},
      {"weibull k=0.5 vs N",
       with({"sweep", "--method", "gamma-is", "--method", "exp-twist", "--dist", "weibull",
             "--param", "k=0.5", "--param", "lambda=1", "--gamma", "0.01", "--sweep-var", "n",
             "--sweep-values", "2:12"},
            common),
       22},
      {"gamma-gamma vs N",
       with({"sweep", "--method", "gamma-is", "--method", "exp-twist", "--dist", "gamma-gamma",
             "--param", "k=1.7", "--param", "m=4", "--param", "omega=1", "--gamma", "0.5",
             "--sweep-var", "n", "--sweep-values", "2:12"},
            common),
       22},
      {"lognormal vs N",
       with({"sweep", "--method", "exp-twist", "--method", "ln-biased", "--method",
             "ln-gamma-kstar", "--dist", "lognormal", "--gamma", "0.5", "--epsilon", "0.05",
             "--sweep-var", "n", "--sweep-values", "1:10"},
            common),
       30},
  };
  for (const char* n : {"8", "10"}) {
    protocols.push_back({std::string("weibull k=1.5 vs gamma, N=") + n,
                         with(with({"sweep", "--method", "gamma-is", "--method", "exp-twist",
                                    "--n", n, "--sweep-var", "gamma", "--sweep-values",
                                    "0.2:1.4:0.2"},
                                   weibull15),
                              common),
                         14});
    protocols.push_back({std::string("lognormal vs gamma, N=") + n,
                         with({"sweep", "--method", "exp-twist", "--method", "ln-biased",
                               "--method", "ln-gamma-kstar", "--dist", "lognormal", "--n", n,
                               "--epsilon", "0.05", "--sweep-var", "gamma", "--sweep-values",
                               "0.6:1.4:0.2"},
                              common),
                         15});
  }

  const auto t0 = Clock::now();
  for (const auto& proto : protocols) {
    std::ostringstream out;
    std::ostringstream err;
    const int status = cli::run_cli(proto.args, out, err);
    v.check(status == 0, proto.name + " exit status " + std::to_string(status));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    v.check(line == cli::kCsvHeader, proto.name + " header");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
      if (!line.empty() && line.back() == ',') f.emplace_back();
      if (f.size() != 14) {
        v.check(false, proto.name + " row with " + std::to_string(f.size()) + " fields");
        continue;
      }
      const bool biased = f[0] == "ln-biased";
      bool numeric = true;
      for (int k : {6, 7, 8, 9, 10, 12}) {
        try {
          (void)std::stod(f[k]);
        } catch (const std::exception&) {
          numeric = false;
        }
      }
      v.check(numeric, proto.name + " non-numeric metric in: " + line);
      v.check(f[11] == (biased ? "true" : "false"), proto.name + " biased column");
      v.check(biased != f[13].empty(), proto.name + " adjusted_wnrv column");
    }
    v.check(rows == proto.rows, proto.name + " row count " + std::to_string(rows));
    if (!err.str().empty()) v.detail << " stderr(" << proto.name << "): " << err.str();
  }
  const double secs = seconds_since(t0);
  v.detail << " " << protocols.size() << " sweeps in " << secs << "s";
  v.check(secs < 600.0, "sweeps slower than 10 min");
}

const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> kCriteria = {
    {"analytic-oracle accuracy", criterion1},
    {"convolution-oracle accuracy, rare regime", criterion2},
    {"second-moment equivalence with exponential twisting", criterion3},
    {"truncation threshold bias identity", criterion4},
    {"log-normal estimator agreement", criterion5},
    {"optimal gamma shape k*", criterion6},
    {"log-normal efficiency ordering", criterion7},
    {"truncation estimator degradation", criterion8},
    {"determinism and CI coverage", criterion9},
    {"reference sweep protocols", criterion10},
};

bool run_criterion(std::size_t i) {
  Verdict v;
  v.detail.precision(10);
  const auto t0 = Clock::now();
  try {
    kCriteria[i].second(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  std::cout << "CRITERION " << (i + 1) << " " << (v.pass ? "PASS" : "FAIL") << " ("
            << kCriteria[i].first << ", " << seconds_since(t0) << "s):" << v.detail.str()
            << std::endl;
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  bool ok = true;
  if (which == "all") {
    for (std::size_t i = 0; i < kCriteria.size(); ++i) ok = run_criterion(i) && ok;
  } else {
    const int k = std::atoi(which.c_str());
    if (k < 1 || k > int(kCriteria.size())) {
      std::cerr << "usage: acceptance [1-" << kCriteria.size() << " | all]\n";
      return 2;
    }
    ok = run_criterion(std::size_t(k - 1));
  }
  return ok ? 0 : 1;
}
