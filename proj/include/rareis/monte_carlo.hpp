#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "rareis/numerics.hpp"
#include "rareis/random.hpp"

namespace rareis {

/// Outcome of one Monte Carlo estimator run.
struct EstimatorResult {
  double estimate = 0.0;
  double variance_of_mean = 0.0;
  /// Sample variance over estimate²; NaN when the estimate is 0 (all misses).
  double scv = std::numeric_limits<double>::quiet_NaN();
  double ci95_half_width = 0.0;
  std::uint64_t samples = 0;
  double wall_seconds = 0.0;
  double wnrv = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  bool biased = false;
  double bias_bound = 0.0;

  /// Mean of the squared per-sample weights.
  double second_moment = 0.0;
  /// (1.96)²·scv/ε² for the run's accuracy target; 0 when no target was given.
  std::uint64_t recommended_samples = 0;

  bool scv_defined() const { return !std::isnan(scv); }
  /// WNRV with the biased estimator's fourfold sample cost applied.
  double adjusted_wnrv() const { return biased ? 4.0 * wnrv : wnrv; }
};

/// Proposal/acceptance counts of an acceptance-rejection sampler.
struct ARReport {
  std::uint64_t proposals = 0;
  std::uint64_t accepts = 0;
  double envelope_constant = 0.0;

  double acceptance_rate() const {
    return proposals == 0 ? 1.0 : double(accepts) / double(proposals);
  }
  ARReport& operator+=(const ARReport& other);
};

/// Compensated running sums of weights and squared weights.
class MomentAccumulator {
 public:
  void add(double weight) {
    sum_.add(weight);
    sum_sq_.add(weight * weight);
    ++count_;
  }
  void merge(const MomentAccumulator& other);

  std::uint64_t count() const { return count_; }
  double mean() const { return count_ ? sum_.value() / double(count_) : 0.0; }
  double mean_square() const { return count_ ? sum_sq_.value() / double(count_) : 0.0; }
  double sample_variance() const;

  /// Fills estimate, variance_of_mean, scv, ci95_half_width, samples and
  /// second_moment.
  EstimatorResult summarize() const;

 private:
  numerics::CompensatedSum sum_;
  numerics::CompensatedSum sum_sq_;
  std::uint64_t count_ = 0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  /// 0 selects RAREIS_WORKERS from the environment, else the hardware count.
  unsigned workers = 0;
};

/// Worker count after resolving the 0 default.
unsigned resolve_workers(unsigned requested);

/// Per-sample draw: returns the estimator's weight for one sample (0 on a
/// miss). May add acceptance-rejection counts to the report.
using SampleFunction = std::function<double(RandomStream&, ARReport&)>;

/// Builds a fresh sample function for one shard, so samplers may keep
/// mutable per-shard state.
using SamplerFactory = std::function<SampleFunction()>;

struct ShardedRun {
  EstimatorResult result;
  ARReport ar;
};

/// Splits m samples over a fixed number of shards, each with its own stream
/// derived from (seed, shard). Shards are merged in index order, so results
/// do not depend on the worker count. Times the sampling loop only.
ShardedRun run_sharded(std::uint64_t m, const RunConfig& config, const SamplerFactory& factory);

/// Sets wall_seconds-derived WNRV and, for epsilon > 0, the recommended
/// sample count (1.96)²·scv/ε².
void finalize_result(EstimatorResult& result, double epsilon);

inline constexpr unsigned kShardCount = 64;

}  // namespace rareis
