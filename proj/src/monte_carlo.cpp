#include "rareis/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rareis/errors.hpp"

namespace rareis {

ARReport& ARReport::operator+=(const ARReport& other) {
  proposals += other.proposals;
  accepts += other.accepts;
  envelope_constant = std::max(envelope_constant, other.envelope_constant);
  return *this;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  sum_.add(other.sum_);
  sum_sq_.add(other.sum_sq_);
  count_ += other.count_;
}

double MomentAccumulator::sample_variance() const {
  if (count_ < 2) return 0.0;
  const double n = double(count_);
  const double s1 = sum_.value();
  const double var = (sum_sq_.value() - s1 * (s1 / n)) / (n - 1.0);
  return std::max(var, 0.0);
}

EstimatorResult MomentAccumulator::summarize() const {
  EstimatorResult r;
  r.samples = count_;
  r.estimate = mean();
  r.second_moment = mean_square();
  const double var = sample_variance();
  r.variance_of_mean = count_ ? var / double(count_) : 0.0;
  r.ci95_half_width = 1.96 * std::sqrt(r.variance_of_mean);
  if (r.estimate > 0.0) r.scv = var / (r.estimate * r.estimate);
  return r;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RAREIS_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return unsigned(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ShardedRun run_sharded(std::uint64_t m, const RunConfig& config, const SamplerFactory& factory) {
  if (m == 0) throw ValidationError("sample count must be positive");
  std::vector<MomentAccumulator> moments(kShardCount);
  std::vector<ARReport> reports(kShardCount);
  std::atomic<unsigned> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const unsigned shard = next.fetch_add(1);
      if (shard >= kShardCount) return;
      try {
        const std::uint64_t count = m / kShardCount + (shard < m % kShardCount ? 1 : 0);
        if (count == 0) continue;
        RandomStream stream(config.seed, shard);
        SampleFunction draw = factory();
        for (std::uint64_t i = 0; i < count; ++i) moments[shard].add(draw(stream, reports[shard]));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(kShardCount);
      }
    }
  };

  const unsigned workers = std::min(resolve_workers(config.workers), kShardCount);
  const auto start = std::chrono::steady_clock::now();
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  const auto stop = std::chrono::steady_clock::now();
  if (failure) std::rethrow_exception(failure);

  MomentAccumulator total;
  ShardedRun out;
  for (unsigned s = 0; s < kShardCount; ++s) {
    total.merge(moments[s]);
    out.ar += reports[s];
  }
  out.result = total.summarize();
  out.result.seed = config.seed;
  out.result.wall_seconds = std::chrono::duration<double>(stop - start).count();
  finalize_result(out.result, 0.0);
  return out;
}

void finalize_result(EstimatorResult& result, double epsilon) {
  if (result.scv_defined() && result.samples > 0) {
    result.wnrv = result.scv / double(result.samples) * result.wall_seconds;
  }
  if (epsilon > 0.0 && result.scv_defined()) {
    result.recommended_samples =
        std::uint64_t(std::ceil(1.96 * 1.96 * result.scv / (epsilon * epsilon)));
  }
}

}  // namespace rareis
