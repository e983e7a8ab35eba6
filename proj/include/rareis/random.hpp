#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rareis {

/// A single-owner random stream. Sub-streams are derived deterministically
/// from a (seed, index) pair so sharded runs replay bit-identically.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0 || u >= 1.0);
    return u;
  }

  double normal() { return normal_(engine_); }

  /// Gamma variate with the given shape and scale.
  double gamma(double shape, double scale) {
    return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, scale));
  }

  long poisson(double mean) {
    return poisson_(engine_, std::poisson_distribution<long>::param_type(mean));
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::gamma_distribution<double> gamma_;
  std::poisson_distribution<long> poisson_;
};

}  // namespace rareis
