#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

#include "ginv/hash.hpp"

namespace ginv {

// Stream purposes used when deriving per-graph generators.
enum class StreamPurpose : std::uint64_t {
  kGraphSize = 1,
  kVertexLatent = 2,
  kEdgeNoise = 3,
  kCensusSampling = 4,
  kInit = 5,
  kRegularizer = 6,
  kBoundCheck = 7,
};

// A generator keyed by a path of integers (seed, dataset, index, purpose, ...).
// Two streams with different keys are statistically independent, so graphs
// can be generated in any order or in parallel with identical results.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key = 0) : engine_(splitmix64(key)) {}

  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_key(seed, path));
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; used for edge noise so that W = 0 never yields an edge.
  double uniform_open_closed() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it exactly uniform.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller, independent of the standard library's
  // distribution implementation.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open_closed();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ginv
