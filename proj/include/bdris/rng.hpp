#pragma once

#include <cstdint>
#include <initializer_list>
#include <cmath>
#include <random>
#include <utility>

namespace bdris {

/// SplitMix64 finalizer; used to derive independent sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the sub-stream addressed by `path` under `seed`. Distinct paths
/// give statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(seed);
  for (std::uint64_t p : path)
    s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Sub-stream tags. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
  kBsRis = 1,
  kUserLink = 2,
  kUserAngle = 3,
  kRisInit = 4,
};

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(seed, path));
}

/// Standard normal draw by Box-Muller on top of the 64-bit engine; kept out
/// of std::normal_distribution so streams do not depend on library internals.
class GaussianSource {
public:
  explicit GaussianSource(Engine engine) : engine_(std::move(engine)) {}

  double uniform() {
    // 53-bit mantissa in (0, 1].
    return (double(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

private:
  Engine engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace bdris
