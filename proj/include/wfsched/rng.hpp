#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace wfsched {

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// A seedable stream keyed by (seed, k1, k2, ...). Streams with different
/// keys never share state, so draw order across tasks/trials/threads does
/// not change any value. mt19937_64 output is fixed by the standard and the
/// conversions below avoid the implementation-defined std distributions.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
    engine_.seed(h);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

 private:
  std::mt19937_64 engine_;
};

// Stream kinds keep task, trial and generator streams disjoint.
enum class StreamKind : std::uint64_t { ActualTime = 1, Failure = 2, MonteCarlo = 3, Generator = 4 };

inline RngStream make_stream(std::uint64_t seed, StreamKind kind, std::uint64_t index) {
  return RngStream(seed, {static_cast<std::uint64_t>(kind), index});
}

}  // namespace wfsched
