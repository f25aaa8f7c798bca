/**
 * Counter-based pseudo-random streams.
 *
 * Every stream is identified by a 64-bit key derived from a seed and a path
 * of labels, and produces values by mixing the key with an incrementing
 * counter.  Two properties matter for the rest of the library:
 *
 *   - determinism: a (seed, path) pair produces the same sequence on every
 *     platform and under any parallel schedule, because all transformations
 *     below are exact integer/IEEE-754 operations (no std::*_distribution,
 *     whose output is implementation-defined);
 *   - independence by construction: distinct paths give statistically
 *     independent streams, so replications, servers, and mechanism
 *     invocations can consume their own streams concurrently.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace fdpcox {

namespace detail {

// SplitMix64 finalizer; also used as the avalanche for key/counter mixing.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

}  // namespace detail

/**
 * A single stream: key fixed at construction, counter advances per draw.
 */
class RngStream {
 public:
  RngStream() : key_(0), ctr_(0) {}

  explicit RngStream(std::uint64_t seed,
                     std::initializer_list<std::uint64_t> path = {}) {
    std::uint64_t s = seed;
    key_ = detail::splitmix_next(s);
    for (std::uint64_t label : path) absorb(label);
    ctr_ = 0;
  }

  /** Child stream for a sub-task; does not disturb this stream's counter. */
  RngStream child(std::uint64_t label) const {
    RngStream r = *this;
    r.absorb(label);
    r.ctr_ = 0;
    return r;
  }

  RngStream child(std::uint64_t a, std::uint64_t b) const {
    return child(a).child(b);
  }

  RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return child(a).child(b).child(c);
  }

  std::uint64_t next_u64() {
    return detail::mix64(key_ ^ (0x9E3779B97F4A7C15ULL * ++ctr_));
  }

  /** Uniform on (0, 1): 53-bit mantissa, zero mapped away from the boundary. */
  double next_double() {
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /** Uniform on (lo, hi). */
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /** Exponential with the given rate (mean 1/rate). */
  double next_exponential(double rate) {
    return -std::log(next_double()) / rate;
  }

  /**
   * Standard normal via Box-Muller.  Each call consumes exactly two uniforms
   * and returns one variate, so the draw count per call is fixed and the
   * stream position stays predictable.
   */
  double next_normal() {
    const double u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  void absorb(std::uint64_t label) {
    key_ = detail::mix64(key_ ^ detail::mix64(label + 0x9E3779B97F4A7C15ULL));
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace fdpcox
