#pragma once

#include <cstdint>
#include <string_view>

namespace mpmiqp {

// Counter-based generator: draw k of a stream is mix(key + (k+1) * golden),
// where mix is the SplitMix64 finalizer and key = mix(seed ^ mix(fnv1a(name))).
// Each named stream is independent of the others, so adding a stream never
// shifts the values of an existing one.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Integer uniform on [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via Box-Muller (one value per two uniforms).
  double normal();
  // Poisson by CDF inversion; means above 30 are split into chunks.
  std::uint64_t poisson(double mean);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace mpmiqp
