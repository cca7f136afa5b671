#include "mpmiqp/rng.hpp"

#include <cmath>
#include <numbers>

#include "mpmiqp/errors.hpp"

namespace mpmiqp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::string_view name)
    : key_(splitmix64_mix(seed ^ splitmix64_mix(fnv1a64(name)))) {}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGolden);
}

double RandomStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t RandomStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgumentError("uniform_int: empty range");
  const auto span = static_cast<double>(hi - lo + 1);
  auto k = static_cast<std::int64_t>(std::floor(uniform() * span));
  if (k > hi - lo) k = hi - lo;
  return lo + k;
}

double RandomStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgumentError("poisson mean must be finite and >= 0");
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double chunk = mean > 30.0 ? 30.0 : mean;
    mean -= chunk;
    double p = std::exp(-chunk);
    double cdf = p;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= chunk / static_cast<double>(k);
      cdf += p;
      if (p == 0.0) break;
    }
    total += k;
  }
  return total;
}

}  // namespace mpmiqp
