#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace oscint {

/// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

/// FNV-1a; lets call sites derive streams from a label ("split", "init").
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return derive_seed(base, h);
}

/// Deterministic generator. Distributions are written out here rather than
/// taken from <random> so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi); never returns hi even after rounding.
  double uniform(double lo, double hi) {
    const double v = lo + (hi - lo) * uniform01();
    return v < hi ? v : std::nextafter(hi, lo);
  }

  /// Uniform integer on [0, n) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace oscint
