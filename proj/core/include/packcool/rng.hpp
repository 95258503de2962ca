#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace packcool {

// Deterministic random source. std::mt19937_64 supplies the bit stream (its
// output sequence is fixed by the standard); the real-valued transforms are
// spelled out here so sampled values do not depend on the standard library's
// distribution implementations. Every consumer in the project goes through
// this class, which is what makes byte-identical reruns possible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Box-Muller draw; uses a fresh pair of uniforms per call (no cached
  /// spare), keeping the stream position a pure function of the call count.
  double normal(double mean, double stddev) {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Integer in [0, n). Modulo bias is below 2^-53 for the n used here.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  /// Coin flip: true with probability 1/2.
  bool coin() { return (eng_() >> 63) != 0; }

  /// Fisher-Yates shuffle of an index vector.
  void shuffle(std::vector<std::size_t>& idx) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(idx[i - 1], idx[j]);
    }
  }

  /// splitmix64 step, used to derive independent stream seeds from one master
  /// seed plus a fixed tag per stream.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return mix(seed ^ mix(tag));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace packcool
