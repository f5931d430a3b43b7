#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace endorhythm {

// Seeded generator with distribution helpers whose output depends only on
// the mt19937_64 bit stream. std::*_distribution results differ between
// standard library implementations, which would make generated corpora
// toolchain dependent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Deterministic generator for a tuple of keys (e.g. seed, kind, index).
  static Rng derive(std::initializer_list<std::uint64_t> keys) {
    return Rng(mix(keys));
  }

  static std::uint64_t mix(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (std::uint64_t k : keys) {
      h ^= splitmix(k + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
    }
    return splitmix(h);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), rejection sampled so there is no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace endorhythm
