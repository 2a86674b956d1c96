#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace barylab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. Every variate is derived from raw 64-bit
// draws so results do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent stream for job `stream` of an experiment seeded by `master`.
  static Rng split(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(master) ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  double normal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential() { return -std::log(1.0 - uniform()); }

  // Symmetric Dirichlet(1): uniform on the probability simplex.
  std::vector<double> dirichlet(std::size_t k) {
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
      x = exponential();
      total += x;
    }
    for (auto& x : w) x /= total;
    return w;
  }

  std::size_t categorical(std::span<const double> weights) {
    double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return i;
    return 0;
  }

  std::vector<std::size_t> multinomial(std::size_t n, std::span<const double> weights) {
    std::vector<std::size_t> counts(weights.size(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[categorical(weights)];
    return counts;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace barylab
