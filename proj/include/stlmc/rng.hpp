#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace stlmc {

/// SplitMix64 finalizer; used to derive decorrelated per-replica seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` of family `stream` under a root seed. Distinct
/// (root, stream, index) triples give independent generators, so results do
/// not depend on how replicas are scheduled across workers.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  return mix_seed(mix_seed(mix_seed(root) ^ stream) ^ (index * 0x632be59bd9b4e019ULL));
}

/// Explicitly seeded generator with a persistent normal sampler. Draw order is
/// fixed by the caller, so a given seed reproduces a trajectory bit for bit.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng stream(std::uint64_t root, std::uint64_t family, std::uint64_t index) {
    return Rng(derive_seed(root, family, index));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  double normal() { return normal_(engine_); }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal_(engine_);
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace stlmc
