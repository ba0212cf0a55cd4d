#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace stochem {

/// Seeded, splittable 64-bit generator with pinned sampling algorithms.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Every derived quantity (bounded integers, uniforms, normals,
/// gammas) is computed here rather than through <random> distributions, whose
/// algorithms are implementation-defined. Bump kName if any of them change.
class Rng {
 public:
  static constexpr std::string_view kName = "stochem-mt19937_64-v1";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream keyed by `key`. Does not advance this stream.
  Rng split(std::uint64_t key) const;
  Rng split(std::string_view key) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on {0, ..., bound-1} by Lemire's multiply-and-reject; unbiased.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Standard normal (Marsaglia polar method, spare value discarded).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);
  std::vector<double> dirichlet(std::size_t dim, double concentration);
  /// Index drawn with the given (not necessarily normalized) weights.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used for seed derivation.
std::uint64_t mix64(std::uint64_t x);
/// FNV-1a over bytes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace stochem
