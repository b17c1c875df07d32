#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace conex {

/// Purpose tags for the independent random streams derived from one root seed.
enum class Stream : std::uint64_t {
  Environment = 1,
  Rollout = 2,
  Mixture = 3,
  Offline = 4,
};

/// SplitMix64 finalizer. Used only to derive well-separated seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` for trial `trial` under `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial,
                                    Stream stream) noexcept {
  return mix_seed(mix_seed(mix_seed(root) ^ trial) ^ static_cast<std::uint64_t>(stream));
}

/// Deterministic random stream. Wraps mt19937_64 and draws uniforms with a
/// fixed bit recipe so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Unit-rate exponential.
  double exponential();

  /// Index drawn from a probability vector by inverse CDF. The last index
  /// with positive mass absorbs rounding in the cumulative sum.
  std::size_t categorical(std::span<const double> probs);

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace conex
