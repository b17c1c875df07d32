#include "conex/random.hpp"

#include <cmath>
#include <stdexcept>

namespace conex {

double Rng::exponential() { return -std::log1p(-uniform()); }

std::size_t Rng::categorical(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
  const double u = uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("below: empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

}  // namespace conex
