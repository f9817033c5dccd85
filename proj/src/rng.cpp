#include "avf/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace avf {

Rng Rng::keyed(std::initializer_list<std::uint64_t> keys) {
  // splitmix64 fold, then hand the mixed words to seed_seq.
  std::vector<std::uint32_t> words;
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t k : keys) {
    state ^= k + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    words.push_back(static_cast<std::uint32_t>(z));
    words.push_back(static_cast<std::uint32_t>(z >> 32));
  }
  Rng rng;
  std::seed_seq seq(words.begin(), words.end());
  rng.engine_.seed(seq);
  return rng;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace avf
