#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace icee {

// xoshiro256** with splitmix64 seeding. Hand-rolled distributions so that
// generated byte streams do not depend on the standard library version.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return int(next_u64() % uint64_t(n)); }

  // Standard normal via Box-Muller (no cached spare, keeps state linear).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Index sampled proportionally to the (nonnegative) weights.
  template <typename Container>
  int categorical(const Container& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    int last = 0;
    int i = 0;
    for (double w : weights) {
      if (w > 0.0) {
        last = i;
        if (u < w) return i;
        u -= w;
      }
      ++i;
    }
    return last;  // numeric fall-through lands on the last positive weight
  }

  bool bernoulli(double p) { return uniform() < p; }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t state_[4];
};

// Stable derivation of purpose-specific seeds from one base seed.
inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index = 0) {
  uint64_t h = base ^ 0x9e3779b97f4a7c15ULL;
  for (char c : tag) {
    h ^= uint64_t(uint8_t(c));
    h *= 0x100000001b3ULL;
  }
  h ^= index + 0x632be59bd9b4e019ULL;
  uint64_t x = h;
  return Rng::splitmix64(x);
}

}  // namespace icee
