#pragma once

#include <cstdint>

namespace gep {

// Deterministic splittable PRNG (xoshiro256** seeded through splitmix64).
// Every stochastic operation in the library derives its stream from an
// explicit seed plus a tag, so identical seeds reproduce identical runs
// regardless of call order elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  // Independent child stream; children with distinct tags do not overlap
  // in any way that matters for simulation purposes.
  Rng split(std::uint64_t tag) const {
    return Rng(state_[0] ^ splitmix_of(tag ^ 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53-bit resolution; platform-independent.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection-free bias is negligible for our n; keep it simple and fast.
    return next_u64() % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t splitmix_of(std::uint64_t v) {
    std::uint64_t s = v;
    return splitmix64(s);
  }

  std::uint64_t state_[4];
};

}  // namespace gep
