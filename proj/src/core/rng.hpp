#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace unfactor {

// xoshiro256** with splitmix64 seeding. The full generator state (including
// the cached Box-Muller spare) is plain data, so checkpoints can restore the
// stream bit-exactly.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed) { reseed(seed); }

  void reseed(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
    has_spare_ = false;
    spare_ = 0.0;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Rejection-free modulo bias is negligible for our n (< 2^32), but the
    // widening-multiply trick is cheap and exact enough for reproducibility.
    return static_cast<uint64_t>((__uint128_t(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  float normal_f() { return static_cast<float>(normal()); }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<uint32_t> permutation(size_t n) {
    std::vector<uint32_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = static_cast<uint32_t>(i);
    for (size_t i = n; i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

  // Serialized state: 4 state words, spare flag, spare bits.
  struct State {
    uint64_t s[4];
    uint64_t has_spare;
    uint64_t spare_bits;
  };

  State save() const {
    State st;
    for (int i = 0; i < 4; ++i) st.s[i] = s_[i];
    st.has_spare = has_spare_ ? 1 : 0;
    double sp = spare_;
    static_assert(sizeof(double) == sizeof(uint64_t));
    __builtin_memcpy(&st.spare_bits, &sp, sizeof(uint64_t));
    return st;
  }

  void restore(const State& st) {
    for (int i = 0; i < 4; ++i) s_[i] = st.s[i];
    has_spare_ = st.has_spare != 0;
    __builtin_memcpy(&spare_, &st.spare_bits, sizeof(double));
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace unfactor
