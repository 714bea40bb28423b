#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace mglm {

// SplitMix64 (Steele/Lea/Vigna). Chosen because the whole generator is a
// handful of fully specified integer operations, so every stream is
// bit-reproducible across platforms and compilers. Streams are derived from
// the seed, one per purpose (corpus generation, canvas sampling, decoding),
// so adding draws to one consumer never perturbs another.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection sampling, no modulo bias.
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be > 0");
    uint64_t threshold = (0ull - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform integer in [lo, hi], inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniform_int: lo > hi");
    return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Child stream derived from this stream's seed (not its position), so a
  // fork is stable no matter how much the parent has been consumed.
  Rng fork(uint64_t label) const { return Rng(mix(seed_, label)); }

  // Named top-level stream for one purpose.
  static Rng stream(uint64_t seed, std::string_view purpose) {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the purpose tag
    for (char c : purpose) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return Rng(mix(seed, h));
  }

  uint64_t seed() const { return seed_; }

 private:
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a ^ (b * 0x9e3779b97f4a7c15ull + 0x165667b19e3779f9ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t state_;
};

}  // namespace mglm
