//
// Counter-based random streams. A stream is a 64-bit key plus a counter;
// every draw is a pure function of (key, counter), so streams keyed by
// (seed, purpose, index...) are reproducible and mutually independent
// regardless of evaluation order or thread count.
//

#ifndef CLEARSIM_RNG_H_
#define CLEARSIM_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace clearsim {

// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  for (auto c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr uint64_t hash_combine(uint64_t h, uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

class rng_stream {
 public:
  constexpr rng_stream() = default;
  constexpr explicit rng_stream(uint64_t key) : key_(key) {}

  // Stream for (seed, purpose, indices...).
  static rng_stream substream(
      uint64_t seed, std::string_view purpose, std::initializer_list<uint64_t> indices = {}) {
    auto h = hash_combine(mix64(seed), fnv1a64(purpose));
    for (auto i : indices) h = hash_combine(h, i);
    return rng_stream(h);
  }

  constexpr uint64_t next_u64() {
    return mix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased.
  uint64_t uniform_index(uint64_t n) {
    if (n <= 1) return 0;
    auto limit = UINT64_MAX - UINT64_MAX % n;
    while (true) {
      auto r = next_u64();
      if (r < limit) return r % n;
    }
  }

  constexpr uint64_t key() const { return key_; }
  constexpr uint64_t counter() const { return counter_; }

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace clearsim

#endif
