#pragma once

#include <cstdint>
#include <initializer_list>

namespace osim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based stream: identical draws on every platform and run.
// Used instead of <random> engines+distributions, whose outputs are not
// specified bit-exactly across standard library implementations.
class Rng {
 public:
  Rng() : state_(0x853c49e6748fea9bull) {}
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = n * (~std::uint64_t{0} / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  bool coin() { return (next_u64() & 1) != 0; }

  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Substream derivation: mixes the master seed with a tag sequence so that
// per-node / per-phase / per-purpose streams are independent of processing
// order. Identical master seed and tags give identical streams.
inline Rng substream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = master_seed ^ 0x6a09e667f3bcc909ull;
  detail::splitmix64(s);
  for (std::uint64_t t : tags) {
    s ^= t + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
    detail::splitmix64(s);
  }
  return Rng(s);
}

// Stream purposes; keep values stable, they pin the determinism contract.
enum class StreamTag : std::uint64_t {
  GraphGen = 1,
  SketchPhase = 2,
  ColorPhase = 3,
  Rc2tCoin = 4,
  TokenWalk = 5,
  Assignment = 6,
  Harness = 7,
  FuzzCase = 8,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace osim
