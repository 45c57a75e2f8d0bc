#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace osim {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct InvalidParams : std::runtime_error {
  explicit InvalidParams(const std::string& what) : std::runtime_error(what) {}
};

struct TooLarge : std::runtime_error {
  explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct InvariantViolated : std::logic_error {
  explicit InvariantViolated(const std::string& what) : std::logic_error(what) {}
};

// Smallest w with 2^w >= x, and at least 1.
inline std::uint32_t ceil_log2(std::uint64_t x) {
  std::uint32_t w = 0;
  while ((std::uint64_t{1} << w) < x) ++w;
  return w == 0 ? 1 : w;
}

// Word length of node identifiers for an n-node run.
inline std::uint32_t id_width(std::size_t n) { return ceil_log2(n); }

inline std::uint64_t words_for_bits(std::uint64_t bits, std::uint32_t w) {
  return (bits + w - 1) / w;
}

// Undirected input-graph edge, normalized lo < hi.
struct EdgeRef {
  NodeId lo = kNoNode;
  NodeId hi = kNoNode;

  EdgeRef() = default;
  EdgeRef(NodeId a, NodeId b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

  bool valid() const { return lo != kNoNode && hi != kNoNode && lo < hi; }
  bool operator==(const EdgeRef&) const = default;
  auto operator<=>(const EdgeRef&) const = default;

  // lo * 2^w + hi; injective for w = id_width(n), never zero since hi >= 1.
  std::uint64_t encoded(std::uint32_t w) const {
    return (std::uint64_t{lo} << w) | std::uint64_t{hi};
  }
  static EdgeRef decoded(std::uint64_t code, std::uint32_t w) {
    EdgeRef e;
    e.lo = static_cast<NodeId>(code >> w);
    e.hi = static_cast<NodeId>(code & ((std::uint64_t{1} << w) - 1));
    return e;
  }
};

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<__uint128_t>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
inline bool is_prime_u64(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (x == p) return true;
    if (x % p == 0) return false;
  }
  std::uint64_t d = x - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t v = detail::powmod_u64(a, d, x);
    if (v == 1 || v == x - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      v = detail::mulmod_u64(v, v, x);
      if (v == x - 1) { composite = false; break; }
    }
    if (composite) return false;
  }
  return true;
}

inline std::uint64_t next_prime_above(std::uint64_t x) {
  std::uint64_t c = x + 1;
  while (!is_prime_u64(c)) ++c;
  return c;
}

}  // namespace osim
