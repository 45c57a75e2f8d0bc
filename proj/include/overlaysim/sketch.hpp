#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "overlaysim/common.hpp"
#include "overlaysim/graph.hpp"
#include "overlaysim/rng.hpp"

namespace osim {

// Hash-sketch machinery for finding an edge leaving a cluster. The numeric
// kernels here are medium-agnostic: the pure functions below evaluate them
// directly, while the protocol runtimes move the same values through
// star pulls (MergeStar) or tree broadcast-and-echo sweeps (HybridWFT).

struct SketchContext {
  std::uint32_t w = 1;   // id width
  std::uint64_t p = 2;   // smallest prime above the edge-id domain, fixed from n

  static SketchContext for_n(std::size_t n) {
    SketchContext c;
    c.w = id_width(n);
    c.p = next_prime_above(std::uint64_t{1} << (2 * c.w));
    return c;
  }
};

// h(x) = ((a*x + b) mod p) mod 2^wr
struct PairwiseHash {
  std::uint64_t a = 1;
  std::uint64_t b = 0;
  std::uint64_t p = 2;
  std::uint32_t wr = 1;

  static PairwiseHash draw(Rng& rng, std::uint64_t p, std::uint32_t wr) {
    PairwiseHash h;
    h.p = p;
    h.wr = wr;
    h.a = 1 + rng.below(p - 1);
    h.b = rng.below(p);
    return h;
  }

  std::uint64_t operator()(std::uint64_t x) const {
    const std::uint64_t m = static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(a) * x + b) % p);
    return m & ((std::uint64_t{1} << wr) - 1);
  }
};

// HPTestOut trial family: k pairwise hashes into {0,1}, all derived from one
// transmitted seed. Receivers reconstruct the family with from_seed.
struct ParityTrials {
  std::uint64_t seed = 0;
  std::uint64_t p = 2;
  std::uint32_t k = 1;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> coeff;

  static ParityTrials from_seed(std::uint64_t seed, std::uint64_t p, std::uint32_t k) {
    ParityTrials t;
    t.seed = seed;
    t.p = p;
    t.k = k;
    t.coeff.reserve(k);
    for (std::uint32_t j = 0; j < k; ++j) {
      Rng r = substream(seed, {j});
      t.coeff.emplace_back(1 + r.below(p - 1), r.below(p));
    }
    return t;
  }

  static ParityTrials draw(Rng& rng, std::uint64_t p, std::uint32_t k) {
    return from_seed(rng.next_u64(), p, k);
  }

  bool trial_bit(std::uint32_t j, std::uint64_t edge_code) const {
    const auto [a, b] = coeff[j];
    return (static_cast<std::uint64_t>((static_cast<__uint128_t>(a) * edge_code + b) % p) & 1) != 0;
  }
};

inline std::uint32_t hp_trial_count(std::size_t n, std::uint32_t c_hp = 2) {
  const std::uint32_t k = c_hp * ceil_log2(n);
  return k == 0 ? 1 : (k > 64 ? 64 : k);
}

// --- per-node contributions -------------------------------------------------

// Packed k trial parities of v's incident edge IDs.
inline std::uint64_t hpt_node_bits(const Graph& g, NodeId v, std::uint32_t w,
                                   const ParityTrials& trials) {
  std::uint64_t acc = 0;
  for (NodeId u : g.neighbors(v)) {
    const std::uint64_t code = EdgeRef(v, u).encoded(w);
    for (std::uint32_t j = 0; j < trials.k; ++j)
      if (trials.trial_bit(j, code)) acc ^= (std::uint64_t{1} << j);
  }
  return acc;
}

// Bit (i-1) = parity of |{e incident to v : h(e) < 2^i}|, i = 1..wr.
inline std::uint64_t parity_vector_node(const Graph& g, NodeId v, std::uint32_t w,
                                        const PairwiseHash& h) {
  std::uint64_t vec = 0;
  for (NodeId u : g.neighbors(v)) {
    const std::uint64_t hv = h(EdgeRef(v, u).encoded(w));
    for (std::uint32_t i = 1; i <= h.wr; ++i)
      if (hv < (std::uint64_t{1} << i)) vec ^= (std::uint64_t{1} << (i - 1));
  }
  return vec;
}

// XOR of encoded incident edge IDs hashed below 2^min.
inline std::uint64_t bracket_xor_node(const Graph& g, NodeId v, std::uint32_t w,
                                      const PairwiseHash& h, std::uint32_t min_bit) {
  std::uint64_t acc = 0;
  for (NodeId u : g.neighbors(v)) {
    const std::uint64_t code = EdgeRef(v, u).encoded(w);
    if (h(code) < (std::uint64_t{1} << min_bit)) acc ^= code;
  }
  return acc;
}

// Validity echo of one node for a candidate edge: whether v is an endpoint,
// and whether v can vouch the edge exists in G.
struct ValidityEcho {
  std::uint32_t endpoint_count = 0;  // candidate endpoints seen inside the cluster
  bool edge_real = false;

  void combine(const ValidityEcho& o) {
    endpoint_count += o.endpoint_count;
    edge_real = edge_real || o.edge_real;
  }
};

inline ValidityEcho validity_node(const Graph& g, NodeId v, const EdgeRef& cand) {
  ValidityEcho e;
  if (cand.lo >= g.n() || cand.hi >= g.n() || cand.lo >= cand.hi) return e;
  if (v == cand.lo || v == cand.hi) {
    e.endpoint_count = 1;
    const NodeId other = (v == cand.lo) ? cand.hi : cand.lo;
    e.edge_real = g.has_edge(v, other);
  }
  return e;
}

// --- the four-sweep state machine --------------------------------------------
//
// Sweep 1: trials seed down; packed trial XOR and degree sum up.
// Sweep 2: hash (a, b, wr) down; parity vector XOR up.
// Sweep 3: lowest odd bracket down; bracket edge-ID XOR up.
// Sweep 4: candidate edge down; endpoint/validity echo up.

class FindOutgoingCore {
 public:
  enum class State { Sweep1, Sweep2, Sweep3, Sweep4, DoneEmpty, DoneFound };

  FindOutgoingCore(const SketchContext& ctx, std::uint32_t k, Rng rng)
      : ctx_(ctx), k_(k), rng_(rng) {
    trials_ = ParityTrials::draw(rng_, ctx_.p, k_);
  }

  State state() const { return state_; }
  bool done() const { return state_ == State::DoneEmpty || state_ == State::DoneFound; }
  const ParityTrials& trials() const { return trials_; }
  const PairwiseHash& hash() const { return hash_; }
  std::uint32_t min_bit() const { return min_bit_; }
  const EdgeRef& candidate() const { return candidate_; }

  // The hash is drawn as soon as the degree sum is known; the star medium
  // learns the sum one round before the trial echoes arrive.
  void set_degree_sum(std::uint64_t degree_sum) {
    std::uint32_t wr = 1;
    while ((std::uint64_t{1} << wr) <= degree_sum) ++wr;
    hash_ = PairwiseHash::draw(rng_, ctx_.p, wr);
    have_hash_ = true;
  }

  void absorb_hpt(std::uint64_t hpt_xor) {
    if (!have_hash_) throw InvariantViolated("degree sum must precede the trial echo");
    state_ = (hpt_xor == 0) ? State::DoneEmpty  // one-sided: report no edge
                            : State::Sweep2;
  }

  void absorb_parity_vec(std::uint64_t parity_vec) {
    if (parity_vec == 0) {
      state_ = State::DoneEmpty;  // every bracket even, this attempt fails
      return;
    }
    min_bit_ = static_cast<std::uint32_t>(__builtin_ctzll(parity_vec)) + 1;
    state_ = State::Sweep3;
  }

  void absorb_bracket(std::uint64_t bracket_xor) {
    if (bracket_xor == 0) {
      state_ = State::DoneEmpty;
      return;
    }
    candidate_ = EdgeRef::decoded(bracket_xor, ctx_.w);
    state_ = State::Sweep4;
  }

  void absorb_validity(const ValidityEcho& echo) {
    state_ = (echo.endpoint_count == 1 && echo.edge_real) ? State::DoneFound
                                                          : State::DoneEmpty;
  }

 private:
  SketchContext ctx_;
  std::uint32_t k_;
  Rng rng_;
  ParityTrials trials_;
  PairwiseHash hash_;
  bool have_hash_ = false;
  std::uint32_t min_bit_ = 0;
  EdgeRef candidate_;
  State state_ = State::Sweep1;
};

// --- pure cluster-level evaluation -------------------------------------------

// One-sided outgoing-edge test: true means an outgoing edge certainly exists.
inline bool hp_test_out(const Graph& g, const std::vector<NodeId>& members,
                        const SketchContext& ctx, Rng& rng, std::uint32_t k) {
  ParityTrials trials = ParityTrials::draw(rng, ctx.p, k);
  std::uint64_t acc = 0;
  for (NodeId v : members) acc ^= hpt_node_bits(g, v, ctx.w, trials);
  return acc != 0;
}

// Offline evaluation of the full four-sweep protocol over a member set.
inline std::optional<EdgeRef> find_outgoing(const Graph& g, const std::vector<NodeId>& members,
                                            const SketchContext& ctx, Rng rng,
                                            std::uint32_t k) {
  FindOutgoingCore core(ctx, k, rng);
  std::uint64_t hpt = 0, degsum = 0;
  for (NodeId v : members) {
    hpt ^= hpt_node_bits(g, v, ctx.w, core.trials());
    degsum += g.degree(v);
  }
  core.set_degree_sum(degsum);
  core.absorb_hpt(hpt);
  if (core.state() != FindOutgoingCore::State::Sweep2) return std::nullopt;

  std::uint64_t pvec = 0;
  for (NodeId v : members) pvec ^= parity_vector_node(g, v, ctx.w, core.hash());
  core.absorb_parity_vec(pvec);
  if (core.state() != FindOutgoingCore::State::Sweep3) return std::nullopt;

  std::uint64_t sx = 0;
  for (NodeId v : members) sx ^= bracket_xor_node(g, v, ctx.w, core.hash(), core.min_bit());
  core.absorb_bracket(sx);
  if (core.state() != FindOutgoingCore::State::Sweep4) return std::nullopt;

  ValidityEcho echo;
  for (NodeId v : members) echo.combine(validity_node(g, v, core.candidate()));
  core.absorb_validity(echo);
  if (core.state() == FindOutgoingCore::State::DoneFound) return core.candidate();
  return std::nullopt;
}

}  // namespace osim
