#pragma once

#include <optional>
#include <vector>

#include "overlaysim/gossip_engine.hpp"
#include "overlaysim/graph.hpp"
#include "overlaysim/rng.hpp"
#include "overlaysim/sketch.hpp"

namespace osim {

enum class Color : std::uint8_t { Red, Blue };

struct PhaseBudgetExceeded : std::runtime_error {
  PhaseBudgetExceeded() : std::runtime_error("phase budget exceeded") {}
};

struct MergeStarConfig {
  ModelConfig model = ModelConfig{GossipReplyModel{}, true, 16};
  std::uint32_t c_hp = 2;               // HPTestOut trials per log n
  std::uint32_t max_phases_factor = 40;  // phases <= factor * ceil(log2 n)
  std::uint64_t seed = 0;
};

struct MergeStarResult {
  bool success = false;
  NodeId center = kNoNode;
  std::vector<NodeId> leader;
  MetricsLedger ledger;
  std::size_t phases = 0;
  std::uint64_t reported_rounds = 0;  // native rounds scaled for b < log n
  // (cc before, cc after) per phase, for the contraction statistics.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> contraction;

  std::vector<std::pair<NodeId, NodeId>> overlay_edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId v = 0; v < leader.size(); ++v)
      if (leader[v] != v) out.emplace_back(v, leader[v]);
    return out;
  }
};

namespace merge_star_detail {

enum Tag : std::uint16_t {
  kPull1 = 1,
  kInfo1,
  kEcho2,
  kInfo2,
  kEcho3,
  kInfo3,
  kEcho4,
  kInfo4,
  kPull,
  kRequest,
  kLeaderOf,
  kRequest2,
  kAccept,
  kReject,
  kUpdate,
  kNewLeader,
  kHold,
};

enum class SweepStatus : std::uint64_t { Ongoing = 0, NoEdge = 1, Found = 2 };

struct LeaderState {
  std::optional<FindOutgoingCore> core;
  Color color = Color::Red;
  std::uint64_t degree_sum = 0;
  std::vector<NodeId> members;
  std::optional<EdgeRef> edge;       // validated outgoing edge
  NodeId external = kNoNode;         // outside endpoint of the edge
  NodeId external_leader = kNoNode;  // learned in round 5
  bool accepted = false;             // request accepted in round 6
};

struct MemberState {
  ParityTrials trials;
  PairwiseHash hash;
  SweepStatus status = SweepStatus::Ongoing;
  std::uint32_t min_bit = 0;
  EdgeRef candidate;
};

}  // namespace merge_star_detail

// Boruvka-style star-overlay construction in GOSSIP-reply. Each phase costs
// exactly seven engine rounds: four for the outgoing-edge sketch, one to
// request along the sampled edge and learn the target's leader, one to
// forward the request to that leader for the color decision, one to hand the
// new leader id to the members. Cluster members keep one star edge to their
// leader, so every cluster stays a star between phases.
class MergeStarRun {
 public:
  MergeStarRun(const Graph& g, const MergeStarConfig& cfg)
      : g_(&g),
        cfg_(cfg),
        engine_(g, cfg.model),
        ctx_(SketchContext::for_n(g.n())),
        k_(hp_trial_count(g.n(), cfg.c_hp)),
        leader_(g.n()),
        leaders_(g.n()),
        members_(g.n()) {
    if (!g.connected()) throw InvalidParams("merge_star: input graph must be connected");
    for (NodeId v = 0; v < g.n(); ++v) leader_[v] = v;
  }

  MergeStarResult run() {
    MergeStarResult res;
    const std::size_t max_phases =
        std::size_t{cfg_.max_phases_factor} * ceil_log2(g_->n());
    std::uint32_t cc = cluster_count();
    engine_.ledger().cluster_count_per_phase.push_back(cc);
    while (cc > 1 && res.phases < max_phases) {
      run_phase(res.phases);
      const std::uint32_t cc_next = cluster_count();
      res.contraction.emplace_back(cc, cc_next);
      engine_.ledger().cluster_count_per_phase.push_back(cc_next);
      cc = cc_next;
      res.phases += 1;
      check_star_invariant();
    }
    res.success = (cc == 1);
    res.leader = leader_;
    res.center = leader_[0];
    res.ledger = engine_.ledger();
    res.reported_rounds =
        simulate_reduced_bandwidth(res.ledger.rounds, cfg_.model.b_bits_for(g_->n()), g_->n());
    return res;
  }

 private:
  using Tag = merge_star_detail::Tag;
  using SweepStatus = merge_star_detail::SweepStatus;
  using LeaderState = merge_star_detail::LeaderState;
  using MemberState = merge_star_detail::MemberState;

  bool is_leader(NodeId v) const { return leader_[v] == v; }
  const std::uint32_t w() const { return engine_.word_width(); }

  std::uint32_t cluster_count() const {
    std::uint32_t cc = 0;
    for (NodeId v = 0; v < g_->n(); ++v)
      if (is_leader(v)) ++cc;
    return cc;
  }

  void check_star_invariant() const {
    for (NodeId v = 0; v < g_->n(); ++v)
      if (leader_[leader_[v]] != leader_[v])
        throw InvariantViolated("cluster member points at a non-leader");
  }

  void run_phase(std::size_t phase) {
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      LeaderState& st = leaders_[u];
      st = LeaderState{};
      st.core.emplace(ctx_, k_,
                      substream(cfg_.seed, {tag(StreamTag::SketchPhase), phase, u}));
      Rng color_rng = substream(cfg_.seed, {tag(StreamTag::ColorPhase), phase, u});
      st.color = color_rng.coin() ? Color::Red : Color::Blue;
    }
    round1(phase);
    round2();
    round3();
    round4();
    round5();
    round6();
    round7();
  }

  // Round 1: members report their input degree; leaders answer with the
  // sketch description (trial seed, hash coefficients, bracket count).
  void round1(std::size_t phase) {
    (void)phase;
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (is_leader(v)) continue;
      Payload p;
      p.add_value(g_->degree(v), w() + 1);
      engine_.contact(v, leader_[v], Tag::kPull1, std::move(p));
    }
    engine_.deliver_contacts();
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      LeaderState& st = leaders_[u];
      st.degree_sum = g_->degree(u);
      for (const Message& m : engine_.contacts_received(u)) {
        st.members.push_back(m.src);
        st.degree_sum += m.vals[0];
      }
      st.core->set_degree_sum(st.degree_sum);
      const PairwiseHash& h = st.core->hash();
      for (const Message& m : engine_.contacts_received(u)) {
        Payload p;
        p.add_value(st.core->trials().seed, 2 * w());
        p.add_value(h.a, 2 * w() + 1);
        p.add_value(h.b, 2 * w() + 1);
        p.add_value(h.wr, 6);
        engine_.reply(u, m.src, Tag::kInfo1, std::move(p));
      }
    }
    engine_.end_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      for (const Message& m : engine_.replies_received(v)) {
        if (m.tag != Tag::kInfo1) continue;
        MemberState& ms = members_[v];
        ms.trials = ParityTrials::from_seed(m.vals[0], ctx_.p, k_);
        ms.hash = PairwiseHash{m.vals[1], m.vals[2], ctx_.p,
                               static_cast<std::uint32_t>(m.vals[3])};
        ms.status = SweepStatus::Ongoing;
      }
    }
  }

  // Round 2: trial parities and the bracket parity vector echo together;
  // leaders answer with the verdict and the lowest odd bracket.
  void round2() {
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (is_leader(v)) continue;
      const MemberState& ms = members_[v];
      Payload p;
      p.add_value(hpt_node_bits(*g_, v, w(), ms.trials), k_);
      p.add_value(parity_vector_node(*g_, v, w(), ms.hash), ms.hash.wr);
      engine_.contact(v, leader_[v], Tag::kEcho2, std::move(p));
    }
    engine_.deliver_contacts();
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      LeaderState& st = leaders_[u];
      std::uint64_t hpt = hpt_node_bits(*g_, u, w(), st.core->trials());
      std::uint64_t pvec = parity_vector_node(*g_, u, w(), st.core->hash());
      for (const Message& m : engine_.contacts_received(u)) {
        hpt ^= m.vals[0];
        pvec ^= m.vals[1];
      }
      st.core->absorb_hpt(hpt);
      if (!st.core->done()) st.core->absorb_parity_vec(pvec);
      const SweepStatus status =
          st.core->done() ? SweepStatus::NoEdge : SweepStatus::Ongoing;
      for (const Message& m : engine_.contacts_received(u)) {
        Payload p;
        p.add_value(static_cast<std::uint64_t>(status), 2);
        p.add_value(st.core->min_bit(), 6);
        engine_.reply(u, m.src, Tag::kInfo2, std::move(p));
      }
    }
    engine_.end_round();
    for (NodeId v = 0; v < g_->n(); ++v)
      for (const Message& m : engine_.replies_received(v))
        if (m.tag == Tag::kInfo2) {
          members_[v].status = static_cast<SweepStatus>(m.vals[0]);
          members_[v].min_bit = static_cast<std::uint32_t>(m.vals[1]);
        }
  }

  // Round 3: bracket edge-id XOR up; candidate edge (unvalidated) down.
  void round3() {
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (is_leader(v)) continue;
      const MemberState& ms = members_[v];
      Payload p;
      const std::uint64_t sx = ms.status == SweepStatus::Ongoing
                                   ? bracket_xor_node(*g_, v, w(), ms.hash, ms.min_bit)
                                   : 0;
      p.add_value(sx, 2 * w());
      engine_.contact(v, leader_[v], Tag::kEcho3, std::move(p));
    }
    engine_.deliver_contacts();
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      LeaderState& st = leaders_[u];
      if (!st.core->done()) {
        std::uint64_t sx = bracket_xor_node(*g_, u, w(), st.core->hash(), st.core->min_bit());
        for (const Message& m : engine_.contacts_received(u)) sx ^= m.vals[0];
        st.core->absorb_bracket(sx);
      }
      const bool ongoing = st.core->state() == FindOutgoingCore::State::Sweep4;
      const EdgeRef cand = ongoing ? st.core->candidate() : EdgeRef{};
      for (const Message& m : engine_.contacts_received(u)) {
        Payload p;
        p.add_value(ongoing ? static_cast<std::uint64_t>(SweepStatus::Ongoing)
                            : static_cast<std::uint64_t>(SweepStatus::NoEdge),
                    2);
        p.add_value(ongoing ? cand.lo : 0, w());
        p.add_value(ongoing ? cand.hi : 0, w());
        engine_.reply(u, m.src, Tag::kInfo3, std::move(p));
      }
    }
    engine_.end_round();
    for (NodeId v = 0; v < g_->n(); ++v)
      for (const Message& m : engine_.replies_received(v))
        if (m.tag == Tag::kInfo3) {
          members_[v].status = static_cast<SweepStatus>(m.vals[0]);
          members_[v].candidate = EdgeRef(static_cast<NodeId>(m.vals[1]),
                                          static_cast<NodeId>(m.vals[2]));
        }
  }

  // Round 4: the inside endpoint vouches for the candidate (and names both
  // endpoints, which is how the leader legitimately learns the outside id);
  // leaders distribute the sampled edge and the phase color.
  void round4() {
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (is_leader(v)) continue;
      const MemberState& ms = members_[v];
      Payload p;
      ValidityEcho echo;
      if (ms.status == SweepStatus::Ongoing) echo = validity_node(*g_, v, ms.candidate);
      p.add_value(echo.endpoint_count != 0 && echo.edge_real ? 1 : 0, 1);
      if (echo.endpoint_count != 0 && echo.edge_real) {
        p.add_id(ms.candidate.lo);
        p.add_id(ms.candidate.hi);
      }
      engine_.contact(v, leader_[v], Tag::kEcho4, std::move(p));
    }
    engine_.deliver_contacts();
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      LeaderState& st = leaders_[u];
      if (st.core->state() == FindOutgoingCore::State::Sweep4) {
        // Exactly-one-endpoint check is leader-local: the round-1 contacts
        // name the member set.
        const EdgeRef cand = st.core->candidate();
        ValidityEcho total;
        total.combine(validity_node(*g_, u, cand));
        std::uint32_t inside = (cand.lo == u || cand.hi == u) ? 1 : 0;
        bool vouched = total.edge_real;
        for (const Message& m : engine_.contacts_received(u)) {
          if (m.vals[0] != 0) vouched = true;
          if (cand.lo == m.src || cand.hi == m.src) ++inside;
        }
        ValidityEcho folded;
        folded.endpoint_count = inside;
        folded.edge_real = vouched;
        st.core->absorb_validity(folded);
        if (st.core->state() == FindOutgoingCore::State::DoneFound) {
          st.edge = cand;
          st.external = (inside_node(cand, u) == cand.lo) ? cand.hi : cand.lo;
        }
      }
      for (const Message& m : engine_.contacts_received(u)) {
        Payload p;
        p.add_value(st.edge ? static_cast<std::uint64_t>(SweepStatus::Found)
                            : static_cast<std::uint64_t>(SweepStatus::NoEdge),
                    2);
        p.add_value(st.color == Color::Red ? 1 : 0, 1);
        if (st.edge) {
          p.add_id(st.edge->lo);
          p.add_id(st.edge->hi);
        }
        engine_.reply(u, m.src, Tag::kInfo4, std::move(p));
      }
    }
    engine_.end_round();
  }

  NodeId inside_node(const EdgeRef& e, NodeId leader_id) const {
    if (e.lo == leader_id || leader_[e.lo] == leader_id) return e.lo;
    return e.hi;
  }

  // Round 5: leaders with a sampled edge request along it; the contacted
  // node answers with its own leader. Members keep pulling.
  void round5() {
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (!is_leader(v)) {
        engine_.contact(v, leader_[v], Tag::kPull, Payload{});
        continue;
      }
      LeaderState& st = leaders_[v];
      if (st.edge) {
        if (leader_[st.external] == v)
          throw InvariantViolated("sampled edge does not leave the cluster");
        Payload p;
        p.add_value(st.color == Color::Red ? 1 : 0, 1);
        engine_.contact(v, st.external, Tag::kRequest, std::move(p));
      }
    }
    engine_.deliver_contacts();
    for (NodeId x = 0; x < g_->n(); ++x) {
      for (const Message& m : engine_.contacts_received(x)) {
        if (m.tag == Tag::kRequest) {
          Payload p;
          p.add_id(leader_[x]);
          engine_.reply(x, m.src, Tag::kLeaderOf, std::move(p));
        } else if (m.tag == Tag::kPull) {
          engine_.reply(x, m.src, Tag::kHold, Payload{});
        }
      }
    }
    engine_.end_round();
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      for (const Message& m : engine_.replies_received(u))
        if (m.tag == Tag::kLeaderOf) leaders_[u].external_leader = m.ids[0];
    }
  }

  // Round 6: forward the request to the target cluster's leader; accept iff
  // the accepting cluster is Red and the requesting cluster is Blue.
  void round6() {
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (!is_leader(v)) {
        engine_.contact(v, leader_[v], Tag::kPull, Payload{});
        continue;
      }
      LeaderState& st = leaders_[v];
      if (st.external_leader != kNoNode) {
        Payload p;
        p.add_value(st.color == Color::Red ? 1 : 0, 1);
        engine_.contact(v, st.external_leader, Tag::kRequest2, std::move(p));
      }
    }
    engine_.deliver_contacts();
    for (NodeId t = 0; t < g_->n(); ++t) {
      for (const Message& m : engine_.contacts_received(t)) {
        if (m.tag == Tag::kRequest2) {
          const Color requester = m.vals[0] ? Color::Red : Color::Blue;
          const bool accept =
              is_leader(t) && leaders_[t].color == Color::Red && requester == Color::Blue;
          engine_.reply(t, m.src, accept ? Tag::kAccept : Tag::kReject, Payload{});
        } else if (m.tag == Tag::kPull) {
          engine_.reply(t, m.src, Tag::kHold, Payload{});
        }
      }
    }
    engine_.end_round();
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      for (const Message& m : engine_.replies_received(u))
        if (m.tag == Tag::kAccept) leaders_[u].accepted = true;
    }
  }

  // Round 7: leader update requests; answers carry the new leader id.
  void round7() {
    engine_.begin_round();
    for (NodeId v = 0; v < g_->n(); ++v)
      if (!is_leader(v)) engine_.contact(v, leader_[v], Tag::kUpdate, Payload{});
    engine_.deliver_contacts();
    std::vector<NodeId> next_leader = leader_;
    for (NodeId u = 0; u < g_->n(); ++u) {
      if (!is_leader(u)) continue;
      LeaderState& st = leaders_[u];
      const NodeId announced = st.accepted ? st.external_leader : u;
      for (const Message& m : engine_.contacts_received(u)) {
        Payload p;
        p.add_id(announced);
        engine_.reply(u, m.src, Tag::kNewLeader, std::move(p));
      }
      if (st.accepted) next_leader[u] = st.external_leader;
    }
    engine_.end_round();
    for (NodeId v = 0; v < g_->n(); ++v)
      for (const Message& m : engine_.replies_received(v))
        if (m.tag == Tag::kNewLeader) next_leader[v] = m.ids[0];
    leader_ = std::move(next_leader);
  }

  const Graph* g_;
  MergeStarConfig cfg_;
  GossipEngine engine_;
  SketchContext ctx_;
  std::uint32_t k_;
  std::vector<NodeId> leader_;
  std::vector<merge_star_detail::LeaderState> leaders_;
  std::vector<merge_star_detail::MemberState> members_;
};

inline MergeStarResult run_merge_star(const Graph& g, const MergeStarConfig& cfg) {
  return MergeStarRun(g, cfg).run();
}

// ---------------------------------------------------------------------------
// Star to arbitrary bounded-degree topology. The center assigns each node a
// slot of H, answers every request with that node's full H-neighborhood in
// one O(b)-bit message, and the nodes then establish one link per round.

struct DegreeTooLarge : std::runtime_error {
  DegreeTooLarge() : std::runtime_error("target degree exceeds the message budget") {}
};

struct StarToTopologyResult {
  std::vector<std::pair<NodeId, NodeId>> overlay_edges;
  std::vector<NodeId> slot_of;  // bijection node -> vertex of H
  MetricsLedger ledger;
  std::uint64_t rounds = 0;
};

inline StarToTopologyResult run_star_to_topology(const Graph& star, const Graph& target,
                                                 const ModelConfig& model,
                                                 std::uint64_t seed) {
  const std::size_t n = star.n();
  if (target.n() != n) throw InvalidParams("star_to_topology: |H| must equal n");
  if (!is_star(n, [&] {
        std::vector<std::pair<NodeId, NodeId>> es;
        for (const EdgeRef& e : star.edges()) es.emplace_back(e.lo, e.hi);
        return es;
      }()))
    throw InvalidParams("star_to_topology: input topology must be a star");
  const std::uint32_t w = id_width(n);
  if (target.max_degree() + 1 > model.payload_budget_words(n)) throw DegreeTooLarge();

  NodeId center = 0;
  if (n > 1) center = (star.degree(0) == n - 1) ? 0 : star.neighbors(0)[0];

  GossipEngine eng(star, model);
  (void)w;

  // The center computes the assignment locally; a seeded shuffle keeps the
  // isomorphism check honest.
  std::vector<NodeId> slot(n);
  for (NodeId v = 0; v < n; ++v) slot[v] = v;
  Rng rng = substream(seed, {tag(StreamTag::Assignment), n});
  for (std::size_t i = n; i > 1; --i) std::swap(slot[i - 1], slot[rng.below(i)]);
  std::vector<NodeId> node_of(n);
  for (NodeId v = 0; v < n; ++v) node_of[slot[v]] = v;

  constexpr std::uint16_t kAssignReq = 100, kAssignment = 101, kLink = 102, kLinkAck = 103;

  // Round 1: every leaf asks; the center replies with the neighborhood.
  std::vector<std::vector<NodeId>> todo(n);  // link targets, initiator side
  auto neighborhood_of = [&](NodeId v) {
    std::vector<NodeId> out;
    for (NodeId h : target.neighbors(slot[v])) out.push_back(node_of[h]);
    std::sort(out.begin(), out.end());
    return out;
  };
  eng.begin_round();
  for (NodeId v = 0; v < n; ++v)
    if (v != center) eng.contact(v, center, kAssignReq, Payload{});
  eng.deliver_contacts();
  for (const Message& m : eng.contacts_received(center)) {
    Payload p;
    for (NodeId u : neighborhood_of(m.src)) p.add_id(u);
    eng.reply(center, m.src, kAssignment, std::move(p));
  }
  eng.end_round();
  std::vector<std::vector<NodeId>> assigned(n);
  for (NodeId v = 0; v < n; ++v) {
    if (v == center) {
      assigned[v] = neighborhood_of(v);
      continue;
    }
    for (const Message& m : eng.replies_received(v))
      if (m.tag == kAssignment) assigned[v] = m.ids;
  }
  for (NodeId v = 0; v < n; ++v)
    for (NodeId u : assigned[v])
      if (v < u) todo[v].push_back(u);

  // Link establishment: the smaller endpoint initiates, one link per round.
  StarToTopologyResult res;
  std::vector<std::size_t> next(n, 0);
  auto pending = [&] {
    for (NodeId v = 0; v < n; ++v)
      if (next[v] < todo[v].size()) return true;
    return false;
  };
  while (pending()) {
    eng.begin_round();
    for (NodeId v = 0; v < n; ++v) {
      if (next[v] < todo[v].size()) {
        eng.contact(v, todo[v][next[v]], kLink, Payload{});
        ++next[v];
      }
    }
    eng.deliver_contacts();
    for (NodeId u = 0; u < n; ++u)
      for (const Message& m : eng.contacts_received(u))
        if (m.tag == kLink) {
          res.overlay_edges.emplace_back(m.src, u);
          eng.reply(u, m.src, kLinkAck, Payload{});
        }
    eng.end_round();
  }

  std::sort(res.overlay_edges.begin(), res.overlay_edges.end());
  res.slot_of = slot;
  res.ledger = eng.ledger();
  res.rounds = eng.ledger().rounds;
  return res;
}

}  // namespace osim
