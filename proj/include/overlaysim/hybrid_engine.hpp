#pragma once

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "overlaysim/gossip_engine.hpp"  // shared error types
#include "overlaysim/graph.hpp"
#include "overlaysim/metrics.hpp"
#include "overlaysim/model.hpp"

namespace osim {

struct NotAnEdge : std::logic_error {
  NotAnEdge() : std::logic_error("local message across a non-edge of the input graph") {}
};

// Synchronous HYBRID(alpha, beta, gamma) round engine. Local messages ride
// input-graph edges at beta per edge per direction per round; global messages
// go to known ids at gamma_factor*ceil(log2 n) per node per round, both
// directions. A node offered more global messages than its capacity receives
// a deterministic prefix of the content-sorted arrivals in permissive mode;
// strict mode records the violation and marks the run failed.
class HybridEngine {
 public:
  HybridEngine(const Graph& g, const ModelConfig& cfg)
      : g_(&g),
        cfg_(cfg),
        w_(id_width(g.n())),
        budget_words_(cfg.payload_budget_words(g.n())),
        gamma_cap_(cfg.gamma_cap(g.n())),
        beta_cap_(cfg.beta_cap()),
        ledger_(g.n()),
        knowledge_(g.n()),
        inbox_(g.n()),
        global_sent_(g.n(), 0) {
    for (NodeId v = 0; v < g.n(); ++v) {
      knowledge_[v].insert(v);
      for (NodeId u : g.neighbors(v)) knowledge_[v].insert(u);
    }
  }

  const Graph& graph() const { return *g_; }
  MetricsLedger& ledger() { return ledger_; }
  const MetricsLedger& ledger() const { return ledger_; }
  std::uint32_t word_width() const { return w_; }
  std::uint32_t gamma_cap() const { return gamma_cap_; }
  bool run_failed() const { return failed_; }

  bool knows(NodeId v, NodeId whom) const { return knowledge_[v].count(whom) != 0; }

  void begin_round() {
    if (in_round_) throw InvariantViolated("begin_round inside a round");
    for (auto& box : inbox_) box.clear();
    std::fill(global_sent_.begin(), global_sent_.end(), 0);
    local_sent_.clear();
    pending_.clear();
    in_round_ = true;
  }

  void send_local(NodeId src, NodeId dst, std::uint16_t tag, Payload p) {
    require_in_round();
    if (!g_->has_edge(src, dst)) throw NotAnEdge();
    const std::uint64_t key = (std::uint64_t{src} << 32) | dst;
    if (++local_sent_[key] > beta_cap_) record_violation(src, Channel::LocalRequest, false,
                                                         local_sent_[key]);
    pending_.push_back(make_message(src, dst, Channel::LocalRequest, tag, std::move(p)));
  }

  void send_global(NodeId src, NodeId dst, std::uint16_t tag, Payload p) {
    require_in_round();
    if (!knows(src, dst)) throw UnknownDestination();
    if (++global_sent_[src] > gamma_cap_)
      record_violation(src, Channel::GlobalContact, false, global_sent_[src]);
    pending_.push_back(make_message(src, dst, Channel::GlobalContact, tag, std::move(p)));
  }

  RoundStats end_round() {
    require_in_round();
    RoundStats rs;
    std::sort(pending_.begin(), pending_.end());
    std::vector<std::uint32_t> global_recv(g_->n(), 0);
    for (Message& m : pending_) {
      ledger_.total_messages += 1;
      ledger_.sent_per_node[m.src] += 1;
      const std::uint64_t bits = charge_bits(m, g_->n());
      ledger_.total_bits += bits;
      rs.bits += bits;
      rs.messages += 1;
      bool deliver = true;
      if (m.channel == Channel::GlobalContact && ++global_recv[m.dst] > gamma_cap_) {
        record_violation(m.dst, m.channel, true, global_recv[m.dst]);
        deliver = false;  // arbitrary-subset rule: keep the sorted prefix
      }
      if (deliver) {
        ledger_.recv_per_node[m.dst] += 1;
        rs.delivered += 1;
        knowledge_[m.dst].insert(m.src);
        for (NodeId id : m.ids) knowledge_[m.dst].insert(id);
        inbox_[m.dst].push_back(std::move(m));
      } else {
        ledger_.dropped += 1;
        rs.dropped += 1;
      }
    }
    pending_.clear();
    ledger_.rounds += 1;
    in_round_ = false;
    return rs;
  }

  const std::vector<Message>& inbox(NodeId v) const { return inbox_[v]; }

  using SendFn = std::function<void(NodeId, HybridEngine&)>;
  using RecvFn = std::function<void(NodeId, const std::vector<Message>&)>;

  RoundStats run_round(const SendFn& send_fn, const RecvFn& recv_fn) {
    begin_round();
    if (send_fn)
      for (NodeId v = 0; v < g_->n(); ++v) send_fn(v, *this);
    RoundStats rs = end_round();
    if (recv_fn)
      for (NodeId v = 0; v < g_->n(); ++v)
        if (!inbox_[v].empty()) recv_fn(v, inbox_[v]);
    return rs;
  }

 private:
  void require_in_round() const {
    if (!in_round_) throw InvariantViolated("send outside a round");
  }

  Message make_message(NodeId src, NodeId dst, Channel ch, std::uint16_t tag, Payload p) {
    Message m;
    m.src = src;
    m.dst = dst;
    m.channel = ch;
    m.tag = tag;
    const std::uint64_t words = p.words(w_);
    if (words > budget_words_) throw PayloadOverBudget();
    m.words = static_cast<std::uint32_t>(words);
    m.vals = std::move(p.vals);
    m.ids = std::move(p.ids);
    return m;
  }

  void record_violation(NodeId node, Channel ch, bool receiving, std::uint32_t count) {
    CapacityViolation v;
    v.round = ledger_.rounds;
    v.node = node;
    v.channel = ch;
    v.receiving = receiving;
    v.count = count;
    v.cap = (ch == Channel::GlobalContact) ? gamma_cap_ : beta_cap_;
    ledger_.violations.push_back(v);
    if (cfg_.strict_capacity) failed_ = true;
  }

  const Graph* g_;
  ModelConfig cfg_;
  std::uint32_t w_;
  std::uint64_t budget_words_;
  std::uint32_t gamma_cap_;
  std::uint32_t beta_cap_;
  MetricsLedger ledger_;
  std::vector<std::unordered_set<NodeId>> knowledge_;
  std::vector<std::vector<Message>> inbox_;
  std::vector<std::uint32_t> global_sent_;
  std::unordered_map<std::uint64_t, std::uint32_t> local_sent_;
  std::vector<Message> pending_;
  bool in_round_ = false;
  bool failed_ = false;
};

}  // namespace osim
