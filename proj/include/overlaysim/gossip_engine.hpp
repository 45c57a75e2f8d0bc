#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "overlaysim/graph.hpp"
#include "overlaysim/metrics.hpp"
#include "overlaysim/model.hpp"

namespace osim {

struct ContactFanoutViolation : std::logic_error {
  ContactFanoutViolation() : std::logic_error("node attempted a second contact this round") {}
};
struct ReplyWithoutContact : std::logic_error {
  ReplyWithoutContact() : std::logic_error("reply targets a node that did not contact the sender") {}
};
struct UnknownDestination : std::logic_error {
  UnknownDestination() : std::logic_error("destination id not in the sender's knowledge set") {}
};
struct PayloadOverBudget : std::logic_error {
  PayloadOverBudget() : std::logic_error("payload exceeds the model word budget") {}
};

// Synchronous GOSSIP-reply(b) round engine. One round runs the model's four
// sub-steps: contact send, contact receive plus local compute, reply send,
// reply receive plus local compute. Knowledge sets start as self plus input
// neighbors and grow with every delivered sender id and id-typed payload.
class GossipEngine {
 public:
  GossipEngine(const Graph& g, const ModelConfig& cfg)
      : g_(&g),
        cfg_(cfg),
        w_(id_width(g.n())),
        budget_words_(cfg.payload_budget_words(g.n())),
        ledger_(g.n()),
        knowledge_(g.n()),
        contacted_(g.n(), 0),
        contacts_in_(g.n()),
        replies_in_(g.n()) {
    for (NodeId v = 0; v < g.n(); ++v) {
      knowledge_[v].insert(v);
      for (NodeId u : g.neighbors(v)) knowledge_[v].insert(u);
    }
  }

  const Graph& graph() const { return *g_; }
  MetricsLedger& ledger() { return ledger_; }
  const MetricsLedger& ledger() const { return ledger_; }
  std::uint32_t word_width() const { return w_; }

  bool knows(NodeId v, NodeId whom) const { return knowledge_[v].count(whom) != 0; }
  std::size_t knowledge_size(NodeId v) const { return knowledge_[v].size(); }

  void begin_round() {
    for (NodeId v = 0; v < g_->n(); ++v) {
      contacted_[v] = 0;
      contacts_in_[v].clear();
      replies_in_[v].clear();
    }
    pending_.clear();
    reply_pending_.clear();
    quota_.clear();
    in_round_ = true;
    contacts_delivered_ = false;
  }

  // Sub-step 1. At most one contact per node, to a known id.
  void contact(NodeId src, NodeId dst, std::uint16_t tag, Payload p) {
    if (!in_round_ || contacts_delivered_) throw InvariantViolated("contact outside sub-step 1");
    if (contacted_[src]) throw ContactFanoutViolation();
    if (!knows(src, dst)) throw UnknownDestination();
    contacted_[src] = 1;
    pending_.push_back(make_message(src, dst, Channel::GlobalContact, tag, std::move(p)));
  }

  // Sub-step 2. Deliver all contacts; fan-in is unbounded.
  void deliver_contacts() {
    if (!in_round_ || contacts_delivered_) throw InvariantViolated("contacts already delivered");
    std::sort(pending_.begin(), pending_.end());
    for (Message& m : pending_) {
      account_send(m);
      learn(m.dst, m);
      contacts_in_[m.dst].push_back(std::move(m));
    }
    pending_.clear();
    contacts_delivered_ = true;
  }

  const std::vector<Message>& contacts_received(NodeId v) const { return contacts_in_[v]; }

  // Sub-step 3. One reply per received contact.
  void reply(NodeId src, NodeId dst, std::uint16_t tag, Payload p) {
    if (!in_round_ || !contacts_delivered_) throw InvariantViolated("reply outside sub-step 3");
    auto& remaining = reply_quota(src, dst);
    if (remaining == 0) throw ReplyWithoutContact();
    --remaining;
    reply_pending_.push_back(make_message(src, dst, Channel::GlobalReply, tag, std::move(p)));
  }

  // Sub-step 4. Deliver replies and close the round.
  RoundStats end_round() {
    if (!in_round_ || !contacts_delivered_) throw InvariantViolated("end_round out of order");
    RoundStats rs;
    std::sort(reply_pending_.begin(), reply_pending_.end());
    for (Message& m : reply_pending_) {
      account_send(m);
      learn(m.dst, m);
      replies_in_[m.dst].push_back(std::move(m));
    }
    reply_pending_.clear();
    std::uint64_t msgs = 0;
    for (NodeId v = 0; v < g_->n(); ++v)
      msgs += contacts_in_[v].size() + replies_in_[v].size();
    if (msgs > 2 * g_->n()) throw InvariantViolated("round exceeded the 2n message cap");
    rs.messages = msgs;
    rs.delivered = msgs;
    rs.bits = round_bits_;
    round_bits_ = 0;
    ledger_.rounds += 1;
    in_round_ = false;
    return rs;
  }

  const std::vector<Message>& replies_received(NodeId v) const { return replies_in_[v]; }

  // The model's four sub-steps driven by per-node handlers.
  struct Outgoing {
    NodeId dst = kNoNode;
    std::uint16_t tag = 0;
    Payload payload;
  };
  using ContactFn = std::function<std::optional<Outgoing>(NodeId)>;
  using ReplyFn = std::function<std::vector<Outgoing>(NodeId, const std::vector<Message>&)>;
  using ReceiveFn = std::function<void(NodeId, const std::vector<Message>&)>;

  RoundStats run_round(const ContactFn& contact_fn, const ReplyFn& reply_fn,
                       const ReceiveFn& receive_fn) {
    begin_round();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (!contact_fn) break;
      if (auto out = contact_fn(v)) contact(v, out->dst, out->tag, std::move(out->payload));
    }
    deliver_contacts();
    for (NodeId v = 0; v < g_->n(); ++v) {
      if (!reply_fn) break;
      if (contacts_in_[v].empty()) continue;
      for (Outgoing& out : reply_fn(v, contacts_in_[v]))
        reply(v, out.dst, out.tag, std::move(out.payload));
    }
    RoundStats rs = end_round();
    if (receive_fn)
      for (NodeId v = 0; v < g_->n(); ++v)
        if (!replies_in_[v].empty()) receive_fn(v, replies_in_[v]);
    return rs;
  }

 private:
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

  void account_send(const Message& m) {
    ledger_.total_messages += 1;
    ledger_.sent_per_node[m.src] += 1;
    ledger_.recv_per_node[m.dst] += 1;
    const std::uint64_t bits = charge_bits(m, g_->n());
    ledger_.total_bits += bits;
    round_bits_ += bits;
  }

  void learn(NodeId v, const Message& m) {
    knowledge_[v].insert(m.src);
    for (NodeId id : m.ids) knowledge_[v].insert(id);
  }

  std::uint32_t& reply_quota(NodeId replier, NodeId contacter) {
    const std::uint64_t key = (std::uint64_t{replier} << 32) | contacter;
    auto it = quota_.find(key);
    if (it == quota_.end()) {
      std::uint32_t cnt = 0;
      for (const Message& m : contacts_in_[replier])
        if (m.src == contacter) ++cnt;
      it = quota_.emplace(key, cnt).first;
    }
    return it->second;
  }

  const Graph* g_;
  ModelConfig cfg_;
  std::uint32_t w_;
  std::uint64_t budget_words_;
  MetricsLedger ledger_;
  std::vector<std::unordered_set<NodeId>> knowledge_;
  std::vector<char> contacted_;
  std::vector<std::vector<Message>> contacts_in_;
  std::vector<std::vector<Message>> replies_in_;
  std::vector<Message> pending_;
  std::vector<Message> reply_pending_;
  std::unordered_map<std::uint64_t, std::uint32_t> quota_;
  std::uint64_t round_bits_ = 0;
  bool in_round_ = false;
  bool contacts_delivered_ = false;
};

}  // namespace osim
