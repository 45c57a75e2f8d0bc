#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "overlaysim/common.hpp"

namespace osim {

enum class Channel : std::uint8_t {
  LocalRequest,
  LocalReply,
  GlobalContact,
  GlobalReply,
};

inline const char* channel_name(Channel c) {
  switch (c) {
    case Channel::LocalRequest: return "local_request";
    case Channel::LocalReply: return "local_reply";
    case Channel::GlobalContact: return "global_contact";
    case Channel::GlobalReply: return "global_reply";
  }
  return "?";
}

struct GossipReplyModel {
  std::uint32_t b_bits = 0;  // 0 = ceil(log2 n) at run time
};

struct HybridModel {
  std::uint32_t alpha_bits = 0;  // 0 = ceil(log2 n)
  std::uint32_t beta = 1;
  double gamma_factor = 8.0;
};

struct ModelConfig {
  std::variant<GossipReplyModel, HybridModel> variant = GossipReplyModel{};
  bool strict_capacity = true;
  // Messages are O(b) bits; this fixes the constant in words. 16 leaves room
  // for a hash description (two coefficients of 2w+1 bits) at small w.
  std::uint32_t word_budget_factor = 16;

  std::uint32_t b_bits_for(std::size_t n) const {
    const auto* g = std::get_if<GossipReplyModel>(&variant);
    const std::uint32_t b = g ? g->b_bits : std::get<HybridModel>(variant).alpha_bits;
    return b == 0 ? id_width(n) : b;
  }

  std::uint64_t payload_budget_words(std::size_t n) const {
    const std::uint32_t w = id_width(n);
    const std::uint32_t b = b_bits_for(n);
    return std::uint64_t{word_budget_factor} * std::max<std::uint64_t>(1, (b + w - 1) / w);
  }

  std::uint32_t gamma_cap(std::size_t n) const {
    const auto& h = std::get<HybridModel>(variant);
    const double cap = h.gamma_factor * static_cast<double>(ceil_log2(n));
    return cap < 1.0 ? 1 : static_cast<std::uint32_t>(cap);
  }

  std::uint32_t beta_cap() const { return std::get<HybridModel>(variant).beta; }
};

// Payload under construction: raw values with declared bit widths plus
// knowledge-granting node IDs (one id = one w-bit word).
struct Payload {
  std::vector<std::uint64_t> vals;
  std::vector<NodeId> ids;
  std::uint64_t declared_bits = 0;

  Payload& add_value(std::uint64_t v, std::uint32_t bits) {
    vals.push_back(v);
    declared_bits += bits;
    return *this;
  }
  Payload& add_flag(bool b) { return add_value(b ? 1 : 0, 1); }
  Payload& add_id(NodeId id) {
    ids.push_back(id);
    return *this;
  }

  std::uint64_t words(std::uint32_t w) const {
    return words_for_bits(declared_bits, w) + ids.size();
  }
};

struct Message {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  Channel channel = Channel::GlobalContact;
  std::uint16_t tag = 0;
  std::vector<std::uint64_t> vals;
  std::vector<NodeId> ids;
  std::uint32_t words = 0;

  // Content-based order so delivery never depends on enqueue order.
  friend bool operator<(const Message& a, const Message& b) {
    auto key = [](const Message& m) {
      return std::tie(m.src, m.dst, m.channel, m.tag, m.vals, m.ids);
    };
    return key(a) < key(b);
  }
};

// Cost of one message's payload in bits.
inline std::uint64_t charge_bits(std::uint64_t payload_words, std::size_t n) {
  return payload_words * id_width(n);
}
inline std::uint64_t charge_bits(const Message& m, std::size_t n) {
  return charge_bits(m.words, n);
}

// Round accounting for GOSSIP-reply(b) with b below the id width: one native
// round is simulated by ceil(w/b) reduced-bandwidth rounds.
inline std::uint64_t simulate_reduced_bandwidth(std::uint64_t rounds, std::uint32_t b_bits,
                                                std::size_t n) {
  if (b_bits < 1) throw InvalidParams("b_bits >= 1");
  const std::uint64_t mult = (id_width(n) + b_bits - 1) / b_bits;
  return rounds * std::max<std::uint64_t>(1, mult);
}

}  // namespace osim
