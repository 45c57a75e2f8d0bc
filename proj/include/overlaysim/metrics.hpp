#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "overlaysim/model.hpp"

namespace osim {

struct CapacityViolation {
  std::uint64_t round = 0;
  NodeId node = kNoNode;
  Channel channel = Channel::GlobalContact;
  bool receiving = false;
  std::uint32_t count = 0;
  std::uint32_t cap = 0;
};

struct RoundStats {
  std::uint64_t messages = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t bits = 0;
};

struct MetricsLedger {
  std::uint64_t rounds = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t total_bits = 0;
  std::uint64_t dropped = 0;
  std::vector<std::uint64_t> sent_per_node;
  std::vector<std::uint64_t> recv_per_node;
  std::vector<std::uint32_t> cluster_count_per_phase;
  std::vector<CapacityViolation> violations;

  explicit MetricsLedger(std::size_t n = 0) : sent_per_node(n, 0), recv_per_node(n, 0) {}

  // Dropped messages are counted as sent, never as received.
  bool conservation_ok() const {
    const std::uint64_t s =
        std::accumulate(sent_per_node.begin(), sent_per_node.end(), std::uint64_t{0});
    const std::uint64_t r =
        std::accumulate(recv_per_node.begin(), recv_per_node.end(), std::uint64_t{0});
    return s == total_messages && r + dropped == total_messages;
  }

  std::uint64_t node_traffic(NodeId v) const { return sent_per_node[v] + recv_per_node[v]; }

  bool identical_to(const MetricsLedger& o) const {
    return rounds == o.rounds && total_messages == o.total_messages &&
           total_bits == o.total_bits && dropped == o.dropped &&
           sent_per_node == o.sent_per_node && recv_per_node == o.recv_per_node &&
           cluster_count_per_phase == o.cluster_count_per_phase &&
           violations.size() == o.violations.size();
  }
};

}  // namespace osim
