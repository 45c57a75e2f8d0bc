#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "overlaysim/common.hpp"
#include "overlaysim/graph.hpp"
#include "overlaysim/rng.hpp"

namespace osim {

// Offline forms of the tree-restructuring steps. The HybridWFT runtime drives
// the same rules through engine messages; these run directly for unit tests,
// fuzzing, and the cycle benchmarks.

// Binary tree from the child-sibling transform. Slot 0 is the kept first
// child, slot 1 the next sibling; slot order matters for the Euler walk.
struct BinaryTree {
  std::size_t n = 0;
  NodeId root = kNoNode;
  std::vector<NodeId> parent;
  std::vector<std::array<NodeId, 2>> kids;

  std::size_t total_degree(NodeId v) const {
    std::size_t d = (v == root ? 0 : 1);
    if (kids[v][0] != kNoNode) ++d;
    if (kids[v][1] != kNoNode) ++d;
    return d;
  }
};

// Each node keeps its first child; consecutive children become parent/child
// of each other.
inline BinaryTree child_sibling(const RootedTree& t) {
  BinaryTree b;
  b.n = t.n;
  b.root = t.root;
  b.parent.assign(t.n, kNoNode);
  b.kids.assign(t.n, {kNoNode, kNoNode});
  for (NodeId v = 0; v < t.n; ++v) {
    const auto& ch = t.children[v];
    if (ch.empty()) continue;
    b.kids[v][0] = ch[0];
    b.parent[ch[0]] = v;
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      b.kids[ch[i]][1] = ch[i + 1];
      b.parent[ch[i + 1]] = ch[i];
    }
  }
  return b;
}

// Cycle of virtual nodes; position i precedes (i+1) mod K. Owners appear
// once per visit of the walk-around, 1..3 times each.
struct VirtualCycle {
  std::vector<NodeId> owner;      // position -> owning node
  std::vector<std::uint8_t> copy; // position -> copy index, 1-based

  std::size_t K() const { return owner.size(); }
};

inline VirtualCycle euler_tour(const BinaryTree& b) {
  VirtualCycle c;
  c.owner.reserve(2 * b.n);
  c.copy.reserve(2 * b.n);
  std::vector<std::uint8_t> emitted(b.n, 0);
  // Iterative in-order walk-around: emit a copy on entry and after each
  // child subtree returns.
  struct Frame {
    NodeId v;
    int stage;  // 0 = entering, 1 = left done, 2 = right done
  };
  std::vector<Frame> stack{{b.root, 0}};
  auto emit = [&](NodeId v) {
    c.owner.push_back(v);
    c.copy.push_back(++emitted[v]);
  };
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.stage == 0) {
      emit(f.v);
      f.stage = 1;
      if (b.kids[f.v][0] != kNoNode) stack.push_back({b.kids[f.v][0], 0});
    } else if (f.stage == 1) {
      if (b.kids[f.v][0] != kNoNode) emit(f.v);
      f.stage = 2;
      if (b.kids[f.v][1] != kNoNode) stack.push_back({b.kids[f.v][1], 0});
    } else {
      if (b.kids[f.v][1] != kNoNode) emit(f.v);
      stack.pop_back();
    }
  }
  return c;
}

// Folds every owner onto its first copy, splicing later copies out of the
// cycle. The result is a ring visiting each owner exactly once (pre-order of
// the binary tree). Jumping over the reduced ring keeps the final owner
// degree at the jump tree's own bound; contracting after jumping does not
// (three copies of degree 3 can merge into a degree-9 owner).
inline VirtualCycle reduce_cycle(const VirtualCycle& c) {
  VirtualCycle r;
  r.owner.reserve(c.K());
  r.copy.reserve(c.K());
  for (std::size_t i = 0; i < c.K(); ++i)
    if (c.copy[i] == 1) {
      r.owner.push_back(c.owner[i]);
      r.copy.push_back(1);
    }
  return r;
}

// ---------------------------------------------------------------------------
// Deterministic pointer jumping on a K-cycle. After the doubling iterations
// every position knows its ring rank relative to the root and its 2^t
// neighbors; the kept broadcast edges below use only power-of-two strides.
//
// Ranks [0, 2^L), L = floor(log2 K): the root fires once at stride 2^(L-1);
// a rank covered at stride 2^j fires once at stride 2^(j-1) in both
// directions. Covered ranks after the 2^j stage are exactly the multiples of
// 2^j, so coverage of the power-of-two prefix is total and every node keeps
// at most 1 parent + 2 fired children. Ranks [2^L, K) attach to rank-2^L
// predecessors, adding at most one more child. Degree <= 4, depth <= L+1.

struct VirtualTree {
  std::vector<NodeId> parent;  // position -> position, kNoNode at the root
  NodeId root = kNoNode;
  std::size_t depth = 0;
};

inline VirtualTree pointer_jump_tree(std::size_t K, NodeId root_pos) {
  VirtualTree vt;
  vt.parent.assign(K, kNoNode);
  vt.root = root_pos;
  if (K <= 1) return vt;
  std::uint32_t L = 0;
  while ((std::size_t{1} << (L + 1)) <= K) ++L;
  const std::size_t kp = std::size_t{1} << L;
  const auto pos_of = [&](std::size_t rank) {
    return static_cast<NodeId>((root_pos + rank) % K);
  };
  std::vector<char> covered(kp, 0);
  covered[0] = 1;
  std::vector<std::size_t> frontier{0};
  std::vector<std::size_t> rank_depth(K, 0);
  for (std::uint32_t j = L; j-- > 0;) {
    const std::size_t stride = std::size_t{1} << j;
    std::vector<std::size_t> next;
    for (std::size_t m : frontier) {
      for (int dir : {+1, -1}) {
        if (dir < 0 && m < stride) continue;
        const std::size_t t = dir > 0 ? m + stride : m - stride;
        if (t >= kp || covered[t]) continue;
        covered[t] = 1;
        vt.parent[pos_of(t)] = pos_of(m);
        rank_depth[t] = rank_depth[m] + 1;
        next.push_back(t);
      }
    }
    frontier = std::move(next);
  }
  for (std::size_t r = 0; r < kp; ++r)
    if (!covered[r]) throw InvariantViolated("pointer jumping left a position uncovered");
  for (std::size_t r = kp; r < K; ++r) {
    vt.parent[pos_of(r)] = pos_of(r - kp);
    rank_depth[r] = rank_depth[r - kp] + 1;
  }
  for (std::size_t r = 0; r < K; ++r) vt.depth = std::max(vt.depth, rank_depth[r]);
  return vt;
}

// ---------------------------------------------------------------------------
// Contraction of a virtual tree back onto owners, then a BFS from the root
// owner. Contraction cannot increase the diameter; the BFS restores treeness.

struct MergeResult {
  std::vector<std::vector<NodeId>> owner_adj;  // deduplicated contracted graph
  RootedTree tree;
};

inline MergeResult merge_virtual(const VirtualCycle& cyc, const VirtualTree& vt,
                                 std::size_t n_owners) {
  MergeResult r;
  std::vector<std::set<NodeId>> adj(n_owners);
  for (std::size_t pos = 0; pos < cyc.K(); ++pos) {
    const NodeId par = vt.parent[pos];
    if (par == kNoNode) continue;
    const NodeId a = cyc.owner[pos], b = cyc.owner[par];
    if (a == b) continue;
    adj[a].insert(b);
    adj[b].insert(a);
  }
  r.owner_adj.resize(n_owners);
  for (std::size_t v = 0; v < n_owners; ++v)
    r.owner_adj[v].assign(adj[v].begin(), adj[v].end());
  r.tree = bfs_tree(r.owner_adj, cyc.owner[vt.root]);
  return r;
}

// ---------------------------------------------------------------------------
// RC2T: randomized cycle-to-tree. A node flips head between two tails, hands
// itself to the smaller-ID tail as a child, and its neighbors splice.

struct Rc2tStats {
  std::size_t iterations = 0;
  std::uint64_t node_iterations = 0;        // sum of active counts, flip iterations only
  std::uint64_t survivors_after = 0;        // paired with node_iterations for the 7/8 mean
  std::vector<std::uint32_t> active_iters;  // per position
  bool success = true;
};

struct Rc2tResult {
  VirtualTree tree;
  Rc2tStats stats;
};

inline Rc2tResult rc2t(std::size_t K, Rng& rng, std::size_t max_iterations = 0) {
  Rc2tResult r;
  r.tree.parent.assign(K, kNoNode);
  r.stats.active_iters.assign(K, 0);
  if (K == 0) throw InvalidParams("rc2t: empty cycle");
  if (max_iterations == 0) max_iterations = 24 * ceil_log2(K) + 24;

  std::vector<NodeId> next(K), prev(K);
  for (std::size_t i = 0; i < K; ++i) {
    next[i] = static_cast<NodeId>((i + 1) % K);
    prev[i] = static_cast<NodeId>((i + K - 1) % K);
  }
  std::vector<char> active(K, 1);
  std::vector<NodeId> alive;
  alive.reserve(K);
  for (std::size_t i = 0; i < K; ++i) alive.push_back(static_cast<NodeId>(i));

  std::vector<char> coin(K, 0);
  while (true) {
    if (alive.size() == 1) {
      r.tree.root = alive[0];
      break;
    }
    if (alive.size() == 2) {
      // Coin flips can stall on a 2-cycle; resolve deterministically.
      const NodeId a = std::max(alive[0], alive[1]);
      const NodeId b = std::min(alive[0], alive[1]);
      r.tree.parent[b] = a;
      r.tree.root = a;
      break;
    }
    if (r.stats.iterations >= max_iterations) {
      r.stats.success = false;
      r.tree.root = alive[0];
      for (std::size_t idx = 1; idx < alive.size(); ++idx)
        r.tree.parent[alive[idx]] = alive[0];  // salvage shape for reporting
      break;
    }
    ++r.stats.iterations;
    r.stats.node_iterations += alive.size();
    for (NodeId v : alive) {
      coin[v] = rng.coin() ? 1 : 0;
      ++r.stats.active_iters[v];
    }
    std::vector<NodeId> dropped;
    for (NodeId v : alive)
      if (coin[v] && !coin[prev[v]] && !coin[next[v]]) dropped.push_back(v);
    // Head-between-tails nodes are never adjacent.
    for (NodeId v : dropped)
      if (!active[prev[v]] || !active[next[v]])
        throw InvariantViolated("rc2t: adjacent deactivations");
    for (NodeId v : dropped) {
      r.tree.parent[v] = std::min(prev[v], next[v]);
      active[v] = 0;
      next[prev[v]] = next[v];
      prev[next[v]] = prev[v];
    }
    if (!dropped.empty()) {
      std::vector<NodeId> still;
      still.reserve(alive.size() - dropped.size());
      for (NodeId v : alive)
        if (active[v]) still.push_back(v);
      alive = std::move(still);
    }
    r.stats.survivors_after += alive.size();
  }

  // Depth of the attachment tree.
  std::vector<std::vector<NodeId>> kids(K);
  for (std::size_t i = 0; i < K; ++i)
    if (r.tree.parent[i] != kNoNode) kids[r.tree.parent[i]].push_back(static_cast<NodeId>(i));
  std::vector<std::pair<NodeId, std::size_t>> stack{{r.tree.root, 0}};
  while (!stack.empty()) {
    auto [v, d] = stack.back();
    stack.pop_back();
    r.tree.depth = std::max(r.tree.depth, d);
    for (NodeId c : kids[v]) stack.emplace_back(c, d + 1);
  }
  return r;
}

// ---------------------------------------------------------------------------

// BFS re-rooting of a connected overlay union.
inline RootedTree reroot(const std::vector<std::vector<NodeId>>& adj, NodeId new_root) {
  return bfs_tree(adj, new_root);
}

// Deterministic whole pipeline: rooted tree -> well-formed tree.
inline RootedTree wft_pipeline(const RootedTree& t) {
  if (t.n == 1) return t;
  const BinaryTree b = child_sibling(t);
  const VirtualCycle cyc = reduce_cycle(euler_tour(b));
  const VirtualTree vt = pointer_jump_tree(cyc.K(), 0);  // root copy is position 0
  return merge_virtual(cyc, vt, t.n).tree;
}

// Randomized pipeline used per phase: rooted tree -> satisfactory tree.
inline std::pair<RootedTree, Rc2tStats> satisfactory_pipeline(const RootedTree& t, Rng& rng,
                                                              std::size_t max_iterations = 0) {
  if (t.n == 1) return {t, {}};
  const BinaryTree b = child_sibling(t);
  const VirtualCycle cyc = euler_tour(b);
  Rc2tResult rr = rc2t(cyc.K(), rng, max_iterations);
  return {merge_virtual(cyc, rr.tree, t.n).tree, rr.stats};
}

}  // namespace osim
