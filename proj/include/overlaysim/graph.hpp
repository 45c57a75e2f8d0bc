#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "overlaysim/common.hpp"
#include "overlaysim/rng.hpp"

namespace osim {

// Simple undirected graph; adjacency lists kept sorted. Immutable once built
// (builders construct, protocols only read), so values are safely shareable
// across concurrently running simulations.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}

  std::size_t n() const { return adj_.size(); }
  std::size_t m() const { return m_; }

  void add_edge(NodeId u, NodeId v) {
    if (u == v) throw InvalidParams("self-loop");
    if (u >= n() || v >= n()) throw InvalidParams("endpoint out of range");
    if (has_edge(u, v)) throw InvalidParams("multi-edge");
    insert_sorted(adj_[u], v);
    insert_sorted(adj_[v], u);
    ++m_;
  }

  bool has_edge(NodeId u, NodeId v) const {
    if (u >= n() || v >= n() || u == v) return false;
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

  const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
  std::size_t degree(NodeId v) const { return adj_[v].size(); }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& a : adj_) d = std::max(d, a.size());
    return d;
  }

  std::vector<EdgeRef> edges() const {
    std::vector<EdgeRef> out;
    out.reserve(m_);
    for (NodeId u = 0; u < n(); ++u)
      for (NodeId v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  bool connected() const {
    if (n() == 0) return false;
    std::vector<char> seen(n(), 0);
    std::queue<NodeId> q;
    q.push(0);
    seen[0] = 1;
    std::size_t cnt = 1;
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : adj_[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++cnt;
          q.push(v);
        }
    }
    return cnt == n();
  }

  // Internal consistency: sorted lists, symmetry, no loops or duplicates.
  bool valid() const {
    std::size_t half_edges = 0;
    for (NodeId u = 0; u < n(); ++u) {
      const auto& a = adj_[u];
      if (!std::is_sorted(a.begin(), a.end())) return false;
      if (std::adjacent_find(a.begin(), a.end()) != a.end()) return false;
      for (NodeId v : a) {
        if (v == u || v >= n()) return false;
        if (!has_edge(v, u)) return false;
      }
      half_edges += a.size();
    }
    return half_edges == 2 * m_;
  }

 private:
  static void insert_sorted(std::vector<NodeId>& a, NodeId v) {
    a.insert(std::upper_bound(a.begin(), a.end(), v), v);
  }

  std::vector<std::vector<NodeId>> adj_;
  std::size_t m_ = 0;
};

// ---------------------------------------------------------------------------
// Rooted trees

struct RootedTree {
  std::size_t n = 0;
  NodeId root = kNoNode;
  std::vector<NodeId> parent;               // kNoNode for the root
  std::vector<std::vector<NodeId>> children;

  static RootedTree singleton() {
    RootedTree t;
    t.n = 1;
    t.root = 0;
    t.parent = {kNoNode};
    t.children = {{}};
    return t;
  }

  static RootedTree from_parents(NodeId root, std::vector<NodeId> parents) {
    RootedTree t;
    t.n = parents.size();
    t.root = root;
    t.parent = std::move(parents);
    t.children.assign(t.n, {});
    for (NodeId v = 0; v < t.n; ++v)
      if (v != root) t.children[t.parent[v]].push_back(v);
    for (auto& c : t.children) std::sort(c.begin(), c.end());
    return t;
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
    while (!stack.empty()) {
      auto [v, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      for (NodeId c : children[v]) stack.emplace_back(c, d + 1);
    }
    return best;
  }

  // Degree counting the parent link.
  std::size_t total_degree(NodeId v) const {
    return children[v].size() + (v == root ? 0 : 1);
  }

  std::size_t max_total_degree() const {
    std::size_t d = 0;
    for (NodeId v = 0; v < n; ++v) d = std::max(d, total_degree(v));
    return d;
  }

  // Spanning, acyclic, parent/children mutually consistent.
  bool valid() const {
    if (n == 0 || root >= n || parent.size() != n || children.size() != n) return false;
    if (parent[root] != kNoNode) return false;
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{root};
    std::size_t cnt = 0;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      if (seen[v]) return false;
      seen[v] = 1;
      ++cnt;
      for (NodeId c : children[v]) {
        if (c >= n || parent[c] != v) return false;
        stack.push_back(c);
      }
    }
    return cnt == n;
  }
};

// BFS tree of an adjacency structure, used as the generic re-rooting step.
inline RootedTree bfs_tree(const std::vector<std::vector<NodeId>>& adj, NodeId root) {
  const std::size_t n = adj.size();
  std::vector<NodeId> par(n, kNoNode);
  std::vector<char> seen(n, 0);
  std::queue<NodeId> q;
  q.push(root);
  seen[root] = 1;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        par[v] = u;
        q.push(v);
      }
  }
  for (NodeId v = 0; v < n; ++v)
    if (v != root && !seen[v]) throw InvalidParams("bfs_tree: disconnected input");
  return RootedTree::from_parents(root, std::move(par));
}

// ---------------------------------------------------------------------------
// Generators

enum class GraphFamily {
  Line,
  Cycle,
  Star,
  Complete,
  RandomConnected,
  Caterpillar,
  Barbell,
  RandomRegular,
  BinaryTree,
};

struct GraphParams {
  double p = 0.0;       // RandomConnected extra-edge probability
  std::size_t d = 0;    // RandomRegular degree
};

inline const char* family_name(GraphFamily f) {
  switch (f) {
    case GraphFamily::Line: return "line";
    case GraphFamily::Cycle: return "cycle";
    case GraphFamily::Star: return "star";
    case GraphFamily::Complete: return "complete";
    case GraphFamily::RandomConnected: return "random_connected";
    case GraphFamily::Caterpillar: return "caterpillar";
    case GraphFamily::Barbell: return "barbell";
    case GraphFamily::RandomRegular: return "random_regular";
    case GraphFamily::BinaryTree: return "binary_tree";
  }
  return "?";
}

inline bool parse_family(const std::string& s, GraphFamily& out) {
  for (GraphFamily f : {GraphFamily::Line, GraphFamily::Cycle, GraphFamily::Star,
                        GraphFamily::Complete, GraphFamily::RandomConnected,
                        GraphFamily::Caterpillar, GraphFamily::Barbell,
                        GraphFamily::RandomRegular, GraphFamily::BinaryTree}) {
    if (s == family_name(f)) {
      out = f;
      return true;
    }
  }
  return false;
}

namespace detail {

// Uniform labeled tree via a random Prufer sequence.
inline Graph random_tree(std::size_t n, Rng& rng) {
  Graph g(n);
  if (n == 1) return g;
  if (n == 2) {
    g.add_edge(0, 1);
    return g;
  }
  std::vector<NodeId> prufer(n - 2);
  for (auto& x : prufer) x = static_cast<NodeId>(rng.below(n));
  std::vector<std::size_t> deg(n, 1);
  for (NodeId x : prufer) ++deg[x];
  std::set<NodeId> leaves;
  for (NodeId v = 0; v < n; ++v)
    if (deg[v] == 1) leaves.insert(v);
  for (NodeId x : prufer) {
    NodeId leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    g.add_edge(leaf, x);
    if (--deg[x] == 1) leaves.insert(x);
  }
  NodeId a = *leaves.begin();
  NodeId b = *std::next(leaves.begin());
  g.add_edge(a, b);
  return g;
}

inline Graph random_regular(std::size_t n, std::size_t d, Rng& rng) {
  if (d >= n || (n * d) % 2 != 0) throw InvalidParams("random_regular: need d < n and n*d even");
  if (d == 0 && n != 1) throw InvalidParams("random_regular: d=0 disconnected");
  // Configuration model with whole-pairing rejection; retried until simple
  // and connected.
  for (int attempt = 0; attempt < 4000; ++attempt) {
    std::vector<NodeId> stubs;
    stubs.reserve(n * d);
    for (NodeId v = 0; v < n; ++v)
      for (std::size_t i = 0; i < d; ++i) stubs.push_back(v);
    for (std::size_t i = stubs.size(); i > 1; --i)
      std::swap(stubs[i - 1], stubs[rng.below(i)]);
    Graph g(n);
    bool ok = true;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      NodeId u = stubs[i], v = stubs[i + 1];
      if (u == v || g.has_edge(u, v)) {
        ok = false;
        break;
      }
      g.add_edge(u, v);
    }
    if (ok && g.connected()) return g;
  }
  throw InvalidParams("random_regular: sampling did not converge");
}

}  // namespace detail

inline Graph generate(GraphFamily family, std::size_t n, const GraphParams& params, std::uint64_t seed) {
  if (n < 1) throw InvalidParams("n >= 1 required");
  Rng rng = substream(seed, {tag(StreamTag::GraphGen), static_cast<std::uint64_t>(family), n});
  Graph g(n);
  switch (family) {
    case GraphFamily::Line:
      for (NodeId v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
      break;
    case GraphFamily::Cycle:
      if (n == 1) break;
      if (n == 2) throw InvalidParams("cycle: n >= 3 (or n = 1)");
      for (NodeId v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
      g.add_edge(static_cast<NodeId>(n - 1), 0);
      break;
    case GraphFamily::Star:
      for (NodeId v = 1; v < n; ++v) g.add_edge(0, v);
      break;
    case GraphFamily::Complete:
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
      break;
    case GraphFamily::RandomConnected: {
      // Spanning-tree backbone first, so connectivity holds at any p.
      g = detail::random_tree(n, rng);
      const double p = params.p > 0.0 ? params.p : 2.0 / static_cast<double>(n);
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
          if (!g.has_edge(u, v) && rng.unit() < p) g.add_edge(u, v);
      break;
    }
    case GraphFamily::Caterpillar: {
      // Spine of ceil(n/2) nodes, remaining legs attached round-robin.
      const std::size_t spine = (n + 1) / 2;
      for (NodeId v = 0; v + 1 < spine; ++v) g.add_edge(v, v + 1);
      for (NodeId v = static_cast<NodeId>(spine); v < n; ++v)
        g.add_edge(v, static_cast<NodeId>((v - spine) % spine));
      break;
    }
    case GraphFamily::Barbell: {
      if (n < 5) throw InvalidParams("barbell: n >= 5");
      const std::size_t a = n / 2;
      for (NodeId u = 0; u < a; ++u)
        for (NodeId v = u + 1; v < a; ++v) g.add_edge(u, v);
      for (NodeId u = static_cast<NodeId>(a); u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
      g.add_edge(0, static_cast<NodeId>(a));
      break;
    }
    case GraphFamily::RandomRegular:
      g = detail::random_regular(n, params.d, rng);
      break;
    case GraphFamily::BinaryTree:
      for (NodeId v = 1; v < n; ++v) g.add_edge(v, (v - 1) / 2);
      break;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Edge-list text format: header "n m", then one "u v" per line, 0-based.

inline void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.n() << ' ' << g.m() << '\n';
  for (const EdgeRef& e : g.edges()) os << e.lo << ' ' << e.hi << '\n';
}

inline Graph read_edge_list(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw InvalidParams("edge list: bad header");
  Graph g(n);
  for (std::size_t i = 0; i < m; ++i) {
    NodeId u, v;
    if (!(is >> u >> v)) throw InvalidParams("edge list: truncated");
    g.add_edge(u, v);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Exact conductance, subset enumeration. Oracle-scale only.

inline double conductance_exact(const Graph& g) {
  const std::size_t n = g.n();
  if (n < 2) throw InvalidParams("conductance: n >= 2");
  if (n > 20) throw TooLarge("conductance_exact: n > 20");
  if (!g.connected()) return 0.0;
  const auto edges = g.edges();
  const std::size_t vol_all = 2 * g.m();
  double best = static_cast<double>(vol_all);
  const std::uint32_t full = (n == 32 ? 0 : (std::uint32_t{1} << n)) - 1;
  for (std::uint32_t s = 1; s < full; ++s) {
    std::size_t cut = 0;
    for (const EdgeRef& e : edges) {
      const bool a = (s >> e.lo) & 1, b = (s >> e.hi) & 1;
      if (a != b) ++cut;
    }
    std::size_t vol = 0;
    for (NodeId v = 0; v < n; ++v)
      if ((s >> v) & 1) vol += g.degree(v);
    const std::size_t denom = std::min(vol, vol_all - vol);
    if (denom == 0) continue;
    best = std::min(best, static_cast<double>(cut) / static_cast<double>(denom));
  }
  return best;
}

// Independent second route: Gray-code subset walk with incremental cut and
// volume. Exists to cross-check conductance_exact, keep both.
inline double conductance_gray(const Graph& g) {
  const std::size_t n = g.n();
  if (n < 2) throw InvalidParams("conductance: n >= 2");
  if (n > 20) throw TooLarge("conductance_gray: n > 20");
  if (!g.connected()) return 0.0;
  const std::size_t vol_all = 2 * g.m();
  std::vector<std::size_t> nbr_in(n, 0);  // neighbors currently inside S
  std::vector<char> in(n, 0);
  std::size_t cut = 0, vol = 0;
  double best = static_cast<double>(vol_all);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const std::uint32_t v = static_cast<std::uint32_t>(__builtin_ctzll(i));  // flipped bit
    if (!in[v]) {
      in[v] = 1;
      vol += g.degree(v);
      cut += g.degree(v) - 2 * nbr_in[v];
      for (NodeId u : g.neighbors(v)) ++nbr_in[u];
    } else {
      in[v] = 0;
      vol -= g.degree(v);
      for (NodeId u : g.neighbors(v)) --nbr_in[u];
      cut -= g.degree(v) - 2 * nbr_in[v];
    }
    const std::size_t denom = std::min(vol, vol_all - vol);
    if (denom == 0) continue;
    best = std::min(best, static_cast<double>(cut) / static_cast<double>(denom));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Target-shape checkers

struct CheckReport {
  bool pass = false;
  std::size_t max_degree = 0;
  std::size_t depth = 0;
  bool structural_ok = false;  // spanning + acyclic + consistent links

  std::string verdict_line() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " maxdeg=" << max_degree << " depth=" << depth;
    return os.str();
  }
};

// Well-formed: constant max degree, logarithmic depth.
inline CheckReport check_wft(const RootedTree& t, std::size_t n, std::size_t c_deg, std::size_t c_depth) {
  CheckReport r;
  r.structural_ok = t.n == n && t.valid();
  if (r.structural_ok) {
    r.max_degree = t.max_total_degree();
    r.depth = t.depth();
    r.pass = r.max_degree <= c_deg && r.depth <= c_depth * ceil_log2(n);
  }
  return r;
}

// Satisfactory: both bounds logarithmic.
inline CheckReport check_satisfactory(const RootedTree& t, std::size_t n, std::size_t c) {
  CheckReport r;
  r.structural_ok = t.n == n && t.valid();
  if (r.structural_ok) {
    r.max_degree = t.max_total_degree();
    r.depth = t.depth();
    const std::size_t bound = c * ceil_log2(n);
    r.pass = r.max_degree <= bound && r.depth <= bound;
  }
  return r;
}

inline bool is_star(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& overlay_edges) {
  if (n == 1) return overlay_edges.empty();
  if (overlay_edges.size() != n - 1) return false;
  // Some node must lie on every edge.
  auto [a, b] = overlay_edges.front();
  for (NodeId cand : {a, b}) {
    bool all = true;
    for (auto [u, v] : overlay_edges)
      if (u != cand && v != cand) {
        all = false;
        break;
      }
    if (!all) continue;
    // The other endpoints must be distinct and cover V \ {cand}.
    std::vector<char> seen(n, 0);
    bool ok = true;
    for (auto [u, v] : overlay_edges) {
      NodeId other = (u == cand) ? v : u;
      if (other >= n || other == cand || seen[other]) {
        ok = false;
        break;
      }
      seen[other] = 1;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace osim
