#include "catch_amalgamated.hpp"

#include <sstream>

#include "overlaysim/graph.hpp"

using namespace osim;

TEST_CASE("ceil_log2 and edge encoding") {
  CHECK(ceil_log2(1) == 1);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);

  const std::uint32_t w = id_width(64);
  EdgeRef e(13, 7);
  CHECK(e.lo == 7);
  CHECK(e.hi == 13);
  CHECK(EdgeRef::decoded(e.encoded(w), w) == e);
  CHECK(e.encoded(w) != 0);
}

TEST_CASE("prime utilities") {
  CHECK(is_prime_u64(2));
  CHECK(is_prime_u64(1'000'000'007ull));
  CHECK_FALSE(is_prime_u64(1));
  CHECK_FALSE(is_prime_u64(561));  // Carmichael
  CHECK(next_prime_above(16'777'216) == 16'777'259);
}

TEST_CASE("generators satisfy their own validators") {
  struct Case {
    GraphFamily f;
    std::size_t n;
    GraphParams p;
  };
  std::vector<Case> cases = {
      {GraphFamily::Line, 2, {}},          {GraphFamily::Line, 17, {}},
      {GraphFamily::Cycle, 3, {}},         {GraphFamily::Cycle, 12, {}},
      {GraphFamily::Star, 5, {}},          {GraphFamily::Complete, 6, {}},
      {GraphFamily::RandomConnected, 40, {.p = 0.08}},
      {GraphFamily::Caterpillar, 19, {}},  {GraphFamily::Barbell, 11, {}},
      {GraphFamily::RandomRegular, 16, {.d = 4}},
      {GraphFamily::BinaryTree, 15, {}},
  };
  for (const auto& c : cases) {
    CAPTURE(family_name(c.f), c.n);
    Graph g = generate(c.f, c.n, c.p, 7);
    CHECK(g.valid());
    CHECK(g.connected());
  }
}

TEST_CASE("star and line shapes") {
  Graph s = generate(GraphFamily::Star, 5, {}, 1);
  CHECK(s.m() == 4);
  for (NodeId v = 1; v < 5; ++v) CHECK(s.has_edge(0, v));

  Graph l = generate(GraphFamily::Line, 2, {}, 1);
  CHECK(l.m() == 1);
  CHECK(l.has_edge(0, 1));
}

TEST_CASE("random_regular: degree scan plus connectivity") {
  Graph g = generate(GraphFamily::RandomRegular, 16, {.d = 4}, 7);
  REQUIRE(g.n() == 16);
  for (NodeId v = 0; v < 16; ++v) CHECK(g.degree(v) == 4);
  CHECK(g.connected());
  CHECK(g.valid());
}

TEST_CASE("generator errors") {
  CHECK_THROWS_AS(generate(GraphFamily::RandomRegular, 15, {.d = 3}, 1), InvalidParams);
  CHECK_THROWS_AS(generate(GraphFamily::Line, 0, {}, 1), InvalidParams);
  CHECK_THROWS_AS(generate(GraphFamily::Barbell, 4, {}, 1), InvalidParams);
  Graph g(3);
  g.add_edge(0, 1);
  CHECK_THROWS_AS(g.add_edge(0, 1), InvalidParams);
  CHECK_THROWS_AS(g.add_edge(2, 2), InvalidParams);
}

TEST_CASE("conductance: K4 minimized at the bisection") {
  Graph k4 = generate(GraphFamily::Complete, 4, {}, 1);
  CHECK(conductance_exact(k4) == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("conductance: two triangles joined by one edge") {
  Graph g(6);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(0, 2);
  g.add_edge(3, 4);
  g.add_edge(4, 5);
  g.add_edge(3, 5);
  g.add_edge(2, 3);
  CHECK(conductance_exact(g) == Catch::Approx(1.0 / 7.0));
}

TEST_CASE("conductance: disconnected input yields zero") {
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  CHECK(conductance_exact(g) == 0.0);
  CHECK(conductance_gray(g) == 0.0);
}

TEST_CASE("conductance: size guard") {
  Graph g = generate(GraphFamily::Line, 21, {}, 1);
  CHECK_THROWS_AS(conductance_exact(g), TooLarge);
}

TEST_CASE("conductance: both routes agree on random graphs") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r = substream(seed, {tag(StreamTag::FuzzCase), 1});
    const std::size_t n = 4 + r.below(7);  // 4..10
    Graph g = generate(GraphFamily::RandomConnected, n, {.p = 0.3}, seed);
    CAPTURE(seed, n);
    CHECK(conductance_exact(g) == Catch::Approx(conductance_gray(g)).epsilon(1e-12));
  }
}

TEST_CASE("check_wft examples") {
  // Balanced binary tree on 15 nodes: degree 3, depth 3.
  std::vector<NodeId> par(15, kNoNode);
  for (NodeId v = 1; v < 15; ++v) par[v] = (v - 1) / 2;
  RootedTree t = RootedTree::from_parents(0, par);
  auto r = check_wft(t, 15, 6, 2);
  CHECK(r.pass);
  CHECK(r.max_degree == 3);
  CHECK(r.depth == 3);
  CHECK(r.verdict_line() == "PASS maxdeg=3 depth=3");

  // Line of 64 rooted at an endpoint: depth 63 > 2*log2(64).
  std::vector<NodeId> lp(64, kNoNode);
  for (NodeId v = 1; v < 64; ++v) lp[v] = v - 1;
  RootedTree line = RootedTree::from_parents(0, lp);
  auto lr = check_wft(line, 64, 6, 2);
  CHECK_FALSE(lr.pass);
  CHECK(lr.depth == 63);
  CHECK(lr.verdict_line() == "FAIL maxdeg=2 depth=63");
}

TEST_CASE("check_satisfactory examples") {
  std::vector<NodeId> par(10, 0);
  par[0] = kNoNode;
  RootedTree star = RootedTree::from_parents(0, par);
  auto r = check_satisfactory(star, 10, 3);
  CHECK(r.pass);  // degree 9 <= 3*4, depth 1

  std::vector<NodeId> lp(64, kNoNode);
  for (NodeId v = 1; v < 64; ++v) lp[v] = v - 1;
  RootedTree line = RootedTree::from_parents(0, lp);
  CHECK_FALSE(check_satisfactory(line, 64, 2).pass);
}

TEST_CASE("wft pass implies satisfactory pass for matching constants") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Graph g = generate(GraphFamily::RandomConnected, 31, {.p = 0.1}, seed);
    RootedTree t = bfs_tree([&] {
      std::vector<std::vector<NodeId>> adj(g.n());
      for (NodeId v = 0; v < g.n(); ++v) adj[v] = g.neighbors(v);
      return adj;
    }(), 0);
    auto w = check_wft(t, 31, 6, 3);
    if (w.pass) {
      CHECK(check_satisfactory(t, 31, 6).pass);
    }
  }
}

TEST_CASE("is_star") {
  CHECK(is_star(1, {}));
  CHECK(is_star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}));
  CHECK(is_star(5, {{1, 0}, {2, 0}, {3, 0}, {4, 0}}));
  CHECK(is_star(3, {{0, 1}, {1, 2}}));                  // P3 == K_{1,2}
  CHECK_FALSE(is_star(4, {{0, 1}, {1, 2}, {2, 3}}));    // path of 4
  CHECK_FALSE(is_star(4, {{0, 1}, {0, 2}}));            // not spanning
  CHECK_FALSE(is_star(3, {{0, 1}, {0, 1}}));            // duplicate edge
}

TEST_CASE("edge list round trip and exact format") {
  Graph g = generate(GraphFamily::Cycle, 5, {}, 1);
  std::ostringstream os;
  write_edge_list(os, g);
  CHECK(os.str() == "5 5\n0 1\n0 4\n1 2\n2 3\n3 4\n");
  std::istringstream is(os.str());
  Graph h = read_edge_list(is);
  CHECK(h.n() == g.n());
  CHECK(h.edges() == g.edges());
}

TEST_CASE("rooted tree validation and depth") {
  RootedTree t = RootedTree::singleton();
  CHECK(t.valid());
  CHECK(t.depth() == 0);

  std::vector<NodeId> bad = {kNoNode, 0, 1};
  RootedTree b = RootedTree::from_parents(0, bad);
  b.parent[1] = 2;  // break consistency
  CHECK_FALSE(b.valid());
}

TEST_CASE("bfs_tree spans and respects distances") {
  Graph g = generate(GraphFamily::Cycle, 8, {}, 1);
  std::vector<std::vector<NodeId>> adj(g.n());
  for (NodeId v = 0; v < g.n(); ++v) adj[v] = g.neighbors(v);
  RootedTree t = bfs_tree(adj, 3);
  CHECK(t.valid());
  CHECK(t.root == 3);
  CHECK(t.depth() == 4);
}
