#include "catch_amalgamated.hpp"

#include "overlaysim/merge_star.hpp"

using namespace osim;

namespace {

MergeStarConfig cfg_with_seed(std::uint64_t seed) {
  MergeStarConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("merge_star: single node is already a star") {
  Graph g = generate(GraphFamily::Line, 1, {}, 0);
  MergeStarResult r = run_merge_star(g, cfg_with_seed(1));
  CHECK(r.success);
  CHECK(r.phases == 0);
  CHECK(r.ledger.rounds == 0);
  CHECK(is_star(1, r.overlay_edges()));
}

TEST_CASE("merge_star: two nodes merge within a dozen phases on average") {
  Graph g = generate(GraphFamily::Line, 2, {}, 0);
  std::size_t total_phases = 0;
  const int runs = 400;
  for (int s = 0; s < runs; ++s) {
    MergeStarResult r = run_merge_star(g, cfg_with_seed(static_cast<std::uint64_t>(s)));
    REQUIRE(r.success);
    CHECK(is_star(2, r.overlay_edges()));
    CHECK(r.ledger.rounds == 7 * r.phases);
    total_phases += r.phases;
  }
  CHECK(static_cast<double>(total_phases) / runs <= 12.0);
}

TEST_CASE("merge_star: random connected graphs end as stars") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Graph g = generate(GraphFamily::RandomConnected, 64, {.p = 0.06}, seed);
    MergeStarResult r = run_merge_star(g, cfg_with_seed(seed));
    CAPTURE(seed);
    REQUIRE(r.success);
    CHECK(is_star(64, r.overlay_edges()));
    CHECK(r.phases <= 40 * ceil_log2(64));
    CHECK(r.ledger.rounds == 7 * r.phases);
    CHECK(r.ledger.total_messages <= 14 * 64 * r.phases);
    CHECK(r.ledger.conservation_ok());
    // Everyone agrees on one leader and the leader leads itself.
    for (NodeId v = 0; v < 64; ++v) CHECK(r.leader[v] == r.center);
  }
}

TEST_CASE("merge_star: other families") {
  for (GraphFamily f : {GraphFamily::Line, GraphFamily::Cycle, GraphFamily::Star,
                        GraphFamily::Caterpillar}) {
    Graph g = generate(f, 33, {}, 3);
    MergeStarResult r = run_merge_star(g, cfg_with_seed(17));
    CAPTURE(family_name(f));
    REQUIRE(r.success);
    CHECK(is_star(33, r.overlay_edges()));
  }
}

TEST_CASE("merge_star: contraction statistics stay under the bound") {
  std::uint64_t before_sum = 0;
  double ratio_sum = 0;
  std::size_t phases = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = generate(GraphFamily::RandomConnected, 96, {.p = 0.05}, seed);
    MergeStarResult r = run_merge_star(g, cfg_with_seed(seed + 100));
    REQUIRE(r.success);
    for (auto [cc_before, cc_after] : r.contraction) {
      REQUIRE(cc_before >= 2);
      ratio_sum += static_cast<double>(cc_after) / cc_before;
      before_sum += cc_before;
      ++phases;
    }
  }
  REQUIRE(phases >= 50);
  CHECK(ratio_sum / static_cast<double>(phases) <= 63.0 / 64.0 + 0.02);
}

TEST_CASE("merge_star: deterministic ledger for a fixed seed") {
  Graph g = generate(GraphFamily::RandomConnected, 48, {.p = 0.08}, 5);
  MergeStarResult a = run_merge_star(g, cfg_with_seed(42));
  MergeStarResult b = run_merge_star(g, cfg_with_seed(42));
  CHECK(a.ledger.identical_to(b.ledger));
  CHECK(a.leader == b.leader);
  MergeStarResult c = run_merge_star(g, cfg_with_seed(43));
  CHECK_FALSE(a.ledger.identical_to(c.ledger));  // almost surely
}

TEST_CASE("merge_star: disconnected input rejected") {
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  CHECK_THROWS_AS(run_merge_star(g, cfg_with_seed(1)), InvalidParams);
}

TEST_CASE("merge_star: reduced bandwidth doubles reported rounds") {
  Graph g = generate(GraphFamily::RandomConnected, 64, {.p = 0.06}, 2);
  MergeStarConfig cfg = cfg_with_seed(7);
  cfg.model.variant = GossipReplyModel{.b_bits = static_cast<std::uint32_t>(ceil_log2(64) / 2)};
  MergeStarResult r = run_merge_star(g, cfg);
  REQUIRE(r.success);
  CHECK(r.reported_rounds == 2 * r.ledger.rounds);
}

TEST_CASE("star_to_topology: cycle target") {
  Graph star = generate(GraphFamily::Star, 64, {}, 0);
  Graph target = generate(GraphFamily::Cycle, 64, {}, 0);
  ModelConfig model;
  model.variant = GossipReplyModel{};
  StarToTopologyResult r = run_star_to_topology(star, target, model, 9);
  CHECK(r.rounds <= target.max_degree() + 2);
  // Relabel H through the bijection and compare edge sets exactly.
  std::vector<std::pair<NodeId, NodeId>> expect;
  std::vector<NodeId> node_of(64);
  for (NodeId v = 0; v < 64; ++v) node_of[r.slot_of[v]] = v;
  for (const EdgeRef& e : target.edges()) {
    NodeId a = node_of[e.lo], b = node_of[e.hi];
    expect.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(expect.begin(), expect.end());
  CHECK(r.overlay_edges == expect);
}

TEST_CASE("star_to_topology: star target is the identity shape") {
  Graph star = generate(GraphFamily::Star, 16, {}, 0);
  ModelConfig model;
  StarToTopologyResult r = run_star_to_topology(star, star, model, 3);
  CHECK(r.overlay_edges.size() == 15);
}

TEST_CASE("star_to_topology: rejects non-star input and oversized degree") {
  Graph line = generate(GraphFamily::Line, 8, {}, 0);
  Graph cyc = generate(GraphFamily::Cycle, 8, {}, 0);
  ModelConfig model;
  CHECK_THROWS_AS(run_star_to_topology(line, cyc, model, 1), InvalidParams);

  Graph star = generate(GraphFamily::Star, 8, {}, 0);
  Graph dense = generate(GraphFamily::Complete, 8, {}, 0);  // degree 7
  ModelConfig tight;
  tight.word_budget_factor = 1;  // budget 1 word, degree 7 cannot fit
  CHECK_THROWS_AS(run_star_to_topology(star, dense, tight, 1), DegreeTooLarge);
}
