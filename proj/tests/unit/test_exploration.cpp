#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "dcm/common.hpp"
#include "dcm/exploration.hpp"
#include "dcm/graph_sampler.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

OutForest make_forest(const std::vector<ForestNode>& nodes) {
  OutForest f;
  f.nodes = nodes;
  f.rebuild_processes();
  return f;
}

Digraph dcm_graph(std::size_t n, std::uint64_t seed) {
  auto law = JointDegreeLaw::poisson_product(1, 1);
  auto cd = sample_conditioned_degrees(law, n, derive_seed(seed, {0}), 100'000'000);
  return pair_configuration(cd.degrees, derive_seed(seed, {1}));
}

}  // namespace

TEST_CASE("single self-loop") {
  auto g = Digraph::from_edges(1, {{0, 0}});
  auto x = run_edfs(g, 1);
  REQUIRE(x.trace.steps.size() == 2);
  CHECK(x.trace.steps[0].kind == StepKind::new_root);
  CHECK(x.trace.steps[0].s_plus == 0);
  CHECK(x.trace.steps[0].s_minus == 1);
  CHECK(x.trace.steps[1].kind == StepKind::edge_pop);
  CHECK(x.trace.steps[1].outcome == Outcome::purple);
  REQUIRE(x.forest.size() == 2);
  CHECK(x.forest.nodes[0].color == Color::black);
  CHECK(x.forest.nodes[1].color == Color::purple);
  CHECK(x.forest.nodes[1].parent == 0);
  REQUIRE(x.surplus.size() == 1);
  CHECK(x.surplus[0].kind == SurplusKind::ancestral);
  CHECK(x.surplus[0].is_candidate);
}

TEST_CASE("no positive in-degree vertex gives an empty trace") {
  auto g = Digraph::from_edges(4, {});
  auto x = run_edfs(g, 1);
  CHECK(x.trace.steps.empty());
  CHECK(x.forest.size() == 0);
  CHECK(x.surplus.empty());
}

TEST_CASE("2-cycle") {
  auto g = Digraph::from_edges(2, {{0, 1}, {1, 0}});
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto x = run_edfs(g, s);
    REQUIRE(x.forest.size() == 3);
    CHECK(x.forest.nodes[0].parent == no_node);
    CHECK(x.forest.nodes[1].parent == 0);
    CHECK(x.forest.nodes[2].parent == 1);
    CHECK(x.forest.nodes[2].color == Color::purple);
    REQUIRE(x.surplus.size() == 1);
    CHECK(x.surplus[0].kind == SurplusKind::ancestral);
    auto flags = find_candidates_exact(x.forest, x.surplus);
    CHECK(std::count(flags.begin(), flags.end(), true) == 1);
    CHECK(sccs_consistency(g, x, flags));
  }
}

TEST_CASE("height processes") {
  auto one = make_forest({{no_node, Color::black, 0, 0, 1}});
  CHECK(one.height == std::vector<std::int64_t>{0});
  CHECK(one.length_height == std::vector<std::int64_t>{0});
  auto chain = make_forest({{no_node, Color::black, 0, 1, 1}, {0, Color::black, 1, 1, 1}, {1, Color::black, 2, 0, 1}});
  CHECK(chain.height == std::vector<std::int64_t>{0, 1, 2});
  CHECK(chain.length_height == std::vector<std::int64_t>{0, 1, 1});
  auto fat = make_forest({{no_node, Color::black, 0, 1, 3}, {0, Color::black, 1, 0, 1}});
  CHECK(fat.length_height[1] == 3);
  auto hp = height_processes(chain);
  CHECK(hp.height == chain.height);
}

TEST_CASE("classification across trees") {
  auto f = make_forest({{no_node, Color::black, 0, 1, 1},
                        {0, Color::black, 1, 0, 2},
                        {no_node, Color::black, 2, 1, 1},
                        {2, Color::purple, -1, 0, 0}});
  std::vector<SurplusEdge> s{{4, 3, 2, 1, 1, -1, SurplusKind::ancestral, false}};
  classify_surplus(f, s);
  CHECK(s[0].kind == SurplusKind::non_ancestral);
  CHECK_FALSE(find_candidates_exact(f, s)[0]);
  std::vector<SurplusEdge> none;
  classify_surplus(f, none);
  CHECK(find_candidates_exact(f, none).empty());
}

TEST_CASE("candidate fixed point on a hand-built forest") {
  // 0 -> 1 -> 2 -> P3 (head 0, ancestral); 0 -> 4 -> P5 (head 1, reaches the tail 3);
  // 0 -> 6 -> P7 (head 4, reaches the tail 5 only after the second pass).
  auto f = make_forest({{no_node, Color::black, 0, 3, 2},
                        {0, Color::black, 1, 1, 2},
                        {1, Color::black, 2, 1, 1},
                        {2, Color::purple, -1, 0, 0},
                        {0, Color::black, 3, 1, 2},
                        {4, Color::purple, -1, 0, 0},
                        {0, Color::black, 4, 1, 1},
                        {6, Color::purple, -1, 0, 0}});
  std::vector<SurplusEdge> s{{4, 3, 2, 0, 0, -1, SurplusKind::non_ancestral, false},
                             {6, 5, 3, 1, 1, -1, SurplusKind::ancestral, false},
                             {8, 7, 4, 3, 4, -1, SurplusKind::ancestral, false}};
  classify_surplus(f, s);
  CHECK(s[0].kind == SurplusKind::ancestral);
  CHECK(s[1].kind == SurplusKind::non_ancestral);
  CHECK(s[2].kind == SurplusKind::non_ancestral);
  auto flags = find_candidates_exact(f, s);
  CHECK(flags == std::vector<bool>{true, true, true});
  // Without the ancestral seed nothing is a candidate.
  s.erase(s.begin());
  CHECK(find_candidates_exact(f, s) == std::vector<bool>{false, false});
}

TEST_CASE("DAGs have no candidates") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng = make_rng(seed);
    std::vector<std::pair<Vertex, Vertex>> e;
    for (Vertex i = 0; i < 20; ++i)
      for (Vertex j = i + 1; j < 20; ++j)
        if (uniform01(rng) < 0.2) e.emplace_back(i, j);
    auto g = Digraph::from_edges(20, e);
    auto x = run_edfs(g, seed);
    for (auto& s : x.surplus) CHECK_FALSE(s.is_candidate);
  }
}

TEST_CASE("structure on random digraphs") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto g = oracle::random_digraph(50, 1.5 / 50, seed);
    auto x = run_edfs(g, seed);
    std::vector<bool> flags;
    for (auto& s : x.surplus) flags.push_back(s.is_candidate);
    CHECK(sccs_consistency(g, x, flags));
    CHECK(sccs_within_trees(g, x));
    for (auto& s : x.surplus)
      if (s.kind == SurplusKind::ancestral) CHECK(s.is_candidate);
  }
  CHECK(sccs_consistency(Digraph::from_edges(5, {}), run_edfs(Digraph::from_edges(5, {}), 1), {}));
}

TEST_CASE("trace identities, recomputed independently") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto g = dcm_graph(seed % 2 ? 300 : 2000, seed);
    auto x = run_edfs(g, seed);
    const auto& f = x.forest;
    CHECK(trace_identities_hold(x));
    // Every positive in-degree vertex is discovered; purple leaves = surplus edges.
    auto indeg = g.in_degrees();
    std::size_t positive = 0;
    for (int d : indeg) positive += d > 0;
    CHECK(x.trace.discovery_order.size() == positive);
    std::size_t purple = 0;
    for (auto& nd : f.nodes) purple += nd.color == Color::purple;
    CHECK(purple == x.surplus.size());
    // s+(k) = sum_{i <= k - P(k)} d+(order[i]) - k.
    auto outdeg = g.out_degrees();
    std::vector<std::int64_t> prefix{0};
    for (auto v : x.trace.discovery_order) prefix.push_back(prefix.back() + outdeg[v]);
    bool ok = true;
    for (std::size_t k = 1; k <= f.size(); ++k) {
      ok = ok && x.trace.steps[k - 1].s_plus == prefix[k - f.purple_count[k]] - static_cast<std::int64_t>(k);
      auto dp = f.purple_count[k] - f.purple_count[k - 1];
      ok = ok && (dp == 0 || dp == 1);
      if (f.nodes[k - 1].color == Color::purple) {
        ok = ok && f.running_min[k] <= f.running_min[k - 1];
        // The step before a purple leaf never empties the stack.
        ok = ok && k >= 2 && f.running_min[k - 1] == f.running_min[k - 2];
      }
    }
    CHECK(ok);
    // Height = number of strict ancestors; length height = sum of weights over them.
    for (std::size_t i = 0; i < f.size(); i += 7) {
      std::int64_t h = 0, lh = 0;
      for (auto p = f.nodes[i].parent; p != no_node; p = f.nodes[p].parent) {
        ++h;
        lh += f.nodes[p].in_degree - 1 + (f.nodes[p].parent == no_node ? 1 : 0);
      }
      CHECK(f.height[i] == h);
      CHECK(f.length_height[i] == lh);
    }
    for (auto& nd : f.nodes)
      if (nd.color == Color::purple) CHECK(nd.out_degree == 0);
    CHECK(sccs_within_trees(g, x));
  }
}

TEST_CASE("candidate flags ignore non-candidate heads placed off candidate paths") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto g = dcm_graph(400, seed);
    auto x = run_edfs(g, seed);
    const auto& f = x.forest;
    auto size = f.subtree_sizes();
    auto root = f.tree_roots();
    auto flags = find_candidates_exact(f, x.surplus);
    std::vector<NodeId> tails;
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) tails.push_back(x.surplus[i].purple);
    auto covers_tail = [&](NodeId u) {
      for (auto t : tails)
        if (u < t && t < u + size[u]) return true;
      return false;
    };
    Rng rng = make_rng(seed);
    for (int rep = 0; rep < 3; ++rep) {
      auto moved = x.surplus;
      for (std::size_t i = 0; i < moved.size(); ++i) {
        if (flags[i]) continue;
        std::vector<NodeId> legal;
        for (NodeId u = 0; u < static_cast<NodeId>(f.size()); ++u) {
          if (f.nodes[u].color != Color::black) continue;
          bool anc = u < moved[i].purple && moved[i].purple < u + size[u];
          if (root[u] != root[moved[i].purple] || (!anc && !covers_tail(u))) legal.push_back(u);
        }
        if (legal.empty()) continue;
        moved[i].head_node = legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)];
      }
      classify_surplus(f, moved);
      CHECK(find_candidates_exact(f, moved) == flags);
    }
  }
}

TEST_CASE("trace csv") {
  auto g = Digraph::from_edges(2, {{0, 1}, {1, 0}});
  std::ostringstream os;
  write_trace_csv(os, run_edfs(g, 3));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "k,kind,vertex,outcome,s_minus,s_plus,height,length_height");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("replay is deterministic") {
  auto g = dcm_graph(1000, 5);
  auto a = run_edfs(g, 9), b = run_edfs(g, 9);
  CHECK(a.trace.discovery_order == b.trace.discovery_order);
  CHECK(a.forest.lukasiewicz == b.forest.lukasiewicz);
}
