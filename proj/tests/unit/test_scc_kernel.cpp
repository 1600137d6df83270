#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "dcm/mdm.hpp"
#include "dcm/mdm_metric.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

// Cycles inside {1,2,5,17}, {3,6,8,9,14,16}, {7,11}; acyclic links between classes.
Digraph figure_fixture() {
  std::vector<std::pair<Vertex, Vertex>> e{{1, 2},  {2, 5},  {5, 17}, {17, 1}, {3, 6},  {6, 8},   {8, 9},
                                           {9, 14}, {14, 16}, {16, 3}, {8, 3},  {7, 11}, {11, 7}, {1, 3},
                                           {5, 4},  {4, 7},  {9, 10}, {10, 12}, {13, 1}, {15, 16}, {11, 12},
                                           {17, 15}};
  for (auto& [a, b] : e) {
    --a;
    --b;
  }
  return Digraph::from_edges(17, e);
}

std::multiset<double> lengths(const MDM& m) {
  std::multiset<double> out;
  for (auto& e : m.edges()) out.insert(e.length);
  return out;
}

MDM random_scc_mdm(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const int n = 2 + static_cast<int>(rng() % 6);
  std::vector<std::pair<int, int>> arcs;
  for (int i = 0; i < n; ++i) arcs.emplace_back(i, (i + 1) % n);
  const int extra = static_cast<int>(rng() % 4);
  for (int i = 0; i < extra; ++i) arcs.emplace_back(static_cast<int>(rng() % n), static_cast<int>(rng() % n));
  std::vector<double> len;
  for (std::size_t i = 0; i < arcs.size(); ++i) len.push_back(static_cast<double>(rng() % 7));
  return oracle::mdm_from_arcs(n, arcs, len);
}

}  // namespace

TEST_CASE("figure fixture components") {
  auto g = figure_fixture();
  auto p = oracle::as_partition(strongly_connected_components(g));
  oracle::Partition want{{0, 1, 4, 16}, {2, 5, 7, 8, 13, 15}, {6, 10}, {3}, {9}, {11}, {12}, {14}};
  CHECK(p == want);
  CHECK(oracle::kosaraju(g) == want);
  auto parts = strongly_connected_components(MDM::from_digraph(g));
  std::size_t nontrivial = 0;
  for (auto& m : parts) nontrivial += m.edge_count() > 0;
  CHECK(nontrivial == 3);
}

TEST_CASE("edgeless graph gives singletons") {
  auto p = strongly_connected_components(Digraph::from_edges(6, {}));
  CHECK(p.members.size() == 6);
}

TEST_CASE("Tarjan agrees with Kosaraju") {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const double p = (0.5 + static_cast<double>(s % 5) * 0.3) / 200.0;
    auto g = oracle::random_digraph(200, p, s, s % 2 == 0);
    auto part = strongly_connected_components(g);
    CHECK(oracle::as_partition(part) == oracle::kosaraju(g));
    for (std::size_t v = 0; v < g.n(); ++v) {
      const auto& mem = part.members[part.component[v]];
      CHECK(std::find(mem.begin(), mem.end(), static_cast<std::int32_t>(v)) != mem.end());
    }
  }
}

TEST_CASE("MDM components carry their induced edges") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto g = oracle::random_digraph(40, 0.05, s, true);
    auto parts = strongly_connected_components(MDM::from_digraph(g));
    std::size_t vs = 0;
    for (auto& m : parts) vs += m.vertex_count();
    CHECK(vs == 40);
    auto gp = oracle::kosaraju(g);
    std::size_t induced = 0;
    for (auto& e : g.edges())
      for (auto& c : gp)
        if (c.count(e.tail) && c.count(e.head)) ++induced;
    std::size_t got = 0;
    for (auto& m : parts) got += m.edge_count();
    CHECK(got == induced);
  }
}

TEST_CASE("smoothing") {
  auto path = oracle::mdm_from_arcs(3, {{0, 1}, {1, 2}});
  auto s = smooth_vertex(path, 1);
  REQUIRE(s.edge_count() == 1);
  CHECK(s.edges()[0].tail == 0);
  CHECK(s.edges()[0].head == 2);
  CHECK(s.edges()[0].length == 2.0);
  CHECK(s.vertex_count() == 2);
  auto loop = oracle::mdm_from_arcs(2, {{0, 1}, {1, 1}, {1, 0}});
  CHECK_THROWS_AS(smooth_vertex(loop, 1), Error);
  auto two = oracle::mdm_from_arcs(2, {{0, 1}, {1, 0}}, {1.5, 2.0});
  auto t = smooth_vertex(two, 1);
  REQUIRE(t.edge_count() == 1);
  CHECK(t.edges()[0].tail == 0);
  CHECK(t.edges()[0].head == 0);
  CHECK(t.edges()[0].length == 3.5);
  CHECK_THROWS_AS(smooth_vertex(two, 7), Error);
}

TEST_CASE("kernel examples") {
  auto c5 = oracle::mdm_from_arcs(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  auto k = kernel(c5);
  CHECK(is_loop(k));
  CHECK(k.total_length() == 5.0);
  auto iso = kernel(oracle::mdm_from_arcs(1, {}));
  CHECK(iso.is_loop_unit());
  auto ab = oracle::mdm_from_arcs(2, {{0, 1}, {0, 1}, {1, 0}});
  auto kab = kernel(ab);
  CHECK(kab.vertex_count() == 2);
  CHECK(kab.edge_count() == 3);
  CHECK(is_three_regular(kab));
  CHECK(MDM::loop_unit().is_loop_unit());
  CHECK(MDM::loop_unit().total_length() == 0.0);
}

TEST_CASE("kernel properties on random strongly connected MDMs") {
  for (std::uint64_t s = 0; s < 2000; ++s) {
    auto m = random_scc_mdm(s);
    auto k = kernel(m);
    CHECK(k.total_length() == m.total_length());
    CHECK(static_cast<long>(k.edge_count()) - static_cast<long>(k.vertex_count()) ==
          static_cast<long>(m.edge_count()) - static_cast<long>(m.vertex_count()));
    for (auto v : k.vertices()) CHECK_FALSE(is_smoothable(k, v));
    auto kk = kernel(k);
    CHECK(canonical_code(kk) == canonical_code(k));
    CHECK(lengths(kk) == lengths(k));
    // Surviving vertices stay in one component.
    CHECK(strongly_connected_components(k).size() == 1);
    // Confluence: smoothing in a random order reaches the same kernel.
    Rng rng = make_rng(s);
    MDM r = m;
    for (bool again = true; again;) {
      again = false;
      auto vs = r.vertices();
      std::shuffle(vs.begin(), vs.end(), rng);
      for (auto v : vs)
        if (is_smoothable(r, v)) {
          r = smooth_vertex(r, v);
          again = true;
          break;
        }
    }
    CHECK(canonical_code(r) == canonical_code(k));
    CHECK(dg_distance(r, k) == Distance::finite(0.0));
  }
}

TEST_CASE("smoothing keeps the SCC partition of surviving vertices") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto g = oracle::random_digraph(30, 0.06, s, true);
    auto m = MDM::from_digraph(g);
    auto before = oracle::kosaraju(g);
    auto k = kernel(m);
    CHECK(k.total_length() == m.total_length());
    std::set<std::set<std::int64_t>> after;
    for (auto& c : strongly_connected_components(k))
      after.insert(std::set<std::int64_t>(c.vertices().begin(), c.vertices().end()));
    std::set<std::set<std::int64_t>> restricted;
    for (auto& c : before) {
      std::set<std::int64_t> keep;
      for (auto v : c)
        if (k.has_vertex(v)) keep.insert(v);
      if (!keep.empty()) restricted.insert(keep);
    }
    CHECK(after == restricted);
  }
}

TEST_CASE("rank and pad") {
  auto empty = rank_and_pad({}, 3);
  REQUIRE(empty.size() == 3);
  for (auto& m : empty) CHECK(m.is_loop_unit());
  auto loop = [](double len) { return oracle::mdm_from_arcs(1, {{0, 0}}, {len}); };
  std::vector<RankedScc> in{{loop(4), 4, 4.0, 2}, {loop(6), 6, 6.0, 9}, {loop(2), 2, 2.0, 0}};
  auto r = rank_and_pad(in, 5);
  CHECK(r[0].total_length() == 6.0);
  CHECK(r[1].total_length() == 4.0);
  CHECK(r[2].total_length() == 2.0);
  CHECK(r[3].is_loop_unit());
  CHECK(r[4].is_loop_unit());
  std::vector<RankedScc> tie{{loop(7), 3, 7.0, 5}, {loop(8), 3, 8.0, 1}};
  auto t = rank_and_pad(tie, 2);
  CHECK(t[0].total_length() == 8.0);
  auto byl = rank_and_pad({{loop(7), 9, 7.0, 5}, {loop(8), 3, 8.0, 1}}, 1, RankKey::length);
  CHECK(byl[0].total_length() == 8.0);
}
