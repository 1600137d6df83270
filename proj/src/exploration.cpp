#include "dcm/exploration.hpp"

#include <algorithm>
#include <ostream>

#include "dcm/mdm.hpp"

namespace dcm {

std::vector<std::int64_t> OutForest::subtree_sizes() const {
  std::vector<std::int64_t> size(nodes.size(), 1);
  for (std::size_t i = nodes.size(); i-- > 0;)
    if (nodes[i].parent != no_node) size[nodes[i].parent] += size[i];
  return size;
}

std::vector<NodeId> OutForest::tree_roots() const {
  std::vector<NodeId> root(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    root[i] = nodes[i].parent == no_node ? static_cast<NodeId>(i) : root[nodes[i].parent];
  return root;
}

void OutForest::rebuild_processes() {
  const std::size_t K = nodes.size();
  lukasiewicz.assign(K + 1, 0);
  unpaired_in.assign(K + 1, 0);
  purple_count.assign(K + 1, 0);
  running_min.assign(K + 1, 0);
  for (std::size_t k = 1; k <= K; ++k) {
    const auto& x = nodes[k - 1];
    lukasiewicz[k] = lukasiewicz[k - 1] + x.out_degree - 1;
    purple_count[k] = purple_count[k - 1] + (x.color == Color::purple ? 1 : 0);
    running_min[k] = std::min(running_min[k - 1], lukasiewicz[k]);
    if (x.color == Color::purple)
      unpaired_in[k] = unpaired_in[k - 1] - 1;
    else
      unpaired_in[k] = unpaired_in[k - 1] + x.in_degree - (x.parent == no_node ? 0 : 1);
  }
  auto h = height_processes(*this);
  height = std::move(h.height);
  length_height = std::move(h.length_height);
}

HeightProcesses height_processes(const OutForest& f) {
  HeightProcesses h;
  h.height.assign(f.size(), 0);
  h.length_height.assign(f.size(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const NodeId p = f.nodes[i].parent;
    if (p == no_node) continue;
    h.height[i] = h.height[p] + 1;
    h.length_height[i] = h.length_height[p] + f.weight(p);
  }
  return h;
}

Exploration run_edfs(const Digraph& g, std::uint64_t seed) {
  Exploration x;
  auto& tr = x.trace;
  auto& f = x.forest;
  const std::size_t n = g.n();
  const auto indeg = g.in_degrees();
  const auto outdeg = g.out_degrees();

  // Root order: successive sampling proportional to in-degree, via exponential clocks.
  // The first undiscovered vertex in this order is a size-biased pick among the undiscovered.
  Rng root_rng = make_rng(derive_seed(seed, {0}));
  Rng order_rng = make_rng(derive_seed(seed, {1}));
  std::vector<std::pair<double, Vertex>> clocks;
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] > 0) clocks.emplace_back(expo(root_rng) / indeg[v], static_cast<Vertex>(v));
  std::sort(clocks.begin(), clocks.end());

  tr.vertex_node.assign(n, no_node);
  tr.edge_node.assign(g.m(), no_node);
  std::vector<std::size_t> stack;
  std::int64_t s_minus = 0, s_plus = 0, k = 0;
  std::size_t next_root = 0;
  const auto& off = g.out_offsets();
  const auto& ids = g.out_ids();

  auto discover = [&](Vertex w, NodeId parent) {
    const NodeId id = static_cast<NodeId>(f.nodes.size());
    f.nodes.push_back({parent, Color::black, w, outdeg[w], indeg[w]});
    tr.vertex_node[w] = id;
    tr.discovery_order.push_back(w);
    const std::size_t first = stack.size();
    stack.insert(stack.end(), ids.begin() + static_cast<std::ptrdiff_t>(off[w]),
                 ids.begin() + static_cast<std::ptrdiff_t>(off[w + 1]));
    std::shuffle(stack.begin() + static_cast<std::ptrdiff_t>(first), stack.end(), order_rng);
    s_minus += indeg[w];
    s_plus += outdeg[w];
    return id;
  };

  for (;;) {
    if (stack.empty()) {
      while (next_root < clocks.size() && tr.vertex_node[clocks[next_root].second] != no_node) ++next_root;
      if (next_root == clocks.size()) break;
      const Vertex r = clocks[next_root].second;
      ++k;
      s_plus -= 1;
      discover(r, no_node);
      tr.steps.push_back({k, StepKind::new_root, r, Outcome::discovered, s_minus, s_plus, -1});
      continue;
    }
    const std::size_t e = stack.back();
    stack.pop_back();
    ++k;
    s_minus -= 1;
    s_plus -= 1;
    const Vertex v = g.edge(e).tail, w = g.edge(e).head;
    const NodeId parent = tr.vertex_node[v];
    if (tr.vertex_node[w] == no_node) {
      tr.edge_node[e] = discover(w, parent);
      tr.steps.push_back({k, StepKind::edge_pop, w, Outcome::discovered, s_minus, s_plus, static_cast<std::int64_t>(e)});
    } else {
      const NodeId id = static_cast<NodeId>(f.nodes.size());
      f.nodes.push_back({parent, Color::purple, -1, 0, 0});
      tr.edge_node[e] = id;
      x.surplus.push_back({k, id, v, w, tr.vertex_node[w], static_cast<std::int64_t>(e), SurplusKind::non_ancestral, false});
      tr.steps.push_back({k, StepKind::edge_pop, w, Outcome::purple, s_minus, s_plus, static_cast<std::int64_t>(e)});
    }
  }
  f.rebuild_processes();
  classify_surplus(f, x.surplus);
  const auto flags = find_candidates_exact(f, x.surplus);
  for (std::size_t i = 0; i < flags.size(); ++i) x.surplus[i].is_candidate = flags[i];
  return x;
}

void classify_surplus(const OutForest& forest, std::vector<SurplusEdge>& surplus) {
  const auto size = forest.subtree_sizes();
  for (auto& s : surplus) {
    const NodeId h = s.head_node;
    const bool ancestor = h != no_node && h < s.purple && s.purple < h + size[h];
    s.kind = ancestor ? SurplusKind::ancestral : SurplusKind::non_ancestral;
  }
}

std::vector<bool> find_candidates_exact(const OutForest& forest, const std::vector<SurplusEdge>& surplus) {
  const auto size = forest.subtree_sizes();
  const auto root = forest.tree_roots();
  std::vector<bool> cand(surplus.size());
  for (std::size_t i = 0; i < surplus.size(); ++i) cand[i] = surplus[i].kind == SurplusKind::ancestral;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<NodeId> tails;
    for (std::size_t i = 0; i < surplus.size(); ++i)
      if (cand[i]) tails.push_back(surplus[i].purple);
    std::sort(tails.begin(), tails.end());
    for (std::size_t i = 0; i < surplus.size(); ++i) {
      if (cand[i]) continue;
      const NodeId h = surplus[i].head_node;
      if (h == no_node || root[h] != root[surplus[i].purple]) continue;
      auto it = std::upper_bound(tails.begin(), tails.end(), h);
      if (it != tails.end() && *it < h + size[h]) {
        cand[i] = true;
        changed = true;
      }
    }
  }
  return cand;
}

bool sccs_consistency(const Digraph& g, const Exploration& x, const std::vector<bool>& candidates) {
  const auto& f = x.forest;
  const auto size = f.subtree_sizes();
  const auto part = strongly_connected_components(g);
  std::vector<NodeId> tails;
  std::vector<std::int64_t> surplus_of(f.size(), -1);
  for (std::size_t i = 0; i < x.surplus.size(); ++i) {
    surplus_of[x.surplus[i].purple] = static_cast<std::int64_t>(i);
    if (candidates[i]) tails.push_back(x.surplus[i].purple);
  }
  std::sort(tails.begin(), tails.end());
  for (std::size_t e = 0; e < g.m(); ++e) {
    const auto& ed = g.edge(e);
    if (part.component[ed.tail] != part.component[ed.head]) continue;
    const NodeId node = x.trace.edge_node[e];
    if (node == no_node) return false;
    if (f.nodes[node].color == Color::purple) {
      if (!candidates[surplus_of[node]]) return false;
    } else {
      auto it = std::upper_bound(tails.begin(), tails.end(), node);
      if (it == tails.end() || *it >= node + size[node]) return false;
    }
  }
  return true;
}

bool sccs_within_trees(const Digraph& g, const Exploration& x) {
  const auto part = strongly_connected_components(g);
  const auto root = x.forest.tree_roots();
  for (const auto& comp : part.members) {
    if (comp.size() < 2) continue;
    NodeId r = no_node;
    for (auto v : comp) {
      const NodeId node = x.trace.vertex_node[v];
      if (node == no_node) return false;
      if (r == no_node) r = root[node];
      if (root[node] != r) return false;
    }
  }
  return true;
}

bool trace_identities_hold(const Exploration& x) {
  const auto& f = x.forest;
  const auto& tr = x.trace;
  std::int64_t sum_out = 0, sum_in = 0;
  std::size_t black = 0;
  for (std::size_t k = 1; k <= f.size(); ++k) {
    const std::int64_t discovered = static_cast<std::int64_t>(k) - f.purple_count[k];
    while (static_cast<std::int64_t>(black) < discovered) {
      const NodeId node = tr.vertex_node[tr.discovery_order[black]];
      sum_out += f.nodes[node].out_degree;
      sum_in += f.nodes[node].in_degree;
      ++black;
    }
    const std::int64_t roots = 1 - f.running_min[k - 1];
    if (tr.steps[k - 1].s_plus != sum_out - static_cast<std::int64_t>(k)) return false;
    if (f.lukasiewicz[k] != tr.steps[k - 1].s_plus) return false;
    if (tr.steps[k - 1].s_minus != sum_in - (static_cast<std::int64_t>(k) - roots)) return false;
    if (f.unpaired_in[k] != tr.steps[k - 1].s_minus) return false;
  }
  return true;
}

void write_trace_csv(std::ostream& os, const Exploration& x) {
  os << "k,kind,vertex,outcome,s_minus,s_plus,height,length_height\n";
  for (const auto& s : x.trace.steps) {
    const auto node = static_cast<std::size_t>(s.k - 1);
    os << s.k << ',' << (s.kind == StepKind::new_root ? "new-root" : "edge-pop") << ',' << s.focus_vertex << ','
       << (s.outcome == Outcome::discovered ? "discovered" : "purple") << ',' << s.s_minus << ',' << s.s_plus << ','
       << x.forest.height[node] << ',' << x.forest.length_height[node] << '\n';
  }
}

}  // namespace dcm
