#include "dcm/graph.hpp"

#include <istream>
#include <ostream>

namespace dcm {

DegreeSequence DegreeSequence::from_pairs(const std::vector<DegreePair>& pairs) {
  DegreeSequence s;
  s.n = pairs.size();
  std::int64_t in = 0, out = 0;
  for (const auto& p : pairs) {
    s.d_minus.push_back(p.in);
    s.d_plus.push_back(p.out);
    in += p.in;
    out += p.out;
  }
  if (in != out) throw Error(ErrorKind::unbalanced_sequence, "sum of in-degrees differs from sum of out-degrees");
  s.total = in;
  return s;
}

Digraph Digraph::from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
  Digraph g(n);
  std::vector<int> out_used(n, 0), in_used(n, 0);
  for (auto [t, h] : edges) {
    if (t < 0 || h < 0 || static_cast<std::size_t>(t) >= n || static_cast<std::size_t>(h) >= n)
      throw Error(ErrorKind::invalid_argument, "edge endpoint out of range");
    g.edges_.push_back({t, h, out_used[t]++, in_used[h]++});
  }
  g.finalize();
  return g;
}

std::vector<int> Digraph::in_degrees() const {
  std::vector<int> d(n_, 0);
  for (const auto& e : edges_) ++d[e.head];
  return d;
}

std::vector<int> Digraph::out_degrees() const {
  std::vector<int> d(n_, 0);
  for (const auto& e : edges_) ++d[e.tail];
  return d;
}

void Digraph::finalize() {
  offsets_.assign(n_ + 1, 0);
  for (const auto& e : edges_) ++offsets_[e.tail + 1];
  for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] += offsets_[v];
  out_ids_.assign(edges_.size(), 0);
  std::vector<std::size_t> pos(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t id = 0; id < edges_.size(); ++id) out_ids_[pos[edges_[id].tail]++] = id;
}

void write_graph(std::ostream& os, const Digraph& g) {
  os << g.n() << ' ' << g.m() << '\n';
  for (const auto& e : g.edges()) os << e.tail << ' ' << e.head << '\n';
}

Digraph read_graph(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw Error(ErrorKind::io, "graph file: missing 'n m' header");
  std::vector<std::pair<Vertex, Vertex>> edges(m);
  for (auto& [t, h] : edges)
    if (!(is >> t >> h)) throw Error(ErrorKind::io, "graph file: truncated edge list");
  return Digraph::from_edges(n, edges);
}

}  // namespace dcm
