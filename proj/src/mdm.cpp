#include "dcm/mdm.hpp"

#include <algorithm>
#include <numeric>

namespace dcm {

MDM::MDM(std::vector<VertexId> vertices, std::vector<MdmEdge> edges) : vertices_(std::move(vertices)) {
  std::sort(vertices_.begin(), vertices_.end());
  if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
    throw Error(ErrorKind::invalid_argument, "duplicate vertex id");
  for (const auto& e : edges) {
    if (!has_vertex(e.tail) || !has_vertex(e.head)) throw Error(ErrorKind::invalid_argument, "edge endpoint not a vertex");
    if (!(e.length >= 0)) throw Error(ErrorKind::invalid_argument, "negative edge length");
    next_edge_id_ = std::max(next_edge_id_, e.id + 1);
  }
  edges_ = std::move(edges);
}

MDM MDM::loop_unit() { return MDM({0}, {{0, 0, 0, 0.0}}); }

MDM MDM::from_digraph(const Digraph& g) {
  std::vector<VertexId> vs(g.n());
  std::iota(vs.begin(), vs.end(), VertexId{0});
  std::vector<MdmEdge> es;
  es.reserve(g.m());
  for (std::size_t i = 0; i < g.m(); ++i)
    es.push_back({static_cast<std::int64_t>(i), g.edge(i).tail, g.edge(i).head, 1.0});
  return MDM(std::move(vs), std::move(es));
}

MDM MDM::from_json(const nlohmann::json& j) {
  std::vector<VertexId> vs = j.at("vertices").get<std::vector<VertexId>>();
  std::vector<MdmEdge> es;
  std::int64_t id = 0;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) throw Error(ErrorKind::invalid_argument, "edges are [tail, head, length]");
    es.push_back({id++, e[0].get<VertexId>(), e[1].get<VertexId>(), e[2].get<double>()});
  }
  return MDM(std::move(vs), std::move(es));
}

nlohmann::json MDM::to_json() const {
  nlohmann::json es = nlohmann::json::array();
  for (const auto& e : edges_) es.push_back({e.tail, e.head, e.length});
  return {{"vertices", vertices_}, {"edges", es}};
}

double MDM::total_length() const {
  CompensatedSum s;
  for (const auto& e : edges_) s.add(e.length);
  return s.value();
}

bool MDM::is_loop_unit() const {
  return vertices_.size() == 1 && edges_.size() == 1 && edges_[0].length == 0.0;
}

bool MDM::has_vertex(VertexId v) const { return std::binary_search(vertices_.begin(), vertices_.end(), v); }

std::size_t MDM::index_of(VertexId v) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  if (it == vertices_.end() || *it != v) throw Error(ErrorKind::invalid_argument, "unknown vertex");
  return static_cast<std::size_t>(it - vertices_.begin());
}

std::vector<int> MDM::in_degrees() const {
  std::vector<int> d(vertices_.size(), 0);
  for (const auto& e : edges_) ++d[index_of(e.head)];
  return d;
}

std::vector<int> MDM::out_degrees() const {
  std::vector<int> d(vertices_.size(), 0);
  for (const auto& e : edges_) ++d[index_of(e.tail)];
  return d;
}

void MDM::add_vertex(VertexId v) {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  if (it == vertices_.end() || *it != v) vertices_.insert(it, v);
}

void MDM::add_edge(VertexId tail, VertexId head, double length) {
  if (!has_vertex(tail) || !has_vertex(head)) throw Error(ErrorKind::invalid_argument, "edge endpoint not a vertex");
  if (!(length >= 0)) throw Error(ErrorKind::invalid_argument, "negative edge length");
  edges_.push_back({next_edge_id_++, tail, head, length});
}

void MDM::remove_vertex_and_edges(VertexId v) {
  std::erase_if(edges_, [v](const MdmEdge& e) { return e.tail == v || e.head == v; });
  std::erase(vertices_, v);
}

SccPartition strongly_connected_components(std::size_t n,
                                           const std::vector<std::pair<std::int32_t, std::int32_t>>& arcs) {
  std::vector<std::size_t> off(n + 1, 0);
  for (auto [t, h] : arcs) ++off[t + 1];
  for (std::size_t v = 0; v < n; ++v) off[v + 1] += off[v];
  std::vector<std::int32_t> adj(arcs.size());
  {
    std::vector<std::size_t> pos(off.begin(), off.end() - 1);
    for (auto [t, h] : arcs) adj[pos[t]++] = h;
  }

  SccPartition out;
  out.component.assign(n, -1);
  std::vector<std::int32_t> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::pair<std::int32_t, std::size_t>> call;  // (vertex, next arc offset)
  std::int32_t counter = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    call.emplace_back(static_cast<std::int32_t>(s), off[s]);
    index[s] = low[s] = counter++;
    stack.push_back(static_cast<std::int32_t>(s));
    on_stack[s] = 1;
    while (!call.empty()) {
      auto& [v, it] = call.back();
      if (it < off[v + 1]) {
        const std::int32_t w = adj[it++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, off[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::int32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::int32_t> comp;
        std::int32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.component[w] = static_cast<std::int32_t>(out.members.size());
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.members.push_back(std::move(comp));
      }
    }
  }
  return out;
}

SccPartition strongly_connected_components(const Digraph& g) {
  std::vector<std::pair<std::int32_t, std::int32_t>> arcs;
  arcs.reserve(g.m());
  for (const auto& e : g.edges()) arcs.emplace_back(e.tail, e.head);
  return strongly_connected_components(g.n(), arcs);
}

std::vector<MDM> strongly_connected_components(const MDM& m) {
  std::vector<std::pair<std::int32_t, std::int32_t>> arcs;
  arcs.reserve(m.edge_count());
  for (const auto& e : m.edges())
    arcs.emplace_back(static_cast<std::int32_t>(m.index_of(e.tail)), static_cast<std::int32_t>(m.index_of(e.head)));
  const auto part = strongly_connected_components(m.vertex_count(), arcs);
  std::vector<std::vector<VertexId>> vs(part.members.size());
  std::vector<std::vector<MdmEdge>> es(part.members.size());
  for (std::size_t c = 0; c < part.members.size(); ++c)
    for (auto i : part.members[c]) vs[c].push_back(m.vertices()[i]);
  for (std::size_t k = 0; k < m.edge_count(); ++k) {
    const auto [t, h] = arcs[k];
    if (part.component[t] == part.component[h]) es[part.component[t]].push_back(m.edges()[k]);
  }
  std::vector<MDM> out;
  out.reserve(vs.size());
  for (std::size_t c = 0; c < vs.size(); ++c) out.emplace_back(std::move(vs[c]), std::move(es[c]));
  return out;
}

bool is_smoothable(const MDM& m, VertexId w) {
  int in = 0, out = 0;
  bool loop = false;
  for (const auto& e : m.edges()) {
    if (e.head == w) ++in;
    if (e.tail == w) ++out;
    if (e.tail == w && e.head == w) loop = true;
  }
  return in == 1 && out == 1 && !loop;
}

MDM smooth_vertex(const MDM& m, VertexId w) {
  if (!m.has_vertex(w) || !is_smoothable(m, w))
    throw Error(ErrorKind::precondition, "smoothing needs in-degree = out-degree = 1 and no self-loop");
  MDM r = m;
  auto a = std::find_if(r.edges_.begin(), r.edges_.end(), [w](const MdmEdge& e) { return e.head == w; });
  auto b = std::find_if(r.edges_.begin(), r.edges_.end(), [w](const MdmEdge& e) { return e.tail == w; });
  const MdmEdge merged{r.next_edge_id_++, a->tail, b->head, a->length + b->length};
  r.remove_vertex_and_edges(w);
  r.edges_.push_back(merged);
  return r;
}

MDM kernel(const MDM& m) {
  const std::size_t n = m.vertex_count();
  std::vector<MdmEdge> edges = m.edges();
  std::vector<char> alive(edges.size(), 1);
  std::vector<std::vector<std::size_t>> in(n), out(n);
  std::vector<std::size_t> tail_idx(edges.size()), head_idx(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    tail_idx[k] = m.index_of(edges[k].tail);
    head_idx[k] = m.index_of(edges[k].head);
    out[tail_idx[k]].push_back(k);
    in[head_idx[k]].push_back(k);
  }
  std::int64_t next_id = 0;
  for (const auto& e : edges) next_id = std::max(next_id, e.id + 1);
  std::vector<char> removed(n, 0);

  // Smoothing never changes the degrees of other vertices, so one pass in vertex
  // order reaches the fixed point; a vertex only loses eligibility by acquiring a loop.
  for (std::size_t w = 0; w < n; ++w) {
    if (in[w].size() != 1 || out[w].size() != 1) continue;
    const std::size_t a = in[w][0], b = out[w][0];
    if (a == b) continue;
    const std::size_t u = tail_idx[a], v = head_idx[b];
    const std::size_t c = edges.size();
    edges.push_back({next_id++, edges[a].tail, edges[b].head, edges[a].length + edges[b].length});
    alive.push_back(1);
    tail_idx.push_back(u);
    head_idx.push_back(v);
    alive[a] = alive[b] = 0;
    std::replace(out[u].begin(), out[u].end(), a, c);
    std::replace(in[v].begin(), in[v].end(), b, c);
    in[w].clear();
    out[w].clear();
    removed[w] = 1;
  }

  std::vector<VertexId> vs;
  std::vector<MdmEdge> es;
  for (std::size_t i = 0; i < n; ++i)
    if (!removed[i]) vs.push_back(m.vertices()[i]);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (alive[k]) es.push_back(edges[k]);
  for (std::size_t i = 0; i < n; ++i)
    if (!removed[i] && in[i].empty() && out[i].empty()) es.push_back({next_id++, m.vertices()[i], m.vertices()[i], 0.0});
  return MDM(std::move(vs), std::move(es));
}

MDM kernel(const Digraph& g) { return kernel(MDM::from_digraph(g)); }

bool is_three_regular(const MDM& m) {
  if (m.vertex_count() == 0) return false;
  const auto in = m.in_degrees(), out = m.out_degrees();
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i] + out[i] != 3) return false;
  return true;
}

bool is_loop(const MDM& m) {
  return m.vertex_count() == 1 && m.edge_count() == 1 && m.edges()[0].tail == m.edges()[0].head;
}

std::vector<MDM> rank_and_pad(std::vector<RankedScc> sccs, std::size_t prefix, RankKey key) {
  std::stable_sort(sccs.begin(), sccs.end(), [key](const RankedScc& a, const RankedScc& b) {
    if (key == RankKey::size ? a.size != b.size : a.length != b.length)
      return key == RankKey::size ? a.size > b.size : a.length > b.length;
    return a.first_index < b.first_index;
  });
  std::vector<MDM> out;
  for (std::size_t i = 0; i < prefix; ++i) out.push_back(i < sccs.size() ? sccs[i].kernel : MDM::loop_unit());
  return out;
}

}  // namespace dcm
