#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dcm/degree_law.hpp"

namespace dcm {

using Vertex = std::int32_t;

struct DegreeSequence {
  std::size_t n = 0;
  std::vector<int> d_minus;
  std::vector<int> d_plus;
  std::int64_t total = 0;

  DegreePair at(std::size_t v) const { return {d_minus[v], d_plus[v]}; }
  static DegreeSequence from_pairs(const std::vector<DegreePair>& pairs);
};

struct Edge {
  Vertex tail = 0;
  Vertex head = 0;
  int out_slot = 0;  // index among the tail's out-half-edges
  int in_slot = 0;   // index among the head's in-half-edges
};

// Directed multigraph. Edges of a given tail are contiguous and ordered by out_slot
// when produced by the samplers; `finalize` builds the out-adjacency offsets.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t n) : n_(n) {}
  // Edge list without slot labels; slots are assigned in list order.
  static Digraph from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges);

  std::size_t n() const { return n_; }
  std::size_t m() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t id) const { return edges_[id]; }

  std::vector<int> in_degrees() const;
  std::vector<int> out_degrees() const;

  // CSR view: out_edge_ids(v) are edge ids with tail v.
  const std::vector<std::size_t>& out_offsets() const { return offsets_; }
  const std::vector<std::size_t>& out_ids() const { return out_ids_; }

  void add_edge(const Edge& e) { edges_.push_back(e); }
  void finalize();

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> out_ids_;
};

void write_graph(std::ostream& os, const Digraph& g);
Digraph read_graph(std::istream& is);

}  // namespace dcm
