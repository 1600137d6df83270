#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcm/graph.hpp"

namespace dcm {

using VertexId = std::int64_t;

struct MdmEdge {
  std::int64_t id = 0;
  VertexId tail = 0;
  VertexId head = 0;
  double length = 0.0;
};

// Metric directed multigraph: vertex ids are arbitrary integers, lengths >= 0.
class MDM {
 public:
  MDM() = default;
  MDM(std::vector<VertexId> vertices, std::vector<MdmEdge> edges);

  // Single vertex 0 carrying a self-loop of length 0.
  static MDM loop_unit();
  static MDM from_digraph(const Digraph& g);
  static MDM from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::vector<VertexId>& vertices() const { return vertices_; }
  const std::vector<MdmEdge>& edges() const { return edges_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  double total_length() const;
  bool is_loop_unit() const;
  bool has_vertex(VertexId v) const;
  std::size_t index_of(VertexId v) const;  // position in vertices()

  std::vector<int> in_degrees() const;   // aligned with vertices()
  std::vector<int> out_degrees() const;  // aligned with vertices()

  void add_vertex(VertexId v);
  void add_edge(VertexId tail, VertexId head, double length);
  void remove_vertex_and_edges(VertexId v);

 private:
  std::vector<VertexId> vertices_;  // sorted
  std::vector<MdmEdge> edges_;
  std::int64_t next_edge_id_ = 0;
  friend MDM smooth_vertex(const MDM&, VertexId);
};

// Partition of 0..n-1 into SCCs, iterative Tarjan. `component[v]` is the index of v's
// SCC in `members`; SCCs are listed in order of discovery completion.
struct SccPartition {
  std::vector<std::int32_t> component;
  std::vector<std::vector<std::int32_t>> members;
};
SccPartition strongly_connected_components(std::size_t n, const std::vector<std::pair<std::int32_t, std::int32_t>>& arcs);
SccPartition strongly_connected_components(const Digraph& g);

// SCCs of an MDM, each returned with its induced edges.
std::vector<MDM> strongly_connected_components(const MDM& m);

MDM smooth_vertex(const MDM& m, VertexId w);
bool is_smoothable(const MDM& m, VertexId w);

// Smoothing to exhaustion; isolated vertices receive a zero-length self-loop.
MDM kernel(const MDM& m);
MDM kernel(const Digraph& g);
bool is_three_regular(const MDM& m);  // every vertex has in + out = 3
bool is_loop(const MDM& m);           // one vertex, one self-loop

struct RankedScc {
  MDM kernel;
  std::size_t size = 0;          // vertex count before smoothing
  double length = 0.0;           // total length
  std::size_t first_index = 0;   // smallest discovery index among its vertices
};
enum class RankKey { size, length };
// Sorted descending by key, ties by first_index; padded with loop units to `prefix`.
std::vector<MDM> rank_and_pad(std::vector<RankedScc> sccs, std::size_t prefix, RankKey key = RankKey::size);

}  // namespace dcm
