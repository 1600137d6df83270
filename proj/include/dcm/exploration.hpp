#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dcm/graph.hpp"

namespace dcm {

using NodeId = std::int64_t;
inline constexpr NodeId no_node = -1;

enum class Color : std::uint8_t { black, purple };

struct ForestNode {
  NodeId parent = no_node;  // no_node for roots
  Color color = Color::black;
  Vertex vertex = -1;       // -1 for purple leaves of sampled forests
  int out_degree = 0;
  int in_degree = 0;
};

// Plane forest in depth-first order. Node i is created at step i+1; step-indexed
// sequences have length size()+1 with entry 0 the initial value.
struct OutForest {
  std::vector<ForestNode> nodes;
  std::vector<std::int64_t> lukasiewicz;   // S+(k)
  std::vector<std::int64_t> unpaired_in;   // S-(k): unpaired in-half-edges of discovered vertices
  std::vector<std::int64_t> purple_count;  // P(k)
  std::vector<std::int64_t> running_min;   // I(k) = min_{j<=k} S+(j), with S+(0) = 0
  std::vector<std::int64_t> height;        // per node
  std::vector<std::int64_t> length_height; // per node

  std::size_t size() const { return nodes.size(); }
  // Weight a vertex contributes to the length height of its descendants.
  std::int64_t weight(NodeId v) const {
    const auto& x = nodes[v];
    return x.in_degree - 1 + (x.parent == no_node ? 1 : 0);
  }
  bool is_root(NodeId v) const { return nodes[v].parent == no_node; }
  // Subtree sizes and root of each node (derived from parent pointers).
  std::vector<std::int64_t> subtree_sizes() const;
  std::vector<NodeId> tree_roots() const;  // root of each node
  // Recomputes the step-indexed processes from nodes (out-degrees and colors).
  void rebuild_processes();
};

struct HeightProcesses {
  std::vector<std::int64_t> height;
  std::vector<std::int64_t> length_height;
};
HeightProcesses height_processes(const OutForest& f);

enum class StepKind : std::uint8_t { new_root, edge_pop };
enum class Outcome : std::uint8_t { discovered, purple };

struct TraceStep {
  std::int64_t k = 0;
  StepKind kind = StepKind::edge_pop;
  Vertex focus_vertex = -1;
  Outcome outcome = Outcome::discovered;
  std::int64_t s_minus = 0;
  std::int64_t s_plus = 0;
  std::int64_t edge = -1;  // popped edge id, -1 for new-root steps
};

struct ExplorationTrace {
  std::vector<TraceStep> steps;
  std::vector<Vertex> discovery_order;
  std::vector<NodeId> vertex_node;  // node of each discovered vertex, no_node otherwise
  std::vector<NodeId> edge_node;    // node created by each explored edge, no_node if never explored
};

enum class SurplusKind : std::uint8_t { ancestral, non_ancestral };

struct SurplusEdge {
  std::int64_t step = 0;  // step of the purple leaf
  NodeId purple = no_node;
  Vertex tail = -1;
  Vertex head = -1;
  NodeId head_node = no_node;
  std::int64_t edge = -1;
  SurplusKind kind = SurplusKind::non_ancestral;
  bool is_candidate = false;
};

struct Exploration {
  ExplorationTrace trace;
  OutForest forest;
  std::vector<SurplusEdge> surplus;
};

// Edge DFS. Once every positive in-degree vertex is discovered the remaining stack
// is drained; each of those pops yields a purple leaf.
Exploration run_edfs(const Digraph& g, std::uint64_t seed);

// Sets `kind` for each surplus edge.
void classify_surplus(const OutForest& forest, std::vector<SurplusEdge>& surplus);
// Candidate flags (fixed point of the definition, heads restricted to the tail's tree).
std::vector<bool> find_candidates_exact(const OutForest& forest, const std::vector<SurplusEdge>& surplus);
bool sccs_consistency(const Digraph& g, const Exploration& x, const std::vector<bool>& candidates);
// Every SCC lies inside one tree of the out-forest.
bool sccs_within_trees(const Digraph& g, const Exploration& x);
// Per-step Lukasiewicz identity and S- recomputation from degrees.
bool trace_identities_hold(const Exploration& x);

void write_trace_csv(std::ostream& os, const Exploration& x);

}  // namespace dcm
