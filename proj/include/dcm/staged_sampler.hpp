#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcm/exploration.hpp"
#include "dcm/mdm.hpp"

namespace dcm {

enum class StreamMode { exact_reorder, iid_z };

// Degrees in discovery order. Exact mode emits the positive in-degree vertices of a
// concrete sequence by successive sampling proportional to d-; iid mode draws from Z.
class DiscoveryStream {
 public:
  static DiscoveryStream exact(const DegreeSequence& seq, std::uint64_t seed);
  static DiscoveryStream iid(const JointDegreeLaw& law, std::uint64_t seed);

  std::optional<DegreePair> next();
  StreamMode mode() const { return mode_; }
  std::int64_t remaining_in_total() const { return remaining_in_; }
  std::size_t emitted() const { return pos_; }

 private:
  StreamMode mode_ = StreamMode::exact_reorder;
  std::vector<DegreePair> order_;
  std::size_t pos_ = 0;
  std::int64_t remaining_in_ = 0;
  std::optional<JointDegreeLaw> z_;
  Rng rng_;
};

// q = unpaired / (total_in - k - I(k) + 1) for a pop following step k (not a root step).
double purple_probability(std::int64_t unpaired_in, std::int64_t total_in, std::int64_t k, std::int64_t running_min);
// a_k for a purple step: length height over unpaired in-half-edges before the step.
double ancestral_probability(std::int64_t length_height, std::int64_t unpaired_in_before);
// (l(T^mk_k) - m) / unpaired in-half-edges before the step.
double candidate_probability(std::int64_t marked_length, std::int64_t m, std::int64_t unpaired_in_before);

// Grows the forest until `horizon` steps or until the stream is exhausted with an empty stack.
// Black nodes carry vertex = emission index.
OutForest sample_out_forest(DiscoveryStream& stream, std::int64_t total_in, std::int64_t horizon, std::uint64_t seed);

struct AncestralMarks {
  std::vector<std::int64_t> a_process;   // A(k), k = 0..K
  std::vector<std::int64_t> mark_times;  // steps
};
AncestralMarks sample_ancestral_marks(const OutForest& forest, std::uint64_t seed);

struct Excursion {
  std::int64_t l = 0;      // last step before the component; its nodes are steps l+1..l+sigma
  std::int64_t sigma = 0;
  bool truncated = false;  // first passage not reached before the path end
  friend bool operator==(const Excursion&, const Excursion&) = default;
};
std::vector<Excursion> extract_marked_excursions(const std::vector<std::int64_t>& lukasiewicz,
                                                 const std::vector<std::int64_t>& marks);

struct HeadSlot {
  NodeId node = no_node;
  int slot = 0;  // label among the node's free in-slots, assigned in order of use
};

struct MarkedComponent {
  Excursion excursion;
  std::vector<std::int64_t> tails;              // steps V_1 < V_2 < ...
  std::vector<HeadSlot> heads;
  std::vector<std::int64_t> marked_tree_length; // l(T^mk_k) for k = V_1..l+sigma
  MDM assembled;
  std::vector<MDM> sccs;                        // kernels, decreasing length
};

struct CandidateScan {
  std::vector<std::int64_t> tails;
  std::vector<std::int64_t> marked_tree_length;
};
CandidateScan sample_component_candidates(const OutForest& forest, const Excursion& c, std::int64_t first_tail,
                                          std::uint64_t seed);
std::vector<HeadSlot> sample_candidate_heads(const OutForest& forest, const std::vector<std::int64_t>& tails,
                                             std::uint64_t seed);
// Tree edges carry graph distance (unit per forest edge, including the edge to each purple
// leaf); each purple leaf V_i gets a length-0 edge to its head W_i. SCC lengths of the result
// equal edge counts of the corresponding graph SCCs.
MDM assemble_marked_mdm(const OutForest& forest, const std::vector<NodeId>& tails, const std::vector<NodeId>& heads);
std::vector<MDM> extract_sccs_from_marked(const MDM& m);

struct RedTreeCheck {
  bool identity_holds = false;
  std::vector<std::int64_t> lukasiewicz;  // augmented forest
  std::vector<std::int64_t> theta;        // node i of the original sits at position theta[i]
  std::vector<NodeId> parents;            // augmented forest parents
  std::uint64_t resampled = 0;
};
RedTreeCheck augment_with_red_trees(const OutForest& forest, const JointDegreeLaw& law, std::uint64_t seed,
                                    std::size_t red_cap = 1'000'000);

struct StagedRun {
  OutForest forest;
  AncestralMarks marks;
  std::vector<MarkedComponent> components;
};

struct StagedOptions {
  StreamMode mode = StreamMode::exact_reorder;
  std::int64_t horizon = -1;  // < 0: unbounded (exact mode)
};

// Full staged pipeline from a stream.
StagedRun run_staged(DiscoveryStream& stream, std::int64_t total_in, const StagedOptions& opt, std::uint64_t seed);
// Convenience: conditioned degrees (exact) or i.i.d. Z stream with total_in = floor(mu n).
StagedRun run_staged(const JointDegreeLaw& law, std::size_t n, const StagedOptions& opt, std::uint64_t seed);

nlohmann::json component_record(const MarkedComponent& c);

// Outcome code used to compare the staged and graph pipelines: node sequence with colors
// and degrees, candidate purple steps, and candidate head nodes.
std::string pipeline_outcome_code(const OutForest& forest, const std::vector<NodeId>& candidate_tails,
                                  const std::vector<NodeId>& candidate_heads);

}  // namespace dcm
