#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcm/degree_law.hpp"
#include "dcm/graph.hpp"

namespace dcm {

enum class GraphModel { configuration, configuration_simple, erdos_renyi, staged };

// "c*n^(a/b)", "c*n^x" or a bare constant.
struct HorizonRule {
  double c = 5.0;
  double exponent = 2.0 / 3.0;
  static HorizonRule parse(const std::string& text);
  std::int64_t operator()(std::size_t n) const;
  std::string str() const;
};

enum class DiameterSources { uniform, largest_trees };

struct ExperimentConfig {
  nlohmann::json law_spec;
  GraphModel model = GraphModel::configuration;
  double er_mean_degree = 1.0;  // p = er_mean_degree / n
  std::vector<std::size_t> n_list;
  std::size_t runs_per_n = 1;
  HorizonRule horizon;
  double continuum_T = 10.0;
  double continuum_dt = 1e-4;
  std::uint64_t seed = 0;
  std::size_t top_k = 3;  // SCCs per run that get kernel codes
  bool check_containment = false;
  std::size_t diameter_sources = 0;  // 0 disables the diameter estimate
  DiameterSources diameter_rule = DiameterSources::largest_trees;
  std::uint64_t degree_attempts = 100'000'000;
  std::string output_prefix;

  JointDegreeLaw law() const { return JointDegreeLaw::from_json(law_spec); }
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

enum class KernelShape { loop, cubic, other };
std::string to_string(KernelShape s);

struct RunRecord {
  std::size_t n = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<double> scc_lengths;         // nonincreasing
  std::vector<std::size_t> scc_sizes;      // nonincreasing
  std::vector<std::string> kernel_codes;   // first top_k SCCs in length order
  std::vector<KernelShape> kernel_shapes;  // aligned with kernel_codes
  std::size_t truncated_components = 0;
  std::optional<std::size_t> diameter_lb;
  std::optional<bool> containment_ok;
  std::uint64_t degree_attempts = 0;
  double wall_time = 0;

  double largest_length() const { return scc_lengths.empty() ? 0.0 : scc_lengths.front(); }
  // Equality of everything except wall time.
  bool same_result(const RunRecord& o) const;
  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

// Per-run seed: derive_seed(cfg.seed, {n, run}).
std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t n, std::size_t run);
RunRecord run_single(const ExperimentConfig& cfg, const JointDegreeLaw& law, std::size_t n, std::size_t run);

enum class Execution { serial, parallel };
// Records in (n, run) order regardless of completion order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, Execution exec = Execution::parallel);

// Max BFS eccentricity over the given sources.
std::size_t eccentricity_bound(const Digraph& g, const std::vector<Vertex>& sources);
// `sources` vertices drawn uniformly without replacement (all of them when sources >= n).
std::size_t diameter_lower_bound(const Digraph& g, std::size_t sources, std::uint64_t seed);
// Roots of the `sources` largest trees of an edge-DFS forest.
std::vector<Vertex> largest_tree_roots(const Digraph& g, std::size_t sources, std::uint64_t seed);

void write_records_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_records_jsonl(std::ostream& os, const std::vector<RunRecord>& records);
// Columns n,seed,rank,length_scaled,size_scaled with scaled = raw / n^(1/3).
void write_plot_csv(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_jsonl(std::istream& is);

struct CsvRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t rank = 0;
  double length = 0;
  std::size_t size = 0;
  std::string kernel_code;
  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};
std::vector<CsvRow> read_records_csv(std::istream& is);

enum class ReportFormat { csv, jsonl, all };
// Writes <prefix>.csv, <prefix>.jsonl and <prefix>_plot.csv.
void emit_report(const std::vector<RunRecord>& records, const std::string& prefix, ReportFormat format = ReportFormat::all);

}  // namespace dcm
