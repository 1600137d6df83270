#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dcm/continuum.hpp"
#include "dcm/degree_law.hpp"
#include "dcm/exploration.hpp"
#include "dcm/graph_sampler.hpp"
#include "dcm/harness.hpp"
#include "dcm/limit_theorems.hpp"
#include "dcm/mdm.hpp"
#include "dcm/mdm_metric.hpp"
#include "dcm/staged_sampler.hpp"
#include "dcm/stats.hpp"

using namespace dcm;
using nlohmann::json;

namespace {

// Inline JSON when the text starts with '{', otherwise a file path.
json load_json(const std::string& text) {
  if (!text.empty() && text.front() == '{') return json::parse(text);
  std::ifstream in(text);
  if (!in) throw Error(ErrorKind::io, "cannot open " + text);
  return json::parse(in);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot write " + path);
  return os;
}

// "1:0,2:1" -> {(1,0), (2,1)}
std::vector<DegreePair> parse_prefix(const std::string& text) {
  std::vector<DegreePair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::invalid_argument, "prefix entries are in:out");
    out.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
  }
  return out;
}

std::vector<RunRecord> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  return read_records_jsonl(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical directed configuration model laboratory"};
  app.footer(
      "Seeds: every random stream is derived from one 64-bit base seed by a splitmix64 chain\n"
      "derive_seed(base, {i, j, ...}); experiment run (n, r) uses derive_seed(seed, {n, r}) and\n"
      "its stages use sub-seeds {0} degrees, {1} pairing, {2} exploration, {3} diameter sources.");
  app.require_subcommand(1);

  std::string law_text = R"({"kind":"poisson_product","lambda_minus":1,"lambda_plus":1})";
  std::uint64_t seed = 1;
  std::size_t n = 1000;
  std::string out_path;

  auto* params = app.add_subcommand("params", "criticality parameters and limit coefficients of a law");
  params->add_option("--law", law_text, "law JSON or path");

  auto* sample = app.add_subcommand("sample-graph", "conditioned degrees + uniform pairing; graph file to stdout or --out");
  bool simple = false;
  sample->add_option("--law", law_text);
  sample->add_option("--n", n)->required();
  sample->add_option("--seed", seed);
  sample->add_flag("--simple", simple, "reject until the multigraph is simple");
  sample->add_option("--out", out_path);

  auto* explore = app.add_subcommand("explore", "edge DFS on a graph file; summary JSON, optional trace CSV");
  std::string graph_path, trace_path;
  explore->add_option("--graph", graph_path)->required();
  explore->add_option("--seed", seed);
  explore->add_option("--trace", trace_path, "write the step trace CSV here");

  auto* staged = app.add_subcommand("staged", "staged sampler; one JSON line per marked component");
  std::string horizon_text = "5*n^(2/3)", mode_text = "exact";
  staged->add_option("--law", law_text);
  staged->add_option("--n", n)->required();
  staged->add_option("--horizon", horizon_text, "rule c*n^(a/b) or a constant; exact mode ignores it unless given");
  staged->add_option("--mode", mode_text)->check(CLI::IsMember({"exact", "iidz"}));
  staged->add_option("--seed", seed);

  auto* cont = app.add_subcommand("continuum", "limit object sampler; one JSON line per run");
  double mu = 1, sigma_plus = 1, sp_nu = 1, T = 10, dt = 1e-4;
  std::size_t prefix_k = 3, runs = 1;
  bool hazard = false;
  cont->add_option("--mu", mu);
  cont->add_option("--sigma-plus", sigma_plus);
  cont->add_option("--sp-nu", sp_nu, "sigma_-+ + nu_-");
  cont->add_option("--T", T);
  cont->add_option("--dt", dt);
  cont->add_option("--seed", seed);
  cont->add_option("--prefix", prefix_k, "kernels reported per run");
  cont->add_option("--runs", runs);
  cont->add_flag("--integrated-hazard", hazard, "thin by integrated hazard instead of per-cell Bernoulli");

  auto* llt = app.add_subcommand("llt-check", "exact P(Delta_n = 0) against the local limit prediction; CSV");
  std::vector<std::size_t> n_list{100, 200, 400};
  llt->add_option("--law", law_text);
  llt->add_option("--n-list", n_list)->delimiter(',');

  auto* mc = app.add_subcommand("measure-change", "phi^n_m for a discovery prefix, exact and Monte Carlo, with gamma");
  std::string prefix_text;
  std::uint64_t budget = 10000;
  mc->add_option("--law", law_text);
  mc->add_option("--n", n)->required();
  mc->add_option("--prefix", prefix_text, "in:out,in:out,...")->required();
  mc->add_option("--budget", budget);
  mc->add_option("--seed", seed);

  auto* exp = app.add_subcommand("experiment", "run a JSON experiment config and write reports");
  std::string config_path;
  bool serial = false;
  exp->add_option("--config", config_path)->required();
  exp->add_option("--out", out_path, "report prefix (overrides output_prefix)");
  exp->add_flag("--serial", serial);

  auto* cmp = app.add_subcommand("compare", "KS distance of rescaled largest lengths between two JSONL reports");
  std::string a_path, b_path;
  std::size_t cmp_n = 0;
  cmp->add_option("a", a_path)->required();
  cmp->add_option("b", b_path)->required();
  cmp->add_option("--n", cmp_n, "restrict to this n (default: all)");

  auto* mdm = app.add_subcommand("mdm", "metric directed multigraph utilities");
  mdm->require_subcommand(1);
  auto* dist = mdm->add_subcommand("dist", "d_G between two MDM JSON files; prints the value or inf");
  dist->add_option("a", a_path)->required();
  dist->add_option("b", b_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*params) {
      auto law = JointDegreeLaw::from_json(load_json(law_text));
      auto lat = difference_lattice(law);
      json j = compute_params(law).to_json();
      j["critical"] = check_criticality(law, 1e-9);
      j["period"] = lat.period;
      j["strongly_aperiodic"] = lat.strongly_aperiodic;
      std::cout << j.dump(2) << '\n';
    } else if (*sample) {
      auto law = JointDegreeLaw::from_json(load_json(law_text));
      Digraph g;
      if (simple) {
        g = sample_simple(law, n, seed, 1'000'000, 100'000'000).graph;
      } else {
        auto cd = sample_conditioned_degrees(law, n, derive_seed(seed, {0}), 100'000'000);
        g = pair_configuration(cd.degrees, derive_seed(seed, {1}));
      }
      if (out_path.empty()) {
        write_graph(std::cout, g);
      } else {
        auto os = open_out(out_path);
        write_graph(os, g);
      }
    } else if (*explore) {
      std::ifstream in(graph_path);
      if (!in) throw Error(ErrorKind::io, "cannot open " + graph_path);
      auto g = read_graph(in);
      auto x = run_edfs(g, seed);
      std::size_t candidates = 0, ancestral = 0, trees = 0;
      for (std::size_t v = 0; v < x.forest.size(); ++v) trees += x.forest.is_root(static_cast<NodeId>(v));
      for (const auto& s : x.surplus) {
        candidates += s.is_candidate;
        ancestral += s.kind == SurplusKind::ancestral;
      }
      if (!trace_path.empty()) {
        auto os = open_out(trace_path);
        write_trace_csv(os, x);
      }
      json j{{"n", g.n()},
             {"m", g.m()},
             {"discovered", x.trace.discovery_order.size()},
             {"surplus", x.surplus.size()},
             {"ancestral", ancestral},
             {"candidates", candidates},
             {"trees", trees},
             {"trace_identities", trace_identities_hold(x)},
             {"sccs_within_trees", sccs_within_trees(g, x)}};
      std::cout << j.dump() << '\n';
    } else if (*staged) {
      auto law = JointDegreeLaw::from_json(load_json(law_text));
      StagedOptions opt;
      opt.mode = mode_text == "exact" ? StreamMode::exact_reorder : StreamMode::iid_z;
      opt.horizon = (opt.mode == StreamMode::iid_z || staged->count("--horizon")) ? HorizonRule::parse(horizon_text)(n) : -1;
      auto run = run_staged(law, n, opt, seed);
      for (const auto& c : run.components) std::cout << component_record(c).dump() << '\n';
    } else if (*cont) {
      auto p = CriticalParams::from_base(mu, sp_nu, 0.0, sigma_plus, 0.0);
      LimitOptions opt{hazard ? Thinning::integrated_hazard : Thinning::bernoulli, 0};
      for (std::size_t r = 0; r < runs; ++r) {
        auto s = sample_limit_sequence(p, T, dt, derive_seed(seed, {r}), prefix_k, opt);
        json kernels = json::array();
        for (const auto& k : s.sequence) kernels.push_back(k.to_json());
        std::cout << json{{"run", r},
                          {"lengths", s.lengths},
                          {"components", s.components},
                          {"truncated", s.truncated},
                          {"kernels", kernels}}
                         .dump()
                  << '\n';
      }
    } else if (*llt) {
      auto law = JointDegreeLaw::from_json(load_json(law_text));
      auto lat = difference_lattice(law);
      const double var = law.moment(2, 0) - 2 * law.moment(1, 1) + law.moment(0, 2) -
                         std::pow(law.moment(1, 0) - law.moment(0, 1), 2);
      std::cout << "n,exact,predicted,relative_error\n";
      for (auto m : n_list) {
        const double exact = static_cast<double>(exact_sum_pmf(law, m).at(0));
        const double pred = llt_prediction(m, lat.period, var, 0.0);
        std::cout << m << ',' << exact << ',' << pred << ',' << std::abs(exact / pred - 1) << '\n';
      }
    } else if (*mc) {
      auto law = JointDegreeLaw::from_json(load_json(law_text));
      auto prefix = parse_prefix(prefix_text);
      json j{{"n", n}, {"m", prefix.size()}};
      auto est = phi_nm_estimate(law, prefix, n, budget, seed);
      j["estimate"] = est.value;
      j["std_error"] = est.mc_std_error.value_or(0.0);
      try {
        j["exact"] = phi_nm_exact(law, prefix, n).value;
      } catch (const Error& e) {
        j["exact"] = nullptr;
        j["exact_error"] = e.what();
      }
      const bool admissible = gamma_admissible(law, prefix);
      j["admissible"] = admissible;
      j["gamma"] = admissible ? json(gamma_lower_bound(law, prefix, n)) : json(nullptr);
      std::cout << j.dump(2) << '\n';
    } else if (*exp) {
      auto cfg = ExperimentConfig::from_json(load_json(config_path));
      if (!out_path.empty()) cfg.output_prefix = out_path;
      if (cfg.output_prefix.empty()) throw Error(ErrorKind::invalid_argument, "no output prefix (config output_prefix or --out)");
      auto recs = run_experiment(cfg, serial ? Execution::serial : Execution::parallel);
      emit_report(recs, cfg.output_prefix);
      std::cerr << recs.size() << " runs written to " << cfg.output_prefix << ".{csv,jsonl}, " << cfg.output_prefix
                << "_plot.csv\n";
    } else if (*cmp) {
      auto pick = [&](const std::vector<RunRecord>& rs) {
        std::vector<double> v;
        for (const auto& r : rs)
          if (cmp_n == 0 || r.n == cmp_n) v.push_back(r.largest_length() / std::cbrt(static_cast<double>(r.n)));
        return v;
      };
      auto a = pick(read_jsonl_file(a_path)), b = pick(read_jsonl_file(b_path));
      std::cout << json{{"runs_a", a.size()},
                        {"runs_b", b.size()},
                        {"median_a", median(a)},
                        {"median_b", median(b)},
                        {"ks", ks_statistic(a, b)}}
                       .dump()
                << '\n';
    } else if (*dist) {
      auto a = MDM::from_json(load_json(a_path)), b = MDM::from_json(load_json(b_path));
      std::cout << dg_distance(a, b).str() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
