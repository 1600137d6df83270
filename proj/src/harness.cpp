#include "dcm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <queue>
#include <regex>
#include <set>
#include <sstream>

#include "dcm/common.hpp"
#include "dcm/exploration.hpp"
#include "dcm/graph_sampler.hpp"
#include "dcm/mdm.hpp"
#include "dcm/mdm_metric.hpp"
#include "dcm/staged_sampler.hpp"

namespace dcm {

HorizonRule HorizonRule::parse(const std::string& text) {
  static const std::regex power(
      R"(^\s*([0-9.eE+-]+)\s*\*\s*n\s*\^\s*\(?\s*([0-9.]+)\s*(?:/\s*([0-9.]+))?\s*\)?\s*$)");
  static const std::regex constant(R"(^\s*([0-9.eE+-]+)\s*$)");
  std::smatch m;
  HorizonRule r;
  try {
    if (std::regex_match(text, m, power)) {
      r.c = std::stod(m[1].str());
      r.exponent = std::stod(m[2].str());
      if (m[3].matched) r.exponent /= std::stod(m[3].str());
    } else if (std::regex_match(text, m, constant)) {
      r.c = std::stod(m[1].str());
      r.exponent = 0;
    } else {
      throw Error(ErrorKind::invalid_argument, "cannot parse horizon rule: " + text);
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::invalid_argument, "cannot parse horizon rule: " + text);
  }
  if (!(r.c > 0) || !(r.exponent >= 0) || !std::isfinite(r.exponent))
    throw Error(ErrorKind::invalid_argument, "horizon rule must be c*n^a with c > 0, a >= 0");
  return r;
}

std::int64_t HorizonRule::operator()(std::size_t n) const {
  return static_cast<std::int64_t>(std::ceil(c * std::pow(static_cast<double>(n), exponent)));
}

std::string HorizonRule::str() const {
  std::ostringstream os;
  os << std::setprecision(17) << c << "*n^" << exponent;
  return os.str();
}

namespace {

const char* model_name(GraphModel m) {
  switch (m) {
    case GraphModel::configuration: return "configuration";
    case GraphModel::configuration_simple: return "configuration_simple";
    case GraphModel::erdos_renyi: return "erdos_renyi";
    case GraphModel::staged: return "staged";
  }
  return "?";
}

GraphModel parse_model(const std::string& s) {
  for (auto m : {GraphModel::configuration, GraphModel::configuration_simple, GraphModel::erdos_renyi,
                 GraphModel::staged})
    if (s == model_name(m)) return m;
  throw Error(ErrorKind::invalid_argument, "unknown model: " + s);
}

KernelShape parse_shape(const std::string& s) {
  for (auto k : {KernelShape::loop, KernelShape::cubic, KernelShape::other})
    if (s == to_string(k)) return k;
  throw Error(ErrorKind::io, "unknown kernel shape: " + s);
}

KernelShape shape_of(const MDM& k) {
  if (is_loop(k)) return KernelShape::loop;
  if (is_three_regular(k)) return KernelShape::cubic;
  return KernelShape::other;
}

std::string code_of(const MDM& k) {
  try {
    return canonical_code(k);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::size_cap) return "";
    throw;
  }
}

struct SccStat {
  double length = 0;
  std::size_t size = 0;
  std::size_t index = 0;
  std::optional<MDM> kernel;
};

void fill_record(RunRecord& rec, std::vector<SccStat> sccs) {
  std::stable_sort(sccs.begin(), sccs.end(), [](const SccStat& a, const SccStat& b) {
    if (a.length != b.length) return a.length > b.length;
    if (a.size != b.size) return a.size > b.size;
    return a.index < b.index;
  });
  for (auto& s : sccs) {
    rec.scc_lengths.push_back(s.length);
    rec.scc_sizes.push_back(s.size);
  }
  std::sort(rec.scc_sizes.begin(), rec.scc_sizes.end(), std::greater<>());
  for (auto& s : sccs) {
    if (!s.kernel) break;
    rec.kernel_codes.push_back(code_of(*s.kernel));
    rec.kernel_shapes.push_back(shape_of(*s.kernel));
  }
}

std::vector<SccStat> graph_sccs(const Digraph& g, std::size_t top_k) {
  auto part = strongly_connected_components(g);
  std::vector<std::size_t> edges(part.members.size(), 0);
  for (const auto& e : g.edges())
    if (part.component[e.tail] == part.component[e.head]) ++edges[part.component[e.tail]];
  std::vector<SccStat> out;
  for (std::size_t c = 0; c < part.members.size(); ++c) {
    if (edges[c] == 0) continue;
    std::int32_t first = *std::min_element(part.members[c].begin(), part.members[c].end());
    out.push_back({static_cast<double>(edges[c]), part.members[c].size(), static_cast<std::size_t>(first), {}});
  }
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out[a].length != out[b].length) return out[a].length > out[b].length;
    if (out[a].size != out[b].size) return out[a].size > out[b].size;
    return out[a].index < out[b].index;
  });
  std::vector<std::int32_t> wanted(part.members.size(), -1);
  for (std::size_t r = 0; r < std::min(top_k, order.size()); ++r) {
    std::int32_t c = part.component[static_cast<std::size_t>(out[order[r]].index)];
    wanted[c] = static_cast<std::int32_t>(order[r]);
  }
  std::vector<std::vector<MdmEdge>> induced(out.size());
  std::int64_t id = 0;
  for (const auto& e : g.edges()) {
    std::int32_t c = part.component[e.tail];
    if (c != part.component[e.head] || wanted[c] < 0) continue;
    induced[wanted[c]].push_back({id++, e.tail, e.head, 1.0});
  }
  for (std::size_t c = 0; c < part.members.size(); ++c) {
    if (wanted[c] < 0) continue;
    std::vector<VertexId> vs(part.members[c].begin(), part.members[c].end());
    std::sort(vs.begin(), vs.end());
    out[wanted[c]].kernel = kernel(MDM(std::move(vs), std::move(induced[wanted[c]])));
  }
  return out;
}

std::vector<SccStat> staged_sccs(const StagedRun& run, std::size_t top_k, std::size_t& truncated) {
  std::vector<SccStat> out;
  for (const auto& comp : run.components) {
    if (comp.excursion.truncated) {
      ++truncated;
      continue;
    }
    for (const auto& k : comp.sccs) {
      double len = k.total_length();
      // Smoothing preserves vertices minus edges.
      auto size = static_cast<std::size_t>(std::llround(len)) + k.vertex_count() - k.edge_count();
      out.push_back({len, size, static_cast<std::size_t>(comp.excursion.l), k});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SccStat& a, const SccStat& b) {
    if (a.length != b.length) return a.length > b.length;
    if (a.size != b.size) return a.size > b.size;
    return a.index < b.index;
  });
  for (std::size_t i = top_k; i < out.size(); ++i) out[i].kernel.reset();
  return out;
}

std::vector<std::vector<Vertex>> out_lists(const Digraph& g) {
  std::vector<std::vector<Vertex>> adj(g.n());
  for (const auto& e : g.edges()) adj[e.tail].push_back(e.head);
  return adj;
}

}  // namespace

std::string to_string(KernelShape s) {
  switch (s) {
    case KernelShape::loop: return "loop";
    case KernelShape::cubic: return "cubic";
    case KernelShape::other: return "other";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  static const std::set<std::string> known{"law", "model", "er_mean_degree", "n_list", "runs_per_n",
                                           "horizon_rule", "continuum", "seed", "top_k", "check_containment",
                                           "diameter", "degree_attempts", "output_prefix"};
  if (!j.is_object()) throw Error(ErrorKind::invalid_argument, "experiment config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error(ErrorKind::invalid_argument, "unknown config key: " + key);
  try {
    c.law_spec = j.at("law");
    if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
    c.er_mean_degree = j.value("er_mean_degree", c.er_mean_degree);
    c.n_list = j.at("n_list").get<std::vector<std::size_t>>();
    c.runs_per_n = j.at("runs_per_n").get<std::size_t>();
    if (j.contains("horizon_rule")) c.horizon = HorizonRule::parse(j.at("horizon_rule").get<std::string>());
    if (j.contains("continuum")) {
      c.continuum_T = j.at("continuum").value("T", c.continuum_T);
      c.continuum_dt = j.at("continuum").value("dt", c.continuum_dt);
    }
    c.seed = j.value("seed", std::uint64_t{0});
    c.top_k = j.value("top_k", c.top_k);
    c.check_containment = j.value("check_containment", false);
    if (j.contains("diameter")) {
      const auto& d = j.at("diameter");
      c.diameter_sources = d.value("sources", std::size_t{0});
      std::string rule = d.value("rule", std::string("largest_trees"));
      if (rule == "uniform") c.diameter_rule = DiameterSources::uniform;
      else if (rule == "largest_trees") c.diameter_rule = DiameterSources::largest_trees;
      else throw Error(ErrorKind::invalid_argument, "unknown diameter rule: " + rule);
    }
    c.degree_attempts = j.value("degree_attempts", c.degree_attempts);
    c.output_prefix = j.value("output_prefix", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"law", law_spec},
          {"model", model_name(model)},
          {"er_mean_degree", er_mean_degree},
          {"n_list", n_list},
          {"runs_per_n", runs_per_n},
          {"horizon_rule", horizon.str()},
          {"continuum", {{"T", continuum_T}, {"dt", continuum_dt}}},
          {"seed", seed},
          {"top_k", top_k},
          {"check_containment", check_containment},
          {"diameter",
           {{"sources", diameter_sources},
            {"rule", diameter_rule == DiameterSources::uniform ? "uniform" : "largest_trees"}}},
          {"degree_attempts", degree_attempts},
          {"output_prefix", output_prefix}};
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw Error(ErrorKind::invalid_argument, "n_list is empty");
  for (auto n : n_list)
    if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be at least 1");
  if (runs_per_n < 1) throw Error(ErrorKind::invalid_argument, "runs_per_n must be at least 1");
  if (!(continuum_T > 0) || !(continuum_dt > 0)) throw Error(ErrorKind::invalid_argument, "continuum T, dt must be positive");
  if (degree_attempts < 1) throw Error(ErrorKind::invalid_argument, "degree_attempts must be at least 1");
  if (model == GraphModel::erdos_renyi && !(er_mean_degree >= 0))
    throw Error(ErrorKind::invalid_argument, "er_mean_degree must be nonnegative");
  if (model != GraphModel::erdos_renyi) (void)law();
}

bool RunRecord::same_result(const RunRecord& o) const {
  return n == o.n && run == o.run && seed == o.seed && scc_lengths == o.scc_lengths && scc_sizes == o.scc_sizes &&
         kernel_codes == o.kernel_codes && kernel_shapes == o.kernel_shapes &&
         truncated_components == o.truncated_components && diameter_lb == o.diameter_lb &&
         containment_ok == o.containment_ok && degree_attempts == o.degree_attempts;
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json shapes = nlohmann::json::array();
  for (auto s : kernel_shapes) shapes.push_back(to_string(s));
  nlohmann::json j{{"n", n},
                   {"run", run},
                   {"seed", seed},
                   {"scc_lengths", scc_lengths},
                   {"scc_sizes", scc_sizes},
                   {"kernel_codes", kernel_codes},
                   {"kernel_shapes", shapes},
                   {"truncated_components", truncated_components},
                   {"degree_attempts", degree_attempts},
                   {"wall_time", wall_time}};
  j["diameter_lb"] = diameter_lb ? nlohmann::json(*diameter_lb) : nlohmann::json(nullptr);
  j["containment_ok"] = containment_ok ? nlohmann::json(*containment_ok) : nlohmann::json(nullptr);
  return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.n = j.at("n").get<std::size_t>();
    r.run = j.at("run").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.scc_lengths = j.at("scc_lengths").get<std::vector<double>>();
    r.scc_sizes = j.at("scc_sizes").get<std::vector<std::size_t>>();
    r.kernel_codes = j.at("kernel_codes").get<std::vector<std::string>>();
    for (const auto& s : j.at("kernel_shapes")) r.kernel_shapes.push_back(parse_shape(s.get<std::string>()));
    r.truncated_components = j.at("truncated_components").get<std::size_t>();
    r.degree_attempts = j.at("degree_attempts").get<std::uint64_t>();
    r.wall_time = j.at("wall_time").get<double>();
    if (!j.at("diameter_lb").is_null()) r.diameter_lb = j.at("diameter_lb").get<std::size_t>();
    if (!j.at("containment_ok").is_null()) r.containment_ok = j.at("containment_ok").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad record: ") + e.what());
  }
  return r;
}

std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t n, std::size_t run) {
  return derive_seed(cfg.seed, {n, run});
}

RunRecord run_single(const ExperimentConfig& cfg, const JointDegreeLaw& law, std::size_t n, std::size_t run) {
  auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.n = n;
  rec.run = run;
  rec.seed = run_seed(cfg, n, run);
  const std::uint64_t s = rec.seed;

  if (cfg.model == GraphModel::staged) {
    StagedOptions opt{StreamMode::exact_reorder, cfg.horizon(n)};
    auto staged = run_staged(law, n, opt, derive_seed(s, {0}));
    fill_record(rec, staged_sccs(staged, cfg.top_k, rec.truncated_components));
  } else {
    Digraph g;
    switch (cfg.model) {
      case GraphModel::configuration: {
        auto cd = sample_conditioned_degrees(law, n, derive_seed(s, {0}), cfg.degree_attempts);
        rec.degree_attempts = cd.attempts;
        g = pair_configuration(cd.degrees, derive_seed(s, {1}));
        break;
      }
      case GraphModel::configuration_simple: {
        auto ss = sample_simple(law, n, derive_seed(s, {0}), 1'000'000, cfg.degree_attempts);
        rec.degree_attempts = ss.attempts;
        g = std::move(ss.graph);
        break;
      }
      default:
        g = directed_er_sample(n, std::min(1.0, cfg.er_mean_degree / static_cast<double>(n)), derive_seed(s, {0}));
    }
    fill_record(rec, graph_sccs(g, cfg.top_k));
    if (cfg.check_containment) rec.containment_ok = sccs_within_trees(g, run_edfs(g, derive_seed(s, {2})));
    if (cfg.diameter_sources > 0) {
      rec.diameter_lb = cfg.diameter_rule == DiameterSources::uniform
                            ? diameter_lower_bound(g, cfg.diameter_sources, derive_seed(s, {3}))
                            : eccentricity_bound(g, largest_tree_roots(g, cfg.diameter_sources, derive_seed(s, {2})));
    }
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, Execution exec) {
  cfg.validate();
  const JointDegreeLaw law = cfg.model == GraphModel::erdos_renyi ? JointDegreeLaw::poisson_product(1, 1)
                                                                  : cfg.law();
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (auto n : cfg.n_list)
    for (std::size_t r = 0; r < cfg.runs_per_n; ++r) tasks.emplace_back(n, r);
  std::vector<RunRecord> records(tasks.size());
  std::vector<std::optional<Error>> errors(tasks.size());
  auto one = [&](std::size_t i) {
    try {
      records[i] = run_single(cfg, law, tasks[i].first, tasks[i].second);
    } catch (const Error& e) {
      errors[i] = e;
    } catch (const std::exception& e) {
      errors[i] = Error(ErrorKind::invalid_argument, e.what());
    }
  };
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < tasks.size(); ++i) one(i);
  } else {
    const auto count = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (errors[i])
      throw Error(errors[i]->kind(), "n=" + std::to_string(tasks[i].first) + " run=" + std::to_string(tasks[i].second) +
                                         ": " + errors[i]->what());
  return records;
}

std::size_t eccentricity_bound(const Digraph& g, const std::vector<Vertex>& sources) {
  auto adj = out_lists(g);
  std::vector<std::int64_t> dist(g.n(), -1);
  std::vector<Vertex> touched;
  std::size_t best = 0;
  for (Vertex s : sources) {
    std::queue<Vertex> q;
    dist[s] = 0;
    touched.push_back(s);
    q.push(s);
    while (!q.empty()) {
      Vertex v = q.front();
      q.pop();
      best = std::max(best, static_cast<std::size_t>(dist[v]));
      for (Vertex w : adj[v])
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          touched.push_back(w);
          q.push(w);
        }
    }
    for (Vertex v : touched) dist[v] = -1;
    touched.clear();
  }
  return best;
}

std::size_t diameter_lower_bound(const Digraph& g, std::size_t sources, std::uint64_t seed) {
  if (sources < 1) throw Error(ErrorKind::invalid_argument, "sources must be at least 1");
  std::vector<Vertex> all(g.n());
  std::iota(all.begin(), all.end(), Vertex{0});
  if (sources >= g.n()) return eccentricity_bound(g, all);
  Rng rng = make_rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < sources; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(g.n() - i));
    std::swap(all[i], all[std::min(j, g.n() - 1)]);
  }
  all.resize(sources);
  return eccentricity_bound(g, all);
}

std::vector<Vertex> largest_tree_roots(const Digraph& g, std::size_t sources, std::uint64_t seed) {
  if (g.n() == 0) return {};
  auto x = run_edfs(g, seed);
  const auto& f = x.forest;
  auto sizes = f.subtree_sizes();
  std::vector<NodeId> roots;
  for (NodeId v = 0; v < static_cast<NodeId>(f.size()); ++v)
    if (f.is_root(v)) roots.push_back(v);
  std::stable_sort(roots.begin(), roots.end(), [&](NodeId a, NodeId b) { return sizes[a] > sizes[b]; });
  if (roots.size() > sources) roots.resize(sources);
  std::vector<Vertex> out;
  for (NodeId r : roots) out.push_back(f.nodes[r].vertex);
  return out;
}

namespace {

std::string quote(const std::string& s) { return '"' + s + '"'; }

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_records_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "n,seed,rank,length,size,kernel_code\n";
  for (const auto& r : records)
    for (std::size_t i = 0; i < r.scc_lengths.size(); ++i)
      os << r.n << ',' << r.seed << ',' << i + 1 << ',' << fmt_double(r.scc_lengths[i]) << ',' << r.scc_sizes[i]
         << ',' << quote(i < r.kernel_codes.size() ? r.kernel_codes[i] : "") << '\n';
}

void write_records_jsonl(std::ostream& os, const std::vector<RunRecord>& records) {
  for (const auto& r : records) os << r.to_json().dump() << '\n';
}

void write_plot_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "n,seed,rank,length_scaled,size_scaled\n";
  for (const auto& r : records) {
    double scale = std::cbrt(static_cast<double>(r.n));
    for (std::size_t i = 0; i < r.scc_lengths.size(); ++i)
      os << r.n << ',' << r.seed << ',' << i + 1 << ',' << fmt_double(r.scc_lengths[i] / scale) << ','
         << fmt_double(static_cast<double>(r.scc_sizes[i]) / scale) << '\n';
  }
}

std::vector<RunRecord> read_records_jsonl(std::istream& is) {
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(RunRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::io, std::string("bad JSON line: ") + e.what());
    }
  }
  return out;
}

std::vector<CsvRow> read_records_csv(std::istream& is) {
  std::vector<CsvRow> out;
  std::string line;
  if (!std::getline(is, line) || line != "n,seed,rank,length,size,kernel_code")
    throw Error(ErrorKind::io, "missing CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto q = line.find('"');
    if (q == std::string::npos || line.back() != '"') throw Error(ErrorKind::io, "bad CSV row: " + line);
    std::istringstream head(line.substr(0, q));
    CsvRow r;
    char c1, c2, c3, c4, c5;
    head >> r.n >> c1 >> r.seed >> c2 >> r.rank >> c3 >> r.length >> c4 >> r.size >> c5;
    if (!head || c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',')
      throw Error(ErrorKind::io, "bad CSV row: " + line);
    r.kernel_code = line.substr(q + 1, line.size() - q - 2);
    out.push_back(std::move(r));
  }
  return out;
}

void emit_report(const std::vector<RunRecord>& records, const std::string& prefix, ReportFormat format) {
  if (records.empty()) throw Error(ErrorKind::invalid_argument, "no records to report");
  auto open = [](const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::io, "cannot open " + path);
    return f;
  };
  if (format != ReportFormat::jsonl) {
    auto f = open(prefix + ".csv");
    write_records_csv(f, records);
    auto p = open(prefix + "_plot.csv");
    write_plot_csv(p, records);
  }
  if (format != ReportFormat::csv) {
    auto f = open(prefix + ".jsonl");
    write_records_jsonl(f, records);
  }
}

}  // namespace dcm
