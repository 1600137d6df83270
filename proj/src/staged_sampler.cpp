#include "dcm/staged_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dcm/graph_sampler.hpp"
#include "dcm/mdm_metric.hpp"

namespace dcm {

DiscoveryStream DiscoveryStream::exact(const DegreeSequence& seq, std::uint64_t seed) {
  DiscoveryStream s;
  s.mode_ = StreamMode::exact_reorder;
  Rng rng = make_rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<std::pair<double, std::size_t>> clocks;
  for (std::size_t v = 0; v < seq.n; ++v) {
    s.remaining_in_ += seq.d_minus[v];
    if (seq.d_minus[v] > 0) clocks.emplace_back(expo(rng) / seq.d_minus[v], v);
  }
  std::sort(clocks.begin(), clocks.end());
  for (const auto& [t, v] : clocks) s.order_.push_back(seq.at(v));
  return s;
}

DiscoveryStream DiscoveryStream::iid(const JointDegreeLaw& law, std::uint64_t seed) {
  DiscoveryStream s;
  s.mode_ = StreamMode::iid_z;
  s.z_ = size_biased(law);
  s.rng_ = make_rng(seed);
  return s;
}

std::optional<DegreePair> DiscoveryStream::next() {
  if (mode_ == StreamMode::iid_z) {
    ++pos_;
    return z_->sample(rng_);
  }
  if (pos_ == order_.size()) return std::nullopt;
  const DegreePair d = order_[pos_++];
  remaining_in_ -= d.in;
  return d;
}

double purple_probability(std::int64_t unpaired_in, std::int64_t total_in, std::int64_t k, std::int64_t running_min) {
  const std::int64_t denom = total_in - k - running_min + 1;
  if (unpaired_in == 0) return 0.0;
  if (denom <= 0) throw Error(ErrorKind::probability_out_of_range, "purple probability: no unpaired in-half-edges left");
  const double q = static_cast<double>(unpaired_in) / static_cast<double>(denom);
  if (q < 0.0 || q > 1.0)
    throw Error(ErrorKind::probability_out_of_range, "purple probability " + std::to_string(q) + " outside [0,1]");
  return q;
}

double ancestral_probability(std::int64_t length_height, std::int64_t unpaired_in_before) {
  if (length_height == 0) return 0.0;
  if (unpaired_in_before <= 0 || length_height > unpaired_in_before)
    throw Error(ErrorKind::probability_out_of_range, "ancestral probability exceeds 1");
  return static_cast<double>(length_height) / static_cast<double>(unpaired_in_before);
}

double candidate_probability(std::int64_t marked_length, std::int64_t m, std::int64_t unpaired_in_before) {
  const std::int64_t num = marked_length - m;
  if (num < 0) throw Error(ErrorKind::probability_out_of_range, "candidate probability: negative numerator");
  if (num == 0) return 0.0;
  if (unpaired_in_before <= 0 || num > unpaired_in_before)
    throw Error(ErrorKind::probability_out_of_range, "candidate probability exceeds 1");
  return static_cast<double>(num) / static_cast<double>(unpaired_in_before);
}

OutForest sample_out_forest(DiscoveryStream& stream, std::int64_t total_in, std::int64_t horizon, std::uint64_t seed) {
  OutForest f;
  Rng rng = make_rng(seed);
  std::vector<std::pair<NodeId, int>> stack;  // (owner, out-edges still to pop)
  std::int64_t k = 0, unpaired = 0, s_plus = 0, run_min = 0;
  auto push_black = [&](NodeId parent, DegreePair d) {
    const NodeId id = static_cast<NodeId>(f.nodes.size());
    f.nodes.push_back({parent, Color::black, static_cast<Vertex>(stream.emitted() - 1), d.out, d.in});
    if (d.out > 0) stack.emplace_back(id, d.out);
    s_plus += d.out - 1;
  };
  while (horizon < 0 || k < horizon) {
    if (stack.empty()) {
      const auto d = stream.next();
      if (!d) break;
      push_black(no_node, *d);
      unpaired += d->in;
    } else {
      const double q = purple_probability(unpaired, total_in, k, run_min);
      const NodeId parent = stack.back().first;
      if (--stack.back().second == 0) stack.pop_back();
      if (uniform01(rng) < q) {
        f.nodes.push_back({parent, Color::purple, -1, 0, 0});
        unpaired -= 1;
        s_plus -= 1;
      } else {
        const auto d = stream.next();
        if (!d) throw Error(ErrorKind::precondition, "discovery stream exhausted with unexplored half-edges");
        push_black(parent, *d);
        unpaired += d->in - 1;
      }
    }
    ++k;
    run_min = std::min(run_min, s_plus);
  }
  f.rebuild_processes();
  return f;
}

AncestralMarks sample_ancestral_marks(const OutForest& forest, std::uint64_t seed) {
  AncestralMarks out;
  Rng rng = make_rng(seed);
  const auto root = forest.tree_roots();
  std::unordered_set<NodeId> marked;
  out.a_process.assign(forest.size() + 1, 0);
  for (std::size_t k = 1; k <= forest.size(); ++k) {
    const std::size_t node = k - 1;
    out.a_process[k] = out.a_process[k - 1];
    if (forest.nodes[node].color != Color::purple || marked.count(root[node])) continue;
    const double a = ancestral_probability(forest.length_height[node], forest.unpaired_in[k - 1]);
    if (uniform01(rng) < a) {
      ++out.a_process[k];
      out.mark_times.push_back(static_cast<std::int64_t>(k));
      marked.insert(root[node]);
    }
  }
  return out;
}

std::vector<Excursion> extract_marked_excursions(const std::vector<std::int64_t>& lukasiewicz,
                                                 const std::vector<std::int64_t>& marks) {
  const auto K = static_cast<std::int64_t>(lukasiewicz.size()) - 1;
  std::vector<std::int64_t> first_min(lukasiewicz.size(), 0);  // first index attaining min_{j<=k}
  for (std::int64_t k = 1; k <= K; ++k)
    first_min[k] = lukasiewicz[k] < lukasiewicz[first_min[k - 1]] ? k : first_min[k - 1];
  std::vector<Excursion> out;
  for (const auto x : marks) {
    if (x < 1 || x > K) throw Error(ErrorKind::invalid_argument, "mark outside path steps");
    // Step x belongs to the tree opened at the first minimum before x.
    const std::int64_t l = first_min[x - 1];
    if (std::any_of(out.begin(), out.end(), [l](const Excursion& e) { return e.l == l; })) continue;
    const std::int64_t level = lukasiewicz[l];
    std::int64_t j = l + 1;
    while (j <= K && lukasiewicz[j] >= level) ++j;
    out.push_back(j <= K ? Excursion{l, j - l, false} : Excursion{l, K - l, true});
  }
  return out;
}

CandidateScan sample_component_candidates(const OutForest& forest, const Excursion& c, std::int64_t first_tail,
                                          std::uint64_t seed) {
  if (first_tail <= c.l || first_tail > c.l + c.sigma)
    throw Error(ErrorKind::invalid_argument, "first tail outside the component");
  CandidateScan out;
  Rng rng = make_rng(seed);
  const auto& lh = forest.length_height;
  std::int64_t ell = lh[first_tail - 1];
  out.tails.push_back(first_tail);
  out.marked_tree_length.push_back(ell);
  std::int64_t run_min = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t k = first_tail + 1; k <= c.l + c.sigma; ++k) {
    const std::size_t node = static_cast<std::size_t>(k - 1);
    run_min = std::min(run_min, lh[node]);
    const std::int64_t ell_k = ell + lh[node] - run_min;
    out.marked_tree_length.push_back(ell_k);
    if (forest.nodes[node].color != Color::purple) continue;
    const auto m = static_cast<std::int64_t>(out.tails.size());
    const double p = candidate_probability(ell_k, m, forest.unpaired_in[k - 1]);
    if (uniform01(rng) < p) {
      out.tails.push_back(k);
      ell = ell_k;
      run_min = std::numeric_limits<std::int64_t>::max();
    }
  }
  return out;
}

std::vector<HeadSlot> sample_candidate_heads(const OutForest& forest, const std::vector<std::int64_t>& tails,
                                             std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::unordered_map<NodeId, int> used;
  std::vector<NodeId> spanned;
  std::vector<HeadSlot> heads;
  for (const auto t : tails) {
    for (NodeId p = forest.nodes[t - 1].parent; p != no_node && !used.count(p); p = forest.nodes[p].parent) {
      used[p] = 0;
      spanned.push_back(p);
    }
    std::int64_t total = 0;
    for (auto u : spanned) total += forest.weight(u) - used[u];
    if (total <= 0) throw Error(ErrorKind::precondition, "no free in-slot left in the marked tree");
    std::int64_t r = std::uniform_int_distribution<std::int64_t>(0, total - 1)(rng);
    for (auto u : spanned) {
      const std::int64_t a = forest.weight(u) - used[u];
      if (r < a) {
        heads.push_back({u, used[u]++});
        break;
      }
      r -= a;
    }
  }
  return heads;
}

MDM assemble_marked_mdm(const OutForest& forest, const std::vector<NodeId>& tails, const std::vector<NodeId>& heads) {
  if (tails.empty()) return MDM();
  if (heads.size() != tails.size()) throw Error(ErrorKind::invalid_argument, "one head per tail required");
  const auto& nodes = forest.nodes;
  std::unordered_map<NodeId, int> marked_children;  // nodes on root paths of the tails
  NodeId root = tails[0];
  for (auto v : tails) {
    if (marked_children.count(v)) continue;
    marked_children[v] = 0;
    NodeId x = v;
    while (nodes[x].parent != no_node) {
      const NodeId p = nodes[x].parent;
      const bool seen = marked_children.count(p) > 0;
      ++marked_children[p];
      x = p;
      if (seen) break;
    }
    if (nodes[x].parent == no_node) root = x;
  }
  std::unordered_set<NodeId> keys{root};
  for (auto v : tails) keys.insert(v);
  for (auto w : heads) keys.insert(w);
  for (const auto& [v, c] : marked_children)
    if (c >= 2) keys.insert(v);

  MDM m;
  std::vector<NodeId> sorted(keys.begin(), keys.end());
  std::sort(sorted.begin(), sorted.end());
  for (auto v : sorted) m.add_vertex(v);
  for (auto v : sorted) {
    if (v == root) continue;
    NodeId a = nodes[v].parent;
    while (!keys.count(a)) a = nodes[a].parent;
    m.add_edge(a, v, static_cast<double>(forest.height[v] - forest.height[a]));
  }
  for (std::size_t i = 0; i < tails.size(); ++i) m.add_edge(tails[i], heads[i], 0.0);
  return m;
}

std::vector<MDM> extract_sccs_from_marked(const MDM& m) {
  std::vector<MDM> out;
  for (const auto& c : strongly_connected_components(m))
    if (c.edge_count() > 0) out.push_back(kernel(c));
  std::stable_sort(out.begin(), out.end(), [](const MDM& a, const MDM& b) { return a.total_length() > b.total_length(); });
  return out;
}

RedTreeCheck augment_with_red_trees(const OutForest& forest, const JointDegreeLaw& law, std::uint64_t seed,
                                    std::size_t red_cap) {
  RedTreeCheck out;
  const JointDegreeLaw z = size_biased(law);
  Rng rng = make_rng(seed);
  std::vector<int> out_deg;
  std::vector<char> red;
  std::vector<char> original_purple;

  // Red Galton-Watson tree in depth-first order: out-degrees of its nodes, root first.
  auto red_tree = [&]() {
    for (;;) {
      std::vector<int> degs;
      std::int64_t pending = 1;
      bool capped = false;
      while (pending > 0) {
        if (degs.size() >= red_cap) {
          capped = true;
          break;
        }
        const int d = z.sample(rng).out;
        degs.push_back(d);
        pending += d - 1;
      }
      if (!capped) return degs;
      ++out.resampled;
    }
  };

  for (std::size_t i = 0; i < forest.size(); ++i) {
    const auto& x = forest.nodes[i];
    out.theta.push_back(static_cast<std::int64_t>(out_deg.size()));
    if (x.color == Color::black) {
      out_deg.push_back(x.out_degree);
      red.push_back(0);
      original_purple.push_back(0);
      continue;
    }
    const auto degs = red_tree();
    for (std::size_t j = 0; j < degs.size(); ++j) {
      out_deg.push_back(degs[j]);
      red.push_back(j == 0 ? 0 : 1);
      original_purple.push_back(j == 0 ? 1 : 0);
    }
  }

  // Parents of the augmented plane forest from its out-degree sequence. An original node
  // whose parent slot is exhausted starts a new tree exactly when it did originally.
  const std::size_t N = out_deg.size();
  out.parents.assign(N, no_node);
  out.lukasiewicz.assign(N + 1, 0);
  std::vector<std::pair<NodeId, int>> stack;
  for (std::size_t j = 0; j < N; ++j) {
    if (!stack.empty()) {
      out.parents[j] = stack.back().first;
      if (--stack.back().second == 0) stack.pop_back();
    }
    if (out_deg[j] > 0) stack.emplace_back(static_cast<NodeId>(j), out_deg[j]);
    out.lukasiewicz[j + 1] = out.lukasiewicz[j] + out_deg[j] - 1;
  }

  bool ok = std::is_sorted(out.theta.begin(), out.theta.end());
  std::size_t originals = 0;
  for (std::size_t j = 0; j < N; ++j) originals += red[j] ? 0 : 1;
  ok = ok && originals == forest.size();
  for (std::size_t i = 0; ok && i < forest.size(); ++i) {
    const auto& x = forest.nodes[i];
    const auto j = static_cast<std::size_t>(out.theta[i]);
    const NodeId want = x.parent == no_node ? no_node : out.theta[x.parent];
    ok = !red[j] && out.parents[j] == want && (original_purple[j] != 0) == (x.color == Color::purple) &&
         (x.color == Color::purple || out_deg[j] == x.out_degree);
  }
  out.identity_holds = ok;
  return out;
}

StagedRun run_staged(DiscoveryStream& stream, std::int64_t total_in, const StagedOptions& opt, std::uint64_t seed) {
  StagedRun run;
  run.forest = sample_out_forest(stream, total_in, opt.horizon, derive_seed(seed, {1}));
  run.marks = sample_ancestral_marks(run.forest, derive_seed(seed, {2}));
  const auto excursions = extract_marked_excursions(run.forest.lukasiewicz, run.marks.mark_times);
  for (std::size_t i = 0; i < excursions.size(); ++i) {
    MarkedComponent c;
    c.excursion = excursions[i];
    const auto& e = c.excursion;
    const auto first = *std::find_if(run.marks.mark_times.begin(), run.marks.mark_times.end(),
                                     [&](std::int64_t x) { return x > e.l && x <= e.l + e.sigma; });
    if (e.truncated) {
      c.tails = {first};
      run.components.push_back(std::move(c));
      continue;
    }
    auto scan = sample_component_candidates(run.forest, e, first, derive_seed(seed, {3, i}));
    c.tails = std::move(scan.tails);
    c.marked_tree_length = std::move(scan.marked_tree_length);
    c.heads = sample_candidate_heads(run.forest, c.tails, derive_seed(seed, {4, i}));
    std::vector<NodeId> tn, hn;
    for (auto t : c.tails) tn.push_back(t - 1);
    for (auto h : c.heads) hn.push_back(h.node);
    c.assembled = assemble_marked_mdm(run.forest, tn, hn);
    c.sccs = extract_sccs_from_marked(c.assembled);
    run.components.push_back(std::move(c));
  }
  return run;
}

StagedRun run_staged(const JointDegreeLaw& law, std::size_t n, const StagedOptions& opt, std::uint64_t seed) {
  if (opt.mode == StreamMode::exact_reorder) {
    const auto deg = sample_conditioned_degrees(law, n, derive_seed(seed, {0}), 1'000'000'000ULL);
    auto stream = DiscoveryStream::exact(deg.degrees, derive_seed(seed, {5}));
    return run_staged(stream, deg.degrees.total, opt, seed);
  }
  if (opt.horizon < 0) throw Error(ErrorKind::invalid_argument, "iid-Z mode needs a finite horizon");
  auto stream = DiscoveryStream::iid(law, derive_seed(seed, {5}));
  const auto total = static_cast<std::int64_t>(std::floor(law.moment(1, 0) * static_cast<double>(n)));
  return run_staged(stream, total, opt, seed);
}

nlohmann::json component_record(const MarkedComponent& c) {
  nlohmann::json heads = nlohmann::json::array(), lengths = nlohmann::json::array(), codes = nlohmann::json::array();
  for (const auto& h : c.heads) heads.push_back({h.node, h.slot});
  for (const auto& s : c.sccs) {
    lengths.push_back(s.total_length());
    codes.push_back(canonical_code(s));
  }
  return {{"l", c.excursion.l},       {"sigma", c.excursion.sigma}, {"truncated", c.excursion.truncated},
          {"tails", c.tails},         {"heads", heads},             {"scc_lengths", lengths},
          {"kernel_codes", codes}};
}

std::string pipeline_outcome_code(const OutForest& forest, const std::vector<NodeId>& candidate_tails,
                                  const std::vector<NodeId>& candidate_heads) {
  std::ostringstream os;
  for (const auto& x : forest.nodes) {
    if (x.color == Color::purple)
      os << 'P';
    else
      os << (x.parent == no_node ? 'R' : 'B') << x.in_degree << x.out_degree;
  }
  std::vector<std::pair<NodeId, NodeId>> c;
  for (std::size_t i = 0; i < candidate_tails.size(); ++i) c.emplace_back(candidate_tails[i], candidate_heads[i]);
  std::sort(c.begin(), c.end());
  os << '|';
  for (const auto& [t, h] : c) os << t << '>' << h << ',';
  return os.str();
}

}  // namespace dcm
