#include "dcm/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dcm/mdm_metric.hpp"

namespace dcm {

namespace {

void fill_from_brownian(PathGrid& p) {
  const std::size_t N = p.brownian.size() - 1;
  p.b_hat.resize(N + 1);
  p.run_min.resize(N + 1);
  p.r_hat.resize(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    const double t = static_cast<double>(i) * p.dt;
    p.b_hat[i] = p.brownian[i] - p.drift_coeff * t * t;
    p.run_min[i] = i == 0 ? p.b_hat[0] : std::min(p.run_min[i - 1], p.b_hat[i]);
    p.r_hat[i] = p.b_hat[i] - p.run_min[i];
  }
}

}  // namespace

PathGrid bhat_from_increments(double drift_coeff, double dt, std::span<const double> increments) {
  if (!(dt > 0)) throw Error(ErrorKind::invalid_argument, "dt must be positive");
  PathGrid p;
  p.dt = dt;
  p.horizon_T = dt * static_cast<double>(increments.size());
  p.drift_coeff = drift_coeff;
  p.brownian.assign(increments.size() + 1, 0.0);
  for (std::size_t i = 0; i < increments.size(); ++i) p.brownian[i + 1] = p.brownian[i] + increments[i];
  fill_from_brownian(p);
  return p;
}

PathGrid simulate_bhat(const CriticalParams& params, double T, double dt, std::uint64_t seed) {
  if (!(dt > 0) || !(T >= 0)) throw Error(ErrorKind::invalid_argument, "need dt > 0 and T >= 0");
  if (!params.has_continuum_limit()) throw Error(ErrorKind::invalid_argument, "law has sigma_plus = 0");
  const auto N = static_cast<std::size_t>(std::llround(T / dt));
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(dt));
  std::vector<double> inc(N);
  for (auto& x : inc) x = gauss(rng);
  return bhat_from_increments(params.drift_coeff, dt, inc);
}

PathGrid refine_path(const PathGrid& path, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double half_sd = 0.5 * std::sqrt(path.dt);
  std::vector<double> inc;
  inc.reserve(2 * path.steps());
  for (std::size_t i = 0; i < path.steps(); ++i) {
    const double d = path.brownian[i + 1] - path.brownian[i];
    const double z = half_sd * gauss(rng);
    inc.push_back(0.5 * d + z);
    inc.push_back(0.5 * d - z);
  }
  return bhat_from_increments(path.drift_coeff, path.dt / 2, inc);
}

std::vector<std::size_t> sample_poisson_cells(std::span<const double> intensity, double dt, std::uint64_t seed,
                                              Thinning thinning) {
  std::vector<std::size_t> out;
  Rng rng = make_rng(seed);
  if (thinning == Thinning::bernoulli) {
    for (std::size_t i = 1; i < intensity.size(); ++i) {
      const double p = intensity[i] * dt;
      if (p > 0.5) throw Error(ErrorKind::grid_too_coarse, "intensity * dt = " + std::to_string(p) + " > 0.5");
      if (p > 0 && uniform01(rng) < p) out.push_back(i);
    }
    return out;
  }
  std::exponential_distribution<double> expo(1.0);
  double hazard = 0, threshold = expo(rng);
  for (std::size_t i = 1; i < intensity.size(); ++i) {
    hazard += intensity[i] * dt;
    while (hazard >= threshold) {
      out.push_back(i);
      threshold += expo(rng);
    }
  }
  return out;
}

std::vector<std::size_t> sample_cox(const PathGrid& path, const CriticalParams& params, std::uint64_t seed,
                                    Thinning thinning) {
  std::vector<double> lambda(path.r_hat.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] = params.cox_coeff * path.r_hat[i];
  auto marks = sample_poisson_cells(lambda, path.dt, seed, thinning);
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  return marks;
}

GridExcursion locate_excursion(const PathGrid& path, std::size_t x) {
  if (x > path.steps()) throw Error(ErrorKind::invalid_argument, "time beyond the horizon");
  if (!(path.r_hat[x] > 0)) throw Error(ErrorKind::precondition, "r_hat vanishes at the requested time");
  const double level = path.run_min[x];
  std::size_t l = x;
  while (l > 0 && path.run_min[l - 1] == level) --l;
  std::size_t j = x + 1;
  while (j <= path.steps() && path.b_hat[j] >= level) ++j;
  if (j > path.steps()) return {l, path.steps() - l, true};
  return {l, j - l, false};
}

ExcursionTree::ExcursionTree(const PathGrid& path, const GridExcursion& exc, double height_scale)
    : l_(exc.l), dt_(path.dt) {
  if (exc.l + exc.sigma > path.steps()) throw Error(ErrorKind::invalid_argument, "excursion beyond the path");
  f_.resize(exc.sigma + 1);
  for (std::size_t i = 0; i <= exc.sigma; ++i) f_[i] = height_scale * (path.b_hat[exc.l + i] - path.run_min[exc.l]);
  f_.front() = 0.0;
  f_.back() = std::max(0.0, f_.back());
  if (!exc.truncated) f_.back() = 0.0;
  sparse_.push_back(f_);
  for (std::size_t w = 1; 2 * w <= f_.size(); w *= 2) {
    const auto& prev = sparse_.back();
    std::vector<double> cur(f_.size() - 2 * w + 1);
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = std::min(prev[i], prev[i + w]);
    sparse_.push_back(std::move(cur));
  }
}

std::size_t ExcursionTree::check(std::size_t i) const {
  if (i < l_ || i - l_ >= f_.size()) throw Error(ErrorKind::invalid_argument, "grid index outside the excursion");
  return i;
}

double ExcursionTree::min(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  const std::size_t lo = check(a) - l_, hi = check(b) - l_;
  const std::size_t len = hi - lo + 1;
  std::size_t level = 0;
  while ((std::size_t{2} << level) <= len) ++level;
  return std::min(sparse_[level][lo], sparse_[level][hi + 1 - (std::size_t{1} << level)]);
}

double ExcursionTree::distance(std::size_t s, std::size_t t) const { return f(s) + f(t) - 2 * min(s, t); }

double tree_distance(const ExcursionTree& tree, std::size_t s, std::size_t t) { return tree.distance(s, t); }

double marked_tree_length(const ExcursionTree& tree, std::span<const std::size_t> marks) {
  if (!std::is_sorted(marks.begin(), marks.end())) throw Error(ErrorKind::invalid_argument, "marks must be sorted");
  double total = 0;
  std::size_t prev = tree.begin();
  for (auto t : marks) {
    total += tree.f(t) - tree.min(prev, t);
    prev = t;
  }
  return total;
}

std::vector<std::size_t> sample_continuum_candidates(const ExcursionTree& tree, const CriticalParams& params,
                                                     std::size_t first, std::uint64_t seed,
                                                     const CandidateOptions& opt) {
  std::vector<std::size_t> v{first};
  Rng rng = make_rng(seed);
  std::exponential_distribution<double> expo(1.0);
  double ell = tree.f(first);
  double run_min = tree.f(first);
  double hazard = 0, threshold = expo(rng);
  for (std::size_t s = first + 1; s <= tree.end(); ++s) {
    run_min = std::min(run_min, tree.f(s));
    const double marked = ell + tree.f(s) - run_min;
    const double p = params.candidate_coeff * marked * tree.dt();
    bool hit;
    if (opt.thinning == Thinning::bernoulli) {
      if (p > 0.5) throw Error(ErrorKind::grid_too_coarse, "candidate intensity * dt > 0.5");
      hit = p > 0 && uniform01(rng) < p;
    } else {
      hazard += p;
      hit = hazard >= threshold;
    }
    if (!hit) continue;
    v.push_back(s);
    if (v.size() > opt.cap) throw Error(ErrorKind::attempts_exhausted, "candidate count exceeded the cap");
    ell = marked;
    run_min = tree.f(s);
    hazard = 0;
    threshold = expo(rng);
  }
  return v;
}

std::vector<TreePoint> sample_continuum_heads(const ExcursionTree& tree, std::span<const std::size_t> candidates,
                                              std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> lo, len;  // segment j: heights (lo_j, lo_j + len_j] on the root path of V_j
  double total = 0;
  std::vector<TreePoint> out;
  std::size_t prev = tree.begin();
  for (auto v : candidates) {
    const double base = tree.min(prev, v);
    lo.push_back(base);
    len.push_back(tree.f(v) - base);
    total += len.back();
    prev = v;
    if (!(total > 0)) throw Error(ErrorKind::degenerate, "zero-length marked tree");
    double u = uniform01(rng) * total;
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (u < len[j] || j + 1 == lo.size()) {
        out.push_back({candidates[j], lo[j] + std::min(u, len[j])});
        break;
      }
      u -= len[j];
    }
  }
  return out;
}

namespace {

// Grid coincidences (a mark on a branch point, a head on a vertex) merge vertices that are
// distinct in the limit tree. Split every vertex of total degree above three into binary
// pieces joined by zero-length edges; reachability and lengths are unchanged.
MDM split_coincident_vertices(const MDM& m) {
  std::vector<VertexId> vs = m.vertices();
  std::vector<MdmEdge> es = m.edges();
  std::map<VertexId, std::size_t> index;
  for (std::size_t i = 0; i < vs.size(); ++i) index[vs[i]] = i;
  std::vector<std::vector<std::size_t>> ins(vs.size()), outs(vs.size());
  std::int64_t next_edge = 0;
  for (std::size_t k = 0; k < es.size(); ++k) {
    outs[index[es[k].tail]].push_back(k);
    ins[index[es[k].head]].push_back(k);
    next_edge = std::max(next_edge, es[k].id + 1);
  }
  VertexId next_vertex = vs.empty() ? 0 : vs.back() + 1;
  auto fresh = [&] {
    vs.push_back(next_vertex++);
    ins.emplace_back();
    outs.emplace_back();
    return vs.size() - 1;
  };
  auto link = [&](std::size_t a, std::size_t b) {
    es.push_back({next_edge++, vs[a], vs[b], 0.0});
    outs[a].push_back(es.size() - 1);
    ins[b].push_back(es.size() - 1);
  };
  for (std::size_t v = 0; v < vs.size(); ++v) {
    while (ins[v].size() + outs[v].size() > 3) {
      const std::size_t w = fresh();
      if (ins[v].size() >= 2 && outs[v].size() >= 2) {
        for (auto k : outs[v]) es[k].tail = vs[w];
        outs[w] = std::move(outs[v]);
        outs[v].clear();
        link(v, w);
      } else if (outs[v].size() >= 3) {
        for (std::size_t i = 1; i < outs[v].size(); ++i) {
          es[outs[v][i]].tail = vs[w];
          outs[w].push_back(outs[v][i]);
        }
        outs[v].resize(1);
        link(v, w);
      } else {
        for (std::size_t i = 1; i < ins[v].size(); ++i) {
          es[ins[v][i]].head = vs[w];
          ins[w].push_back(ins[v][i]);
        }
        ins[v].resize(1);
        link(w, v);
      }
    }
  }
  return MDM(std::move(vs), std::move(es));
}

}  // namespace

MDM build_marked_tree_mdm(const MarkedTreeSpec& spec) {
  const std::size_t L = spec.leaf_height.size();
  if (L == 0) return MDM();
  if (spec.branch.size() != L) throw Error(ErrorKind::invalid_argument, "one branch height per leaf");
  // A point (j, h) lies on the root paths of leaves j' < j while h <= branch[j'+1..j].
  auto owner = [&](std::size_t j, double h) {
    while (j > 0 && h <= spec.branch[j]) --j;
    return j;
  };
  std::map<std::pair<std::size_t, double>, VertexId> ids;
  auto key = [&](std::size_t j, double h) {
    const auto k = std::make_pair(owner(j, h), h);
    auto it = ids.find(k);
    if (it == ids.end()) it = ids.emplace(k, static_cast<VertexId>(ids.size())).first;
    return it->second;
  };
  const VertexId root = key(0, 0.0);
  std::vector<VertexId> leaf(L);
  for (std::size_t j = 0; j < L; ++j) {
    leaf[j] = key(j, spec.leaf_height[j]);
    if (j > 0) key(j - 1, spec.branch[j]);
  }
  std::vector<VertexId> head;
  for (const auto& [j, h] : spec.heads) head.push_back(key(j, h));

  MDM m;
  for (const auto& [k, id] : ids) m.add_vertex(id);
  // Chain the keys of each owned segment, starting from its attachment point.
  std::map<std::size_t, std::vector<std::pair<double, VertexId>>> by_owner;
  for (const auto& [k, id] : ids) by_owner[k.first].emplace_back(k.second, id);
  for (auto& [j, pts] : by_owner) {
    std::sort(pts.begin(), pts.end());
    double h = 0;
    VertexId at = root;
    if (j > 0) {
      h = spec.branch[j];
      at = ids.at({owner(j - 1, h), h});
    }
    for (const auto& [ph, id] : pts) {
      if (id == at) continue;
      m.add_edge(at, id, ph - h);
      at = id;
      h = ph;
    }
  }
  for (std::size_t i = 0; i < head.size(); ++i) m.add_edge(leaf[i], head[i], 0.0);
  return split_coincident_vertices(m);
}

LimitComponent build_limit_mdms(const ExcursionTree& tree, LimitComponent c) {
  MarkedTreeSpec spec;
  std::size_t prev = tree.begin();
  for (auto v : c.candidates) {
    spec.leaf_height.push_back(tree.f(v));
    spec.branch.push_back(spec.branch.empty() ? 0.0 : tree.min(prev, v));
    prev = v;
  }
  for (const auto& w : c.heads) {
    const auto j = static_cast<std::size_t>(std::find(c.candidates.begin(), c.candidates.end(), w.base) - c.candidates.begin());
    spec.heads.emplace_back(j, w.height);
  }
  c.limit_mdm = build_marked_tree_mdm(spec);
  c.sccs.clear();
  for (const auto& s : strongly_connected_components(c.limit_mdm))
    if (s.edge_count() > 0) c.sccs.push_back(kernel(s));
  std::stable_sort(c.sccs.begin(), c.sccs.end(),
                   [](const MDM& a, const MDM& b) { return a.total_length() > b.total_length(); });
  return c;
}

LimitSample sample_limit_sequence(const CriticalParams& params, double T, double dt, std::uint64_t seed,
                                  std::size_t prefix_k, const LimitOptions& opt) {
  LimitSample out;
  if (T > 0) {
    const double coarse_dt = std::ldexp(dt, opt.refinements);
    PathGrid path = simulate_bhat(params, T, coarse_dt, derive_seed(seed, {0}));
    for (int r = 0; r < opt.refinements; ++r) path = refine_path(path, derive_seed(seed, {9, static_cast<std::uint64_t>(r)}));
    const auto marks = sample_cox(path, params, derive_seed(seed, {1}), opt.thinning);

    std::vector<std::pair<GridExcursion, std::vector<std::size_t>>> comps;
    for (auto x : marks) {
      if (!(path.r_hat[x] > 0)) continue;
      if (!comps.empty() && x <= comps.back().first.l + comps.back().first.sigma && x > comps.back().first.l) {
        comps.back().second.push_back(x);
        continue;
      }
      comps.emplace_back(locate_excursion(path, x), std::vector<std::size_t>{x});
    }
    std::vector<MDM> pooled;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const auto& [exc, cox] = comps[c];
      if (exc.truncated) {
        ++out.truncated;
        continue;
      }
      ++out.components;
      ExcursionTree tree(path, exc, params.height_scale);
      LimitComponent comp;
      comp.excursion = exc;
      comp.cox_marks = cox;
      comp.candidates = sample_continuum_candidates(tree, params, cox.front(), derive_seed(seed, {2, c}),
                                                    {opt.thinning, 10'000});
      comp.heads = sample_continuum_heads(tree, comp.candidates, derive_seed(seed, {3, c}));
      comp = build_limit_mdms(tree, std::move(comp));
      for (auto& s : comp.sccs) pooled.push_back(std::move(s));
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const MDM& a, const MDM& b) { return a.total_length() > b.total_length(); });
    for (const auto& s : pooled) out.lengths.push_back(s.total_length());
    out.sequence = std::move(pooled);
  }
  if (out.sequence.size() > prefix_k) out.sequence.resize(prefix_k);
  while (out.sequence.size() < prefix_k) out.sequence.push_back(MDM::loop_unit());
  return out;
}

}  // namespace dcm
