#include "dcm/mdm_metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace dcm {

double Distance::value() const {
  if (inf_) throw Error(ErrorKind::precondition, "value() of an infinite distance");
  return v_;
}

std::string Distance::str() const {
  if (inf_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v_;
  return os.str();
}

namespace {

void check_cap(const MDM& m, SizeCap cap) {
  if (m.vertex_count() > cap.vertices || m.edge_count() > cap.edges)
    throw Error(ErrorKind::size_cap, "MDM with " + std::to_string(m.vertex_count()) + " vertices / " +
                                         std::to_string(m.edge_count()) + " edges exceeds the size cap");
}

// Dense view: vertex indices, multiplicity matrix, per-pair edge index lists.
struct Dense {
  std::size_t n = 0;
  std::vector<int> in, out, loops;
  std::vector<std::vector<std::size_t>> pair_edges;  // n*n lists of edge indices
  std::vector<int> mult() const {
    std::vector<int> r(pair_edges.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<int>(pair_edges[i].size());
    return r;
  }
};

Dense densify(const MDM& m) {
  Dense d;
  d.n = m.vertex_count();
  d.in.assign(d.n, 0);
  d.out.assign(d.n, 0);
  d.loops.assign(d.n, 0);
  d.pair_edges.assign(d.n * d.n, {});
  for (std::size_t k = 0; k < m.edge_count(); ++k) {
    const auto t = m.index_of(m.edges()[k].tail), h = m.index_of(m.edges()[k].head);
    ++d.out[t];
    ++d.in[h];
    if (t == h) ++d.loops[t];
    d.pair_edges[t * d.n + h].push_back(k);
  }
  return d;
}

using Signature = std::tuple<int, int, int>;

Signature sig(const Dense& d, std::size_t v) { return {d.in[v], d.out[v], d.loops[v]}; }

// Calls visit(vertex_map) for every multiplicity-preserving vertex bijection.
void for_each_vertex_iso(const Dense& a, const Dense& b, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  const std::size_t n = a.n;
  std::vector<std::size_t> map(n);
  std::vector<char> used(n, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      visit(map);
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || sig(a, i) != sig(b, j)) continue;
      bool ok = true;
      for (std::size_t k = 0; k < i && ok; ++k)
        ok = a.pair_edges[i * n + k].size() == b.pair_edges[j * n + map[k]].size() &&
             a.pair_edges[k * n + i].size() == b.pair_edges[map[k] * n + j].size();
      if (!ok) continue;
      used[j] = 1;
      map[i] = j;
      rec(i + 1);
      used[j] = 0;
    }
  };
  rec(0);
}

bool same_shape(const MDM& m1, const MDM& m2) {
  return m1.vertex_count() == m2.vertex_count() && m1.edge_count() == m2.edge_count();
}

}  // namespace

std::vector<Isomorphism> enumerate_isomorphisms(const MDM& m1, const MDM& m2, SizeCap cap) {
  check_cap(m1, cap);
  check_cap(m2, cap);
  std::vector<Isomorphism> out;
  if (!same_shape(m1, m2)) return out;
  const Dense a = densify(m1), b = densify(m2);
  const std::size_t n = a.n;
  for_each_vertex_iso(a, b, [&](const std::vector<std::size_t>& vmap) {
    // Product over parallel classes of all bijections within the class.
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> classes;
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t h = 0; h < n; ++h)
        if (!a.pair_edges[t * n + h].empty())
          classes.emplace_back(a.pair_edges[t * n + h], b.pair_edges[vmap[t] * n + vmap[h]]);
    std::vector<std::size_t> emap(m1.edge_count());
    std::function<void(std::size_t)> rec = [&](std::size_t c) {
      if (c == classes.size()) {
        out.push_back({vmap, emap});
        return;
      }
      auto perm = classes[c].second;
      std::sort(perm.begin(), perm.end());
      do {
        for (std::size_t i = 0; i < perm.size(); ++i) emap[classes[c].first[i]] = perm[i];
        rec(c + 1);
      } while (std::next_permutation(perm.begin(), perm.end()));
    };
    rec(0);
  });
  return out;
}

Distance dg_distance(const MDM& m1, const MDM& m2, SizeCap cap) {
  check_cap(m1, cap);
  check_cap(m2, cap);
  if (!same_shape(m1, m2)) return Distance::infinite();
  const Dense a = densify(m1), b = densify(m2);
  const std::size_t n = a.n;
  bool found = false;
  double best = 0;
  // Within a parallel class the bottleneck matching of two multisets of reals is the sorted one.
  for_each_vertex_iso(a, b, [&](const std::vector<std::size_t>& vmap) {
    double worst = 0;
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t h = 0; h < n; ++h) {
        const auto& ea = a.pair_edges[t * n + h];
        if (ea.empty()) continue;
        const auto& eb = b.pair_edges[vmap[t] * n + vmap[h]];
        std::vector<double> la, lb;
        for (auto k : ea) la.push_back(m1.edges()[k].length);
        for (auto k : eb) lb.push_back(m2.edges()[k].length);
        std::sort(la.begin(), la.end());
        std::sort(lb.begin(), lb.end());
        for (std::size_t i = 0; i < la.size(); ++i) worst = std::max(worst, std::abs(la[i] - lb[i]));
      }
    if (!found || worst < best) best = worst;
    found = true;
  });
  return found ? Distance::finite(best) : Distance::infinite();
}

std::string canonical_code(const MDM& m, SizeCap cap) {
  check_cap(m, cap);
  const Dense d = densify(m);
  const std::size_t n = d.n;
  const auto mult = d.mult();

  // Colour refinement: colours are ranks of (colour, out-profile, in-profile), so they
  // are invariant under relabelling. Admissible orders sort vertices by final colour.
  std::vector<int> colour(n);
  {
    std::vector<Signature> s(n);
    for (std::size_t v = 0; v < n; ++v) s[v] = sig(d, v);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t v = 0; v < n; ++v)
      colour[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), s[v]) - sorted.begin());
  }
  for (std::size_t round = 0; round < n; ++round) {
    using Profile = std::tuple<int, std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>;
    std::vector<Profile> prof(n);
    for (std::size_t v = 0; v < n; ++v) {
      auto& [c, outs, ins] = prof[v];
      c = colour[v];
      for (std::size_t w = 0; w < n; ++w) {
        if (mult[v * n + w]) outs.emplace_back(colour[w], mult[v * n + w]);
        if (mult[w * n + v]) ins.emplace_back(colour[w], mult[w * n + v]);
      }
      std::sort(outs.begin(), outs.end());
      std::sort(ins.begin(), ins.end());
    }
    auto sorted = prof;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> next(n);
    for (std::size_t v = 0; v < n; ++v)
      next[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), prof[v]) - sorted.begin());
    const bool stable = std::set<int>(next.begin(), next.end()).size() == std::set<int>(colour.begin(), colour.end()).size();
    colour = std::move(next);
    if (stable) break;
  }
  std::vector<std::size_t> base(n);
  std::iota(base.begin(), base.end(), std::size_t{0});
  std::sort(base.begin(), base.end(), [&](std::size_t x, std::size_t y) { return colour[x] < colour[y]; });
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [begin, end) in base
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && colour[base[j]] == colour[base[i]]) ++j;
    blocks.emplace_back(i, j);
    i = j;
  }

  // Branch-and-bound over orders, comparing the row-major matrix prefix.
  std::vector<int> best;
  std::vector<std::size_t> order(n);
  std::vector<char> used(n, 0);
  std::vector<int> cur;
  cur.reserve(n * n);
  std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (pos == n) {
      if (best.empty() || cur < best) best = cur;
      return;
    }
    std::size_t blk = 0;
    while (!(blocks[blk].first <= pos && pos < blocks[blk].second)) ++blk;
    for (std::size_t c = blocks[blk].first; c < blocks[blk].second; ++c) {
      const std::size_t v = base[c];
      if (used[v]) continue;
      order[pos] = v;
      // Entries fixed once position pos is chosen: (pos, j<=pos) and (j<pos, pos).
      const std::size_t mark = cur.size();
      for (std::size_t j = 0; j <= pos; ++j) {
        cur.push_back(mult[v * n + order[j]]);
        if (j < pos) cur.push_back(mult[order[j] * n + v]);
      }
      if (best.empty() || !std::lexicographical_compare(best.begin(), best.begin() + cur.size(), cur.begin(), cur.end())) {
        used[v] = 1;
        rec(pos + 1);
        used[v] = 0;
      }
      cur.resize(mark);
    }
  };
  rec(0);

  std::ostringstream os;
  os << n << ';' << m.edge_count() << ';';
  for (std::size_t i = 0; i < n; ++i) {
    const auto [in, out, loops] = sig(d, base[i]);
    (void)loops;
    os << (i ? "," : "") << in << '/' << out;
  }
  os << ';';
  for (std::size_t i = 0; i < best.size(); ++i) os << (i ? "," : "") << best[i];
  return os.str();
}

Distance sequence_distance(const std::vector<MDM>& s1, const std::vector<MDM>& s2, std::size_t k) {
  const MDM unit = MDM::loop_unit();
  double worst = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const MDM& a = i < s1.size() ? s1[i] : unit;
    const MDM& b = i < s2.size() ? s2[i] : unit;
    const Distance d = dg_distance(a, b);
    if (d.is_infinite()) return d;
    worst = std::max(worst, d.value());
  }
  return Distance::finite(worst);
}

}  // namespace dcm
