#include "dcm/graph_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dcm {

ConditionedDegrees sample_conditioned_degrees(const JointDegreeLaw& law, std::size_t n, std::uint64_t seed,
                                              std::uint64_t max_attempts) {
  const LatticeInfo lat = difference_lattice(law);
  const long shift = static_cast<long>(n) * lat.offset;
  if (lat.period == 0 ? shift != 0 : shift % lat.period != 0) {
    std::ostringstream msg;
    msg << "incompatible period: sum of (d- - d+) lies in " << shift << " + " << lat.period << "Z, never 0 for n = " << n;
    throw Error(ErrorKind::incompatible_period, msg.str());
  }

  const auto& atoms = law.atoms();
  std::vector<int> diff(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) diff[i] = atoms[i].degrees.in - atoms[i].degrees.out;

  // Atom counts are multinomial; a uniform shuffle of the accepted counts gives iid atoms given delta = 0.
  std::vector<std::size_t> order(atoms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return atoms[x].p > atoms[y].p; });
  std::vector<double> tail(order.size() + 1, 0.0);
  for (std::size_t i = order.size(); i-- > 0;) tail[i] = tail[i + 1] + atoms[order[i]].p;

  std::vector<std::uint64_t> count(order.size());
  for (std::uint64_t a = 0; a < max_attempts; ++a) {
    Rng rng = make_rng(derive_seed(seed, {a}));
    std::uint64_t left = n;
    long delta = 0;
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < order.size() && left > 0; ++i) {
      std::uint64_t c = left;
      if (i + 1 < order.size()) {
        const double q = std::min(1.0, atoms[order[i]].p / tail[i]);
        c = std::binomial_distribution<std::uint64_t>(left, q)(rng);
      }
      count[i] = c;
      left -= c;
      delta += static_cast<long>(c) * diff[order[i]];
    }
    if (delta != 0) continue;
    std::vector<std::uint32_t> idx;
    idx.reserve(n);
    for (std::size_t i = 0; i < order.size(); ++i) idx.insert(idx.end(), count[i], static_cast<std::uint32_t>(order[i]));
    std::shuffle(idx.begin(), idx.end(), rng);
    ConditionedDegrees out;
    out.attempts = a + 1;
    auto& s = out.degrees;
    s.n = n;
    s.d_minus.resize(n);
    s.d_plus.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      s.d_minus[v] = atoms[idx[v]].degrees.in;
      s.d_plus[v] = atoms[idx[v]].degrees.out;
      s.total += s.d_minus[v];
    }
    return out;
  }
  std::ostringstream msg;
  msg << "degree conditioning: " << max_attempts << " attempts exhausted (observed acceptance rate 0/" << max_attempts
      << ")";
  throw Error(ErrorKind::attempts_exhausted, msg.str());
}

Digraph pair_configuration(const DegreeSequence& seq, std::uint64_t seed) {
  std::int64_t in = 0, out = 0;
  for (std::size_t v = 0; v < seq.n; ++v) {
    in += seq.d_minus[v];
    out += seq.d_plus[v];
  }
  if (in != out) throw Error(ErrorKind::unbalanced_sequence, "pairing needs sum d- = sum d+");

  struct Slot {
    Vertex v;
    int j;
  };
  std::vector<Slot> in_slots;
  in_slots.reserve(static_cast<std::size_t>(in));
  for (std::size_t v = 0; v < seq.n; ++v)
    for (int j = 0; j < seq.d_minus[v]; ++j) in_slots.push_back({static_cast<Vertex>(v), j});
  Rng rng = make_rng(seed);
  std::shuffle(in_slots.begin(), in_slots.end(), rng);

  Digraph g(seq.n);
  std::size_t next = 0;
  for (std::size_t v = 0; v < seq.n; ++v)
    for (int j = 0; j < seq.d_plus[v]; ++j) {
      const Slot s = in_slots[next++];
      g.add_edge({static_cast<Vertex>(v), s.v, j, s.j});
    }
  g.finalize();
  return g;
}

AnomalousCounts count_anomalous(const Digraph& g) {
  AnomalousCounts c;
  std::vector<std::pair<Vertex, Vertex>> pairs;
  pairs.reserve(g.m());
  for (const auto& e : g.edges()) {
    if (e.tail == e.head) ++c.self_loops;
    pairs.emplace_back(e.tail, e.head);
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
    const std::uint64_t k = j - i;
    c.parallel_pairs += k * (k - 1) / 2;
    i = j;
  }
  return c;
}

SimpleSample sample_simple(const JointDegreeLaw& law, std::size_t n, std::uint64_t seed, std::uint64_t budget,
                           std::uint64_t degree_attempts) {
  for (std::uint64_t a = 0; a < budget; ++a) {
    const auto deg = sample_conditioned_degrees(law, n, derive_seed(seed, {a, 0}), degree_attempts);
    Digraph g = pair_configuration(deg.degrees, derive_seed(seed, {a, 1}));
    if (count_anomalous(g).simple()) return {std::move(g), a + 1};
  }
  throw Error(ErrorKind::attempts_exhausted,
              "simple rejection: budget of " + std::to_string(budget) + " pairings exhausted");
}

Digraph directed_er_sample(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_argument, "edge probability outside [0,1]");
  Digraph g(n);
  if (n < 2 || p == 0.0) {
    g.finalize();
    return g;
  }
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1);
  std::vector<int> out_used(n, 0), in_used(n, 0);
  auto add = [&](std::uint64_t idx) {
    const auto u = static_cast<Vertex>(idx / (n - 1));
    auto v = static_cast<Vertex>(idx % (n - 1));
    if (v >= u) ++v;
    g.add_edge({u, v, out_used[u]++, in_used[v]++});
  };
  if (p == 1.0) {
    for (std::uint64_t i = 0; i < pairs; ++i) add(i);
  } else {
    Rng rng = make_rng(seed);
    std::geometric_distribution<std::uint64_t> gap(p);
    std::uint64_t idx = gap(rng);
    while (idx < pairs) {
      add(idx);
      const std::uint64_t skip = gap(rng);
      if (skip >= pairs - idx) break;
      idx += skip + 1;
    }
  }
  g.finalize();
  return g;
}

}  // namespace dcm
