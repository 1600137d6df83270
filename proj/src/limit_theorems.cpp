#include "dcm/limit_theorems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dcm/common.hpp"

namespace dcm {

namespace {

long floor_mod(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

// Extended gcd: returns g = gcd(a, b) >= 0 and u, v with u a + v b = g.
long ext_gcd(long a, long b, long& u, long& v) {
  long old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    long q = old_r / r;
    long tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  u = old_s;
  v = old_t;
  return old_r;
}

// HNF of the Z-span of `vecs`; throws `kind` when the span is not full rank.
IntLattice2 span_hnf(const std::vector<std::array<long, 2>>& vecs, ErrorKind kind, const char* what) {
  // g: a lattice vector whose second coordinate is the gcd of all second coordinates.
  std::array<long, 2> g{0, 0};
  for (const auto& w : vecs) {
    long u = 0, v = 0;
    long c = ext_gcd(g[1], w[1], u, v);
    g = {u * g[0] + v * w[0], c};
  }
  long c = g[1];
  if (c == 0) throw Error(kind, what);
  long a = 0;
  for (const auto& w : vecs) a = std::gcd(a, w[0] - (w[1] / c) * g[0]);
  if (a == 0) throw Error(kind, what);
  IntLattice2 out;
  out.generator = {{{a, 0}, {floor_mod(g[0], a), c}}};
  out.det = a * c;
  return out;
}

struct Pmf1 {
  long lo = 0;
  std::vector<long double> p;
};

Pmf1 convolve(const Pmf1& a, const Pmf1& b) {
  Pmf1 out;
  out.lo = a.lo + b.lo;
  out.p.assign(a.p.size() + b.p.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    if (a.p[i] == 0) continue;
    for (std::size_t j = 0; j < b.p.size(); ++j) out.p[i + j] += a.p[i] * b.p[j];
  }
  return out;
}

// Dense 2-d pmf on [lo0, lo0 + n0) x [lo1, lo1 + n1).
struct Pmf2 {
  long lo0 = 0, lo1 = 0;
  std::size_t n0 = 0, n1 = 0;
  std::vector<long double> p;
  long double& at(std::size_t i, std::size_t j) { return p[i * n1 + j]; }
  long double at(std::size_t i, std::size_t j) const { return p[i * n1 + j]; }
};

Pmf2 convolve(const Pmf2& a, const Pmf2& b) {
  Pmf2 out;
  out.lo0 = a.lo0 + b.lo0;
  out.lo1 = a.lo1 + b.lo1;
  out.n0 = a.n0 + b.n0 - 1;
  out.n1 = a.n1 + b.n1 - 1;
  out.p.assign(out.n0 * out.n1, 0.0L);
  for (std::size_t i = 0; i < a.n0; ++i)
    for (std::size_t j = 0; j < a.n1; ++j) {
      long double x = a.at(i, j);
      if (x == 0) continue;
      for (std::size_t k = 0; k < b.n0; ++k)
        for (std::size_t l = 0; l < b.n1; ++l) out.at(i + k, j + l) += x * b.at(k, l);
    }
  return out;
}

template <class P>
P power(const P& base, std::size_t n, const P& unit) {
  P acc = unit;
  for (std::size_t i = 0; i < n; ++i) acc = convolve(acc, base);
  return acc;
}

// Single-step joint law of (f(D), g(D)) for integer-valued f, g.
template <class F, class G>
Pmf2 step_pmf2(const JointDegreeLaw& law, F f, G g) {
  long lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0;
  bool first = true;
  for (const auto& a : law.atoms()) {
    long x = f(a.degrees), y = g(a.degrees);
    if (first) {
      lo0 = hi0 = x;
      lo1 = hi1 = y;
      first = false;
    }
    lo0 = std::min(lo0, x);
    hi0 = std::max(hi0, x);
    lo1 = std::min(lo1, y);
    hi1 = std::max(hi1, y);
  }
  Pmf2 out;
  out.lo0 = lo0;
  out.lo1 = lo1;
  out.n0 = static_cast<std::size_t>(hi0 - lo0 + 1);
  out.n1 = static_cast<std::size_t>(hi1 - lo1 + 1);
  out.p.assign(out.n0 * out.n1, 0.0L);
  for (const auto& a : law.atoms())
    out.at(static_cast<std::size_t>(f(a.degrees) - lo0), static_cast<std::size_t>(g(a.degrees) - lo1)) += a.p;
  return out;
}

Pmf2 unit2() {
  Pmf2 u;
  u.n0 = u.n1 = 1;
  u.p = {1.0L};
  return u;
}

void require_prefix(std::span<const DegreePair> prefix, std::size_t n) {
  if (prefix.size() > n) throw Error(ErrorKind::precondition, "prefix longer than n");
  for (const auto& d : prefix)
    if (d.in < 1) throw Error(ErrorKind::precondition, "prefix entry with zero in-degree");
}

// prod_i (n-i+1) mu / (sum_{j>=i} k_j^- + xi), i = 1..m.
long double phi_weight(std::span<const DegreePair> prefix, std::size_t n, double mu, long xi) {
  long double w = 1.0L;
  long tail = xi;
  for (std::size_t i = prefix.size(); i-- > 0;) {
    tail += prefix[i].in;
    w *= static_cast<long double>(n - i) * mu / static_cast<long double>(tail);
  }
  return w;
}

long prefix_target(std::span<const DegreePair> prefix) {
  long t = 0;
  for (const auto& d : prefix) t += d.out - d.in;
  return t;
}

}  // namespace

bool IntLattice2::contains(long x, long y) const {
  long c = generator[1][1], a = generator[0][0], b = generator[1][0];
  if (c == 0 || a == 0 || y % c != 0) return false;
  return floor_mod(x - (y / c) * b, a) == 0;
}

IntLattice2 hermite_normal_form(const IntMatrix2& a) {
  if (a[0][0] * a[1][1] - a[0][1] * a[1][0] == 0) throw Error(ErrorKind::degenerate, "singular matrix");
  return span_hnf({a[0], a[1]}, ErrorKind::degenerate, "singular matrix");
}

IntLattice2 main_lattice(const std::vector<std::array<long, 2>>& points) {
  if (points.size() < 3) throw Error(ErrorKind::degenerate, "support has fewer than three points");
  std::vector<std::array<long, 2>> diffs;
  for (std::size_t i = 1; i < points.size(); ++i)
    diffs.push_back({points[i][0] - points[0][0], points[i][1] - points[0][1]});
  bool independent = false;
  for (std::size_t i = 0; i < diffs.size() && !independent; ++i)
    for (std::size_t j = i + 1; j < diffs.size(); ++j)
      if (diffs[i][0] * diffs[j][1] - diffs[i][1] * diffs[j][0] != 0) {
        independent = true;
        break;
      }
  if (!independent) throw Error(ErrorKind::degenerate, "collinear support");
  return span_hnf(diffs, ErrorKind::degenerate, "collinear support");
}

long double SumPmf::at(long y) const {
  if (y < min_value || y > max_value()) return 0.0L;
  return p[static_cast<std::size_t>(y - min_value)];
}

SumPmf exact_sum_pmf(const JointDegreeLaw& law, std::size_t n, long window) {
  Pmf1 step;
  long lo = 0, hi = 0;
  bool first = true;
  for (const auto& a : law.atoms()) {
    long x = a.degrees.in - a.degrees.out;
    if (first) lo = hi = x, first = false;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (window >= 0 && static_cast<long>(n) * std::max(-lo, hi) > window)
    throw Error(ErrorKind::truncated, "support of Delta_n exceeds the window");
  step.lo = lo;
  step.p.assign(static_cast<std::size_t>(hi - lo + 1), 0.0L);
  for (const auto& a : law.atoms()) step.p[static_cast<std::size_t>(a.degrees.in - a.degrees.out - lo)] += a.p;
  Pmf1 acc{0, {1.0L}};
  for (std::size_t i = 0; i < n; ++i) acc = convolve(acc, step);
  return SumPmf{acc.lo, std::move(acc.p)};
}

long double JointSumPmf::at(long delta, long xi) const {
  if (delta < delta_min || delta >= delta_min + static_cast<long>(delta_count) || xi < 0 || xi > xi_max) return 0.0L;
  return p[static_cast<std::size_t>(delta - delta_min) * static_cast<std::size_t>(xi_max + 1) +
           static_cast<std::size_t>(xi)];
}

JointSumPmf exact_joint_sum_pmf(const JointDegreeLaw& law, std::size_t n) {
  auto step = step_pmf2(
      law, [](DegreePair d) { return long{d.in} - d.out; }, [](DegreePair d) { return long{d.in}; });
  Pmf2 acc = power(step, n, unit2());
  // Xi- starts at lo1 * n >= 0; re-anchor to 0.
  JointSumPmf out;
  out.delta_min = acc.lo0;
  out.delta_count = acc.n0;
  out.xi_max = acc.lo1 + static_cast<long>(acc.n1) - 1;
  std::size_t width = static_cast<std::size_t>(out.xi_max + 1);
  out.p.assign(acc.n0 * width, 0.0L);
  for (std::size_t i = 0; i < acc.n0; ++i)
    for (std::size_t j = 0; j < acc.n1; ++j) out.p[i * width + j + static_cast<std::size_t>(acc.lo1)] = acc.at(i, j);
  return out;
}

double llt_prediction(std::size_t n, long det, double variance, double offset) {
  if (!(variance > 0)) throw Error(ErrorKind::invalid_argument, "variance must be positive");
  double nn = static_cast<double>(n);
  double x = offset / std::sqrt(nn);
  return static_cast<double>(det) / std::sqrt(nn) * std::exp(-x * x / (2 * variance)) /
         std::sqrt(2 * std::numbers::pi * variance);
}

double llt_prediction(std::size_t n, const IntLattice2& lattice, const std::array<std::array<double, 2>, 2>& cov,
                      std::array<double, 2> offset) {
  double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
  if (!(cov[0][0] > 0) || !(det > 0) || cov[0][1] != cov[1][0])
    throw Error(ErrorKind::invalid_argument, "covariance not positive definite");
  double nn = static_cast<double>(n);
  double x0 = offset[0] / std::sqrt(nn), x1 = offset[1] / std::sqrt(nn);
  double q = (cov[1][1] * x0 * x0 - 2 * cov[0][1] * x0 * x1 + cov[0][0] * x1 * x1) / det;
  double f = std::exp(-q / 2) / (2 * std::numbers::pi * std::sqrt(det));
  return static_cast<double>(lattice.det) / nn * f;
}

double psi_r(std::span<const DegreePair> degrees, double p, double mu) {
  if (!(p > 0 && p <= 1)) throw Error(ErrorKind::invalid_argument, "p must lie in (0, 1]");
  long double w = 1.0L;
  long tail = 0;
  std::size_t r = degrees.size();
  for (std::size_t i = r; i-- > 0;) {
    if (degrees[i].in < 1) throw Error(ErrorKind::precondition, "zero in-degree entry");
    tail += degrees[i].in;
    w *= static_cast<long double>(r - i) * mu / (static_cast<long double>(tail) * p);
  }
  return static_cast<double>(w);
}

long double reorder_normalizer(const JointDegreeLaw& law, std::size_t n, std::size_t m) {
  auto step = step_pmf2(
      law, [](DegreePair d) { return long{d.in > 0}; }, [](DegreePair d) { return long{d.in} - d.out; });
  Pmf2 acc = power(step, n, unit2());
  long zero = -acc.lo1;
  if (zero < 0 || zero >= static_cast<long>(acc.n1)) return 0.0L;
  long double total = 0.0L;
  for (std::size_t i = 0; i < acc.n0; ++i)
    if (acc.lo0 + static_cast<long>(i) >= static_cast<long>(m)) total += acc.at(i, static_cast<std::size_t>(zero));
  return total;
}

MeasureChangeValue phi_nm_exact(const JointDegreeLaw& law, std::span<const DegreePair> prefix, std::size_t n) {
  require_prefix(prefix, n);
  long double norm = reorder_normalizer(law, n, prefix.size());
  if (norm <= 0) throw Error(ErrorKind::precondition, "zero-probability normalizer");
  double mu = law.moment(1, 0);
  auto joint = exact_joint_sum_pmf(law, n - prefix.size());
  long target = prefix_target(prefix);
  long double acc = 0.0L;
  for (long xi = 0; xi <= joint.xi_max; ++xi) {
    long double pr = joint.at(target, xi);
    if (pr == 0) continue;
    acc += pr * phi_weight(prefix, n, mu, xi);
  }
  return {static_cast<double>(acc / norm), std::nullopt};
}

MeasureChangeValue phi_nm_estimate(const JointDegreeLaw& law, std::span<const DegreePair> prefix, std::size_t n,
                                   std::uint64_t mc_budget, std::uint64_t seed) {
  require_prefix(prefix, n);
  if (mc_budget < 2) throw Error(ErrorKind::invalid_argument, "mc_budget must be at least 2");
  long double norm = reorder_normalizer(law, n, prefix.size());
  if (norm <= 0) throw Error(ErrorKind::precondition, "zero-probability normalizer");
  double mu = law.moment(1, 0);
  long target = prefix_target(prefix);
  std::size_t rest = n - prefix.size();
  Rng rng = make_rng(seed);
  long double sum = 0, sum2 = 0;
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < mc_budget; ++t) {
    long delta = 0, xi = 0;
    for (std::size_t i = 0; i < rest; ++i) {
      DegreePair d = law.sample(rng);
      delta += d.in - d.out;
      xi += d.in;
    }
    if (delta != target) continue;
    ++hits;
    long double w = phi_weight(prefix, n, mu, xi);
    sum += w;
    sum2 += w * w;
  }
  if (hits == 0) throw Error(ErrorKind::precondition, "indicator event never observed within the budget");
  long double b = static_cast<long double>(mc_budget);
  long double mean = sum / b;
  long double var = (sum2 / b - mean * mean) * b / (b - 1);
  if (var < 0) var = 0;
  return {static_cast<double>(mean / norm), static_cast<double>(std::sqrt(var / b) / norm)};
}

TiltedModel tilted_expansion(const JointDegreeLaw& law, double theta) {
  if (!(theta >= 0)) throw Error(ErrorKind::invalid_argument, "theta must be nonnegative");
  long double th = theta;
  long double mu = 0, mu_out = 0;
  for (const auto& a : law.atoms()) {
    mu += a.p * static_cast<long double>(a.degrees.in);
    mu_out += a.p * static_cast<long double>(a.degrees.out);
  }
  long double m2 = 0, m3 = 0, cov = 0;
  long double lap_m1 = 0, w_in = 0, w_out = 0, z0 = 0;
  for (const auto& a : law.atoms()) {
    long double d = static_cast<long double>(a.degrees.in) - mu;
    m2 += a.p * d * d;
    m3 += a.p * d * d * d;
    cov += a.p * d * (static_cast<long double>(a.degrees.out) - mu_out);
    long double e = std::expm1(-th * a.degrees.in);
    lap_m1 += a.p * e;
    w_in += a.p * (e + 1) * a.degrees.in;
    w_out += a.p * (e + 1) * a.degrees.out;
    if (a.degrees.in == 0) z0 += a.p;
  }
  long double alpha = std::log1p(lap_m1);
  long double series = -mu * th + m2 * th * th / 2 - m3 * th * th * th / 6;
  TiltedModel out;
  out.theta = theta;
  out.alpha = static_cast<double>(alpha);
  out.mean_in = static_cast<double>(w_in / (lap_m1 + 1));
  out.mean_out = static_cast<double>(w_out / (lap_m1 + 1));
  out.alpha_series = static_cast<double>(series);
  out.alpha_remainder = static_cast<double>(alpha - series);
  out.mean_in_series = static_cast<double>(mu - m2 * th);
  out.mean_out_series = static_cast<double>(mu_out - cov * th);
  if (z0 > 0) {
    std::vector<std::pair<int, double>> law0;
    for (const auto& a : law.atoms())
      if (a.degrees.in == 0) law0.emplace_back(a.degrees.out, static_cast<double>(a.p / z0));
    std::sort(law0.begin(), law0.end());
    out.zero_in_out_law = std::move(law0);
  }
  return out;
}

namespace {

struct PrefixWalk {
  std::vector<double> s_minus, s_plus;  // index 0..m
};

PrefixWalk prefix_walk(const JointDegreeLaw& law, std::span<const DegreePair> prefix) {
  double mu = law.moment(1, 0);
  double lam_minus = law.moment(2, 0) / mu;
  double lam_plus = law.moment(1, 1) / mu;
  PrefixWalk w;
  w.s_minus.assign(prefix.size() + 1, 0.0);
  w.s_plus.assign(prefix.size() + 1, 0.0);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    w.s_minus[i + 1] = w.s_minus[i] + prefix[i].in - lam_minus;
    w.s_plus[i + 1] = w.s_plus[i] + prefix[i].out - lam_plus;
  }
  return w;
}

}  // namespace

bool gamma_admissible(const JointDegreeLaw& law, std::span<const DegreePair> prefix, double eps) {
  if (!(eps > 0 && eps < 1.0 / 6)) throw Error(ErrorKind::invalid_argument, "eps must lie in (0, 1/6)");
  auto w = prefix_walk(law, prefix);
  double bound = std::pow(static_cast<double>(prefix.size()), 0.5 + eps);
  for (std::size_t i = 0; i < w.s_minus.size(); ++i)
    if (std::abs(w.s_minus[i]) > bound + 1e-12 || std::abs(w.s_plus[i]) > bound + 1e-12) return false;
  return true;
}

double gamma_lower_bound(const JointDegreeLaw& law, std::span<const DegreePair> prefix, std::size_t n,
                         double eps) {
  if (prefix.empty()) return 1.0;
  if (!gamma_admissible(law, prefix, eps)) throw Error(ErrorKind::precondition, "prefix violates admissibility");
  auto params = compute_params(law);
  auto w = prefix_walk(law, prefix);
  double m = static_cast<double>(prefix.size());
  double nn = static_cast<double>(n);
  double sm = w.s_minus.back();
  double acc = 0;
  for (double s : w.s_minus) acc += s - sm;
  double drift = params.sigma_minus * params.sigma_minus / (6 * params.mu * params.mu) * m * m * m / (nn * nn);
  return std::exp(acc / (params.mu * nn) - drift);
}

double phi_limit_sample(const CriticalParams& params, double T, double dt, std::uint64_t seed) {
  if (!(T >= 0) || !(dt > 0)) throw Error(ErrorKind::invalid_argument, "need T >= 0 and dt > 0");
  if (params.sigma_minus == 0) return 1.0;
  auto steps = static_cast<std::size_t>(std::llround(T / dt));
  double h = steps ? T / static_cast<double>(steps) : 0.0;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(h));
  double integral = 0;
  for (std::size_t i = 0; i < steps; ++i) integral += (static_cast<double>(i) + 0.5) * h * normal(rng);
  double a = params.sigma_minus / params.mu;
  return std::exp(-a * integral - a * a * T * T * T / 6);
}

}  // namespace dcm
