#include "dcm/degree_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace dcm {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double poisson_pmf(double lambda, int k) {
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
}

double geometric_pmf(double p, int k) { return p * std::pow(1.0 - p, k); }

// Mass deficit above which a truncated analytic family is rejected.
constexpr double max_tail_mass = 1e-6;

}  // namespace

void JointDegreeLaw::finalize() {
  std::map<DegreePair, double> merged;
  for (const auto& a : atoms_) {
    if (!(a.p >= 0.0) || a.p > 1.0 + tolerance_)
      throw Error(ErrorKind::invalid_argument, "probability outside [0,1]");
    if (a.degrees.in < 0 || a.degrees.out < 0) throw Error(ErrorKind::invalid_argument, "negative degree");
    if (a.p > 0.0) merged[a.degrees] += a.p;
  }
  if (merged.empty()) throw Error(ErrorKind::invalid_argument, "empty support");
  atoms_.clear();
  CompensatedSum mass;
  for (const auto& [d, p] : merged) {
    atoms_.push_back({d, p});
    mass.add(p);
  }
  const double deficit = std::abs(1.0 - mass.value());
  if (kind_ == LawKind::finite_table) {
    if (deficit > std::max(tolerance_, 1e-12) * 16)
      throw Error(ErrorKind::invalid_argument, "table mass differs from 1 by " + std::to_string(deficit));
  } else {
    if (deficit > max_tail_mass)
      throw Error(ErrorKind::divergent_tail, "truncation tail mass " + std::to_string(deficit) + " too large");
    tolerance_ += deficit;
  }
  for (auto& a : atoms_) a.p /= mass.value();
  std::vector<double> w;
  w.reserve(atoms_.size());
  for (const auto& a : atoms_) w.push_back(a.p);
  sampler_ = AliasTable(w);
}

JointDegreeLaw JointDegreeLaw::table(std::vector<Atom> atoms, double tolerance) {
  JointDegreeLaw law;
  law.kind_ = LawKind::finite_table;
  law.atoms_ = std::move(atoms);
  law.tolerance_ = tolerance;
  law.finalize();
  for (const auto& a : law.atoms_) law.truncation_ = std::max({law.truncation_, a.degrees.in, a.degrees.out});
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& a : law.atoms_) entries.push_back({a.degrees.in, a.degrees.out, a.p});
  law.source_ = {{"kind", "table"}, {"entries", entries}};
  return law;
}

JointDegreeLaw JointDegreeLaw::poisson_product(double lambda_in, double lambda_out, int cutoff) {
  if (lambda_in < 0 || lambda_out < 0 || cutoff < 0)
    throw Error(ErrorKind::invalid_argument, "poisson parameters must be nonnegative");
  JointDegreeLaw law;
  law.kind_ = LawKind::poisson_product;
  law.truncation_ = cutoff;
  for (int a = 0; a <= cutoff; ++a)
    for (int b = 0; b <= cutoff; ++b) law.atoms_.push_back({{a, b}, poisson_pmf(lambda_in, a) * poisson_pmf(lambda_out, b)});
  law.finalize();
  law.source_ = {{"kind", "poisson_product"}, {"lambda_minus", lambda_in}, {"lambda_plus", lambda_out}, {"cutoff", cutoff}};
  return law;
}

JointDegreeLaw JointDegreeLaw::geometric_product(double p_in, double p_out, int cutoff) {
  if (!(p_in > 0 && p_in <= 1 && p_out > 0 && p_out <= 1))
    throw Error(ErrorKind::invalid_argument, "geometric parameters must lie in (0,1]");
  JointDegreeLaw law;
  law.kind_ = LawKind::geometric_product;
  law.truncation_ = cutoff;
  for (int a = 0; a <= cutoff; ++a)
    for (int b = 0; b <= cutoff; ++b) law.atoms_.push_back({{a, b}, geometric_pmf(p_in, a) * geometric_pmf(p_out, b)});
  law.finalize();
  law.source_ = {{"kind", "geometric_product"}, {"p_minus", p_in}, {"p_plus", p_out}, {"cutoff", cutoff}};
  return law;
}

JointDegreeLaw JointDegreeLaw::custom(const std::function<double(int, int)>& pmf, int cutoff, double tolerance) {
  JointDegreeLaw law;
  law.kind_ = LawKind::custom_analytic;
  law.truncation_ = cutoff;
  law.tolerance_ = tolerance;
  for (int a = 0; a <= cutoff; ++a)
    for (int b = 0; b <= cutoff; ++b) law.atoms_.push_back({{a, b}, pmf(a, b)});
  law.finalize();
  law.source_ = {{"kind", "custom"}};
  return law;
}

JointDegreeLaw JointDegreeLaw::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int cutoff = j.value("cutoff", default_cutoff);
  if (kind == "table") {
    std::vector<Atom> atoms;
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 3) throw Error(ErrorKind::invalid_argument, "table entries are [in, out, p]");
      atoms.push_back({{e[0].get<int>(), e[1].get<int>()}, e[2].get<double>()});
    }
    return table(std::move(atoms), j.value("tolerance", default_tolerance));
  }
  if (kind == "poisson_product")
    return poisson_product(j.at("lambda_minus").get<double>(), j.at("lambda_plus").get<double>(), cutoff);
  if (kind == "geometric_product")
    return geometric_product(j.at("p_minus").get<double>(), j.at("p_plus").get<double>(), cutoff);
  throw Error(ErrorKind::invalid_argument, "unknown law kind '" + kind + "'");
}

nlohmann::json JointDegreeLaw::to_json() const { return source_; }

double JointDegreeLaw::prob(DegreePair d) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), d,
                             [](const Atom& a, const DegreePair& x) { return a.degrees < x; });
  return (it != atoms_.end() && it->degrees == d) ? it->p : 0.0;
}

double JointDegreeLaw::moment(int i, int j) const {
  CompensatedSum s;
  for (const auto& a : atoms_) s.add(a.p * ipow(a.degrees.in, i) * ipow(a.degrees.out, j));
  return s.value();
}

double JointDegreeLaw::positive_in_probability() const {
  CompensatedSum s;
  for (const auto& a : atoms_)
    if (a.degrees.in > 0) s.add(a.p);
  return s.value();
}

CriticalParams CriticalParams::from_base(double mu, double nu_minus, double sigma_minus, double sigma_plus,
                                         double sigma_minus_plus) {
  CriticalParams c;
  c.mu = mu;
  c.nu_minus = nu_minus;
  c.sigma_minus = sigma_minus;
  c.sigma_plus = sigma_plus;
  c.sigma_minus_plus = sigma_minus_plus;
  const double s = sigma_minus_plus + nu_minus;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  c.candidate_coeff = s / (mu * mu);
  if (sigma_plus > 0) {
    c.drift_coeff = s / (2 * sigma_plus * mu);
    c.cox_coeff = 2 * s / (sigma_plus * mu * mu);
    c.height_scale = 2 / sigma_plus;
  } else {
    c.drift_coeff = c.cox_coeff = c.height_scale = nan;
  }
  return c;
}

nlohmann::json CriticalParams::to_json() const {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"mu", mu},
          {"nu_minus", nu_minus},
          {"sigma_minus", num(sigma_minus)},
          {"sigma_plus", num(sigma_plus)},
          {"sigma_minus_plus", sigma_minus_plus},
          {"drift_coeff", num(drift_coeff)},
          {"cox_coeff", num(cox_coeff)},
          {"candidate_coeff", num(candidate_coeff)},
          {"height_scale", num(height_scale)}};
}

namespace {

// sqrt of a variance-type quantity; rounding noise below zero is clamped.
double safe_sqrt(double x) {
  if (x >= 0) return std::sqrt(x);
  if (x > -1e-12) return 0.0;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

CriticalParams compute_params(const JointDegreeLaw& law) {
  const double mu = law.moment(1, 0);
  const double mu_out = law.moment(0, 1);
  if (std::abs(mu - mu_out) > std::max(law.tolerance(), 1e-12) * std::max(1.0, mu) * 16)
    throw Error(ErrorKind::unequal_means, "E[D-] = " + std::to_string(mu) + " differs from E[D+] = " + std::to_string(mu_out));
  if (!(mu > 0)) throw Error(ErrorKind::invalid_argument, "mu must be positive");
  const double m20 = law.moment(2, 0), m30 = law.moment(3, 0);
  const double m12 = law.moment(1, 2), m21 = law.moment(2, 1);
  const double nu_minus = (m20 - mu) / mu;
  const double sigma_minus = safe_sqrt((mu * m30 - m20 * m20) / (mu * mu));
  const double sigma_plus = safe_sqrt((m12 - mu) / mu);
  const double sigma_minus_plus = (m21 - m20) / mu;
  return CriticalParams::from_base(mu, nu_minus, sigma_minus, sigma_plus, sigma_minus_plus);
}

bool check_criticality(const JointDegreeLaw& law, double tol) {
  return std::abs(law.moment(1, 1) - law.moment(1, 0)) <= tol;
}

JointDegreeLaw size_biased(const JointDegreeLaw& law) {
  const double mu = law.moment(1, 0);
  if (!(mu > 0)) throw Error(ErrorKind::invalid_argument, "size biasing needs mu > 0");
  std::vector<Atom> atoms;
  for (const auto& a : law.atoms())
    if (a.degrees.in > 0) atoms.push_back({a.degrees, a.degrees.in * a.p / mu});
  return JointDegreeLaw::table(std::move(atoms), std::max(law.tolerance(), 1e-12));
}

LatticeInfo difference_lattice(const JointDegreeLaw& law) {
  if (law.atoms().empty()) throw Error(ErrorKind::invalid_argument, "empty support");
  const long c = law.atoms().front().degrees.in - law.atoms().front().degrees.out;
  long g = 0;
  for (const auto& a : law.atoms()) g = std::gcd(g, static_cast<long>(a.degrees.in - a.degrees.out) - c);
  return {g, g == 1, c};
}

}  // namespace dcm
