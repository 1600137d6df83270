#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcm/alias.hpp"

namespace dcm {

struct DegreePair {
  int in = 0;
  int out = 0;
  friend bool operator==(const DegreePair&, const DegreePair&) = default;
  friend auto operator<=>(const DegreePair&, const DegreePair&) = default;
};

struct Atom {
  DegreePair degrees;
  double p = 0.0;
};

enum class LawKind { finite_table, poisson_product, geometric_product, custom_analytic };

// Joint law of (D-, D+). Analytic families are stored truncated at `truncation`
// in each coordinate and renormalized; the discarded mass is added to `tolerance`.
class JointDegreeLaw {
 public:
  static constexpr int default_cutoff = 64;
  static constexpr double default_tolerance = 1e-12;

  static JointDegreeLaw table(std::vector<Atom> atoms, double tolerance = default_tolerance);
  static JointDegreeLaw poisson_product(double lambda_in, double lambda_out, int cutoff = default_cutoff);
  // P(D = k) = p (1-p)^k in each coordinate, independent.
  static JointDegreeLaw geometric_product(double p_in, double p_out, int cutoff = default_cutoff);
  static JointDegreeLaw custom(const std::function<double(int, int)>& pmf, int cutoff,
                               double tolerance = default_tolerance);

  static JointDegreeLaw from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  LawKind kind() const { return kind_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  int truncation() const { return truncation_; }
  double tolerance() const { return tolerance_; }
  double prob(DegreePair d) const;

  // E[(D-)^i (D+)^j], compensated summation.
  double moment(int i, int j) const;
  double positive_in_probability() const;

  std::size_t sample_index(Rng& rng) const { return sampler_.sample(rng); }
  DegreePair sample(Rng& rng) const { return atoms_[sampler_.sample(rng)].degrees; }

 private:
  void finalize();

  LawKind kind_ = LawKind::finite_table;
  std::vector<Atom> atoms_;
  int truncation_ = 0;
  double tolerance_ = default_tolerance;
  nlohmann::json source_;
  AliasTable sampler_;
};

struct CriticalParams {
  double mu = 0;
  double nu_minus = 0;
  double sigma_minus = 0;
  double sigma_plus = 0;
  double sigma_minus_plus = 0;
  // NaN when sigma_plus == 0 (no Brownian limit).
  double drift_coeff = 0;
  double cox_coeff = 0;
  double candidate_coeff = 0;
  double height_scale = 0;

  bool has_continuum_limit() const { return sigma_plus > 0; }
  // Builds the derived coefficients from the five base parameters.
  static CriticalParams from_base(double mu, double nu_minus, double sigma_minus, double sigma_plus,
                                  double sigma_minus_plus);
  nlohmann::json to_json() const;
};

CriticalParams compute_params(const JointDegreeLaw& law);
bool check_criticality(const JointDegreeLaw& law, double tol);
// Law of Z: k- P(D = k)/mu, zero in-degree atoms removed.
JointDegreeLaw size_biased(const JointDegreeLaw& law);

struct LatticeInfo {
  long period = 0;  // 0 for a point mass
  bool strongly_aperiodic = false;
  long offset = 0;  // any support point c, support within c + period Z
};
LatticeInfo difference_lattice(const JointDegreeLaw& law);

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace dcm
