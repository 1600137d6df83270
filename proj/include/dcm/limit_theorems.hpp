#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dcm/degree_law.hpp"

namespace dcm {

using IntMatrix2 = std::array<std::array<long, 2>, 2>;

// Lattice generated by the rows of a lower-triangular Hermite form
// [[a, 0], [b, c]] with a, c > 0 and 0 <= b < a.
struct IntLattice2 {
  IntMatrix2 generator{};
  long det = 0;
  bool contains(long x, long y) const;
};

IntLattice2 hermite_normal_form(const IntMatrix2& a);
IntLattice2 main_lattice(const std::vector<std::array<long, 2>>& points);

// pmf of Delta_n = sum (D- - D+) on [min_value, min_value + p.size()).
struct SumPmf {
  long min_value = 0;
  std::vector<long double> p;
  long double at(long y) const;
  long max_value() const { return min_value + static_cast<long>(p.size()) - 1; }
};
// Exact n-fold convolution in extended precision. `window` bounds |Delta_n| (negative: none).
SumPmf exact_sum_pmf(const JointDegreeLaw& law, std::size_t n, long window = -1);

// Joint pmf of (Delta_n, Xi-_n) on a dense grid.
struct JointSumPmf {
  long delta_min = 0;
  long xi_max = 0;
  std::size_t delta_count = 0;
  std::vector<long double> p;  // index (delta - delta_min) * (xi_max + 1) + xi
  long double at(long delta, long xi) const;
};
JointSumPmf exact_joint_sum_pmf(const JointDegreeLaw& law, std::size_t n);

// Univariate: lattice spacing `det`, variance sigma^2, offset y - n * mean.
double llt_prediction(std::size_t n, long det, double variance, double offset);
double llt_prediction(std::size_t n, const IntLattice2& lattice, const std::array<std::array<double, 2>, 2>& cov,
                      std::array<double, 2> offset);

double psi_r(std::span<const DegreePair> degrees, double p, double mu);

struct MeasureChangeValue {
  double value = 0;
  std::optional<double> mc_std_error;
};
// P(R_n >= m, Delta_n = 0) by exact convolution.
long double reorder_normalizer(const JointDegreeLaw& law, std::size_t n, std::size_t m);
MeasureChangeValue phi_nm_exact(const JointDegreeLaw& law, std::span<const DegreePair> prefix, std::size_t n);
MeasureChangeValue phi_nm_estimate(const JointDegreeLaw& law, std::span<const DegreePair> prefix, std::size_t n,
                                   std::uint64_t mc_budget, std::uint64_t seed);

struct TiltedModel {
  double theta = 0;
  double alpha = 0;
  double mean_in = 0;
  double mean_out = 0;
  double alpha_series = 0;     // -mu t + Var t^2 / 2 - E[(D- - mu)^3] t^3 / 6
  double mean_in_series = 0;   // mu - Var(D-) t
  double mean_out_series = 0;  // mu - Cov(D-, D+) t
  double alpha_remainder = 0;  // alpha - alpha_series, evaluated in extended precision
  std::vector<std::pair<int, double>> zero_in_out_law;  // law of D+ given D- = 0
};
TiltedModel tilted_expansion(const JointDegreeLaw& law, double theta);

// s^{+-}(i) = sum_{j<=i} (k_j^{+-} - lambda_{+-}), lambda = E[Z].
bool gamma_admissible(const JointDegreeLaw& law, std::span<const DegreePair> prefix, double eps = 0.1);
double gamma_lower_bound(const JointDegreeLaw& law, std::span<const DegreePair> prefix, std::size_t n,
                         double eps = 0.1);

double phi_limit_sample(const CriticalParams& params, double T, double dt, std::uint64_t seed);

}  // namespace dcm
