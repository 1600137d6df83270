#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dcm {

// Sup distance between the empirical CDFs of a and b.
double ks_statistic(std::span<const double> a, std::span<const double> b);

struct MeanSe {
  double mean = 0;
  double se = 0;
};
MeanSe mean_se(std::span<const double> x);
double median(std::vector<double> x);

struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};
// Homogeneity test of two count tables over the union of their keys. Keys whose pooled
// expected count is below `min_expected` in either sample are merged into one bin.
ChiSquare chi_square_two_sample(const std::map<std::string, std::uint64_t>& a,
                                const std::map<std::string, std::uint64_t>& b, double min_expected = 5.0);
// Goodness of fit of counts against probabilities (same keys), with the same binning rule.
ChiSquare chi_square_goodness(const std::map<std::string, std::uint64_t>& counts,
                              const std::map<std::string, double>& probs, double min_expected = 5.0);
double chi_square_sf(double statistic, double dof);

}  // namespace dcm
