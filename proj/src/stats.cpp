#include "dcm/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "dcm/common.hpp"

namespace dcm {

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::invalid_argument, "ks_statistic needs nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < x.size() || j < y.size()) {
    double t = (j == y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

MeanSe mean_se(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::invalid_argument, "mean_se needs a nonempty sample");
  long double s = 0;
  for (double v : x) s += v;
  long double n = static_cast<long double>(x.size());
  long double m = s / n;
  long double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  double se = x.size() > 1 ? static_cast<double>(std::sqrt(ss / (n - 1) / n)) : 0.0;
  return {static_cast<double>(m), se};
}

double median(std::vector<double> x) {
  if (x.empty()) throw Error(ErrorKind::invalid_argument, "median of an empty sample");
  std::sort(x.begin(), x.end());
  std::size_t k = x.size() / 2;
  return x.size() % 2 ? x[k] : 0.5 * (x[k - 1] + x[k]);
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

ChiSquare chi_square_two_sample(const std::map<std::string, std::uint64_t>& a,
                                const std::map<std::string, std::uint64_t>& b, double min_expected) {
  double na = 0, nb = 0;
  for (auto& [k, v] : a) na += static_cast<double>(v);
  for (auto& [k, v] : b) nb += static_cast<double>(v);
  if (na == 0 || nb == 0) throw Error(ErrorKind::invalid_argument, "empty count table");
  std::map<std::string, std::pair<double, double>> joint;
  for (auto& [k, v] : a) joint[k].first += static_cast<double>(v);
  for (auto& [k, v] : b) joint[k].second += static_cast<double>(v);
  double fa = na / (na + nb), fb = nb / (na + nb);
  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> pooled{0, 0};
  for (auto& [k, c] : joint) {
    double tot = c.first + c.second;
    if (tot * fa < min_expected || tot * fb < min_expected) {
      pooled.first += c.first;
      pooled.second += c.second;
    } else {
      bins.push_back(c);
    }
  }
  if (pooled.first + pooled.second > 0) bins.push_back(pooled);
  ChiSquare out;
  for (auto& [x, y] : bins) {
    double tot = x + y;
    double ea = tot * fa, eb = tot * fb;
    out.statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
  }
  out.dof = static_cast<double>(bins.size()) - 1;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

ChiSquare chi_square_goodness(const std::map<std::string, std::uint64_t>& counts,
                              const std::map<std::string, double>& probs, double min_expected) {
  double n = 0;
  for (auto& [k, v] : counts) n += static_cast<double>(v);
  if (n == 0) throw Error(ErrorKind::invalid_argument, "empty count table");
  for (auto& [k, v] : counts)
    if (!probs.contains(k)) throw Error(ErrorKind::invalid_argument, "observed key with zero probability: " + k);
  std::vector<std::pair<double, double>> bins;  // observed, expected
  std::pair<double, double> pooled{0, 0};
  for (auto& [k, p] : probs) {
    auto it = counts.find(k);
    double obs = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    if (n * p < min_expected) {
      pooled.first += obs;
      pooled.second += n * p;
    } else {
      bins.emplace_back(obs, n * p);
    }
  }
  if (pooled.second > 0) bins.push_back(pooled);
  ChiSquare out;
  for (auto& [o, e] : bins) out.statistic += (o - e) * (o - e) / e;
  out.dof = static_cast<double>(bins.size()) - 1;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

}  // namespace dcm
