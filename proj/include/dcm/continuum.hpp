#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcm/degree_law.hpp"
#include "dcm/mdm.hpp"

namespace dcm {

// Grid path on t_i = i dt, i = 0..N.
struct PathGrid {
  double dt = 0;
  double horizon_T = 0;
  double drift_coeff = 0;
  std::vector<double> brownian;  // B(t_i)
  std::vector<double> b_hat;     // B(t_i) - drift_coeff t_i^2
  std::vector<double> run_min;
  std::vector<double> r_hat;
  std::size_t steps() const { return b_hat.size() - 1; }
};

PathGrid bhat_from_increments(double drift_coeff, double dt, std::span<const double> increments);
PathGrid simulate_bhat(const CriticalParams& params, double T, double dt, std::uint64_t seed);
// Halves dt by inserting Brownian bridge midpoints; the coarse path is a subsequence.
PathGrid refine_path(const PathGrid& path, std::uint64_t seed);

enum class Thinning {
  bernoulli,         // one Bernoulli(lambda dt) per cell; lambda dt > 0.5 is an error
  integrated_hazard  // arrivals where the grid-integrated intensity crosses Exp(1) thresholds
};

// Points of an inhomogeneous Poisson process on cells (t_{i-1}, t_i], intensity[i] for
// i = 1..N (intensity[0] unused); returns the indices i of cells holding a point.
std::vector<std::size_t> sample_poisson_cells(std::span<const double> intensity, double dt, std::uint64_t seed,
                                              Thinning thinning = Thinning::bernoulli);
std::vector<std::size_t> sample_cox(const PathGrid& path, const CriticalParams& params, std::uint64_t seed,
                                    Thinning thinning = Thinning::bernoulli);

struct GridExcursion {
  std::size_t l = 0;
  std::size_t sigma = 0;
  bool truncated = false;
  friend bool operator==(const GridExcursion&, const GridExcursion&) = default;
};
GridExcursion locate_excursion(const PathGrid& path, std::size_t x);

// Real tree coded by f = height_scale * r_hat on [l, l + sigma]; grid indices are global.
class ExcursionTree {
 public:
  ExcursionTree(const PathGrid& path, const GridExcursion& exc, double height_scale);
  std::size_t begin() const { return l_; }
  std::size_t end() const { return l_ + f_.size() - 1; }  // inclusive
  double dt() const { return dt_; }
  double f(std::size_t i) const { return f_[check(i) - l_]; }
  double min(std::size_t a, std::size_t b) const;  // min of f over [a, b] (any order)
  double distance(std::size_t s, std::size_t t) const;

 private:
  std::size_t check(std::size_t i) const;
  std::size_t l_;
  double dt_;
  std::vector<double> f_;
  std::vector<std::vector<double>> sparse_;
};

double tree_distance(const ExcursionTree& tree, std::size_t s, std::size_t t);
// Length of the subtree spanned by the root and sorted marks.
double marked_tree_length(const ExcursionTree& tree, std::span<const std::size_t> marks);

struct TreePoint {
  std::size_t base = 0;  // grid index whose root path holds the point
  double height = 0;     // distance from the root along that path
};

struct CandidateOptions {
  Thinning thinning = Thinning::bernoulli;
  std::size_t cap = 10'000;
};
std::vector<std::size_t> sample_continuum_candidates(const ExcursionTree& tree, const CriticalParams& params,
                                                     std::size_t first, std::uint64_t seed,
                                                     const CandidateOptions& opt = {});
std::vector<TreePoint> sample_continuum_heads(const ExcursionTree& tree, std::span<const std::size_t> candidates,
                                              std::uint64_t seed);

// Subtree spanned by leaves given in depth-first order: leaf_height[j], branch[j] = height of
// the branch point between leaves j-1 and j (branch[0] = 0), and identification targets given
// as (leaf index whose root path holds the point, height).
struct MarkedTreeSpec {
  std::vector<double> leaf_height;
  std::vector<double> branch;
  std::vector<std::pair<std::size_t, double>> heads;
};
MDM build_marked_tree_mdm(const MarkedTreeSpec& spec);

struct LimitComponent {
  GridExcursion excursion;
  std::vector<std::size_t> cox_marks;
  std::vector<std::size_t> candidates;
  std::vector<TreePoint> heads;
  MDM limit_mdm;
  std::vector<MDM> sccs;
};
LimitComponent build_limit_mdms(const ExcursionTree& tree, LimitComponent c);

struct LimitOptions {
  Thinning thinning = Thinning::bernoulli;
  int refinements = 0;  // simulate at dt * 2^r and refine r times
};
struct LimitSample {
  std::vector<MDM> sequence;    // kernels by decreasing length, padded with loop units
  std::vector<double> lengths;  // all SCC lengths, decreasing
  std::size_t components = 0;   // marked components with complete excursions
  std::size_t truncated = 0;    // marked components cut by the horizon
  double largest() const { return lengths.empty() ? 0.0 : lengths.front(); }
};
LimitSample sample_limit_sequence(const CriticalParams& params, double T, double dt, std::uint64_t seed,
                                  std::size_t prefix_k, const LimitOptions& opt = {});

}  // namespace dcm
