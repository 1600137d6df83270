#pragma once

#include <cstdint>

#include "dcm/graph.hpp"

namespace dcm {

struct ConditionedDegrees {
  DegreeSequence degrees;
  std::uint64_t attempts = 0;
};

// Rejection sampling of n i.i.d. draws from `law` conditioned on sum d- = sum d+.
// Attempt a uses the sub-seed derive_seed(seed, {a}).
ConditionedDegrees sample_conditioned_degrees(const JointDegreeLaw& law, std::size_t n, std::uint64_t seed,
                                              std::uint64_t max_attempts);

// Uniform matching of out-half-edges to in-half-edges (Fisher-Yates on in-slots).
Digraph pair_configuration(const DegreeSequence& seq, std::uint64_t seed);

struct AnomalousCounts {
  std::uint64_t self_loops = 0;
  std::uint64_t parallel_pairs = 0;
  bool simple() const { return self_loops == 0 && parallel_pairs == 0; }
};
AnomalousCounts count_anomalous(const Digraph& g);

struct SimpleSample {
  Digraph graph;
  std::uint64_t attempts = 0;
};
// Repeats conditioning + pairing until the result is simple.
SimpleSample sample_simple(const JointDegreeLaw& law, std::size_t n, std::uint64_t seed, std::uint64_t budget,
                           std::uint64_t degree_attempts = 100'000'000);

// Directed Erdos-Renyi: each ordered pair u != v independently with probability p.
Digraph directed_er_sample(std::size_t n, double p, std::uint64_t seed);

}  // namespace dcm
