#include "dcm/alias.hpp"

#include <cmath>
#include <numeric>

namespace dcm {

AliasTable::AliasTable(std::span<const double> weights) : size_(weights.size()) {
  if (size_ == 0) throw Error(ErrorKind::invalid_argument, "alias table needs at least one weight");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0)) throw Error(ErrorKind::invalid_argument, "alias table weights must have positive mass");

  std::vector<double> scaled(size_);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < size_; ++i) {
    if (weights[i] < 0) throw Error(ErrorKind::invalid_argument, "negative weight");
    scaled[i] = weights[i] * static_cast<double>(size_) / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  threshold_.assign(size_, 0);
  alias_.resize(size_);
  std::iota(alias_.begin(), alias_.end(), std::size_t{0});
  constexpr double scale = 4294967296.0;
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    threshold_[s] = static_cast<std::uint64_t>(std::llround(scaled[s] * scale));
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) threshold_[i] = 1ULL << 32;
  for (auto i : small) threshold_[i] = 1ULL << 32;
}

}  // namespace dcm
