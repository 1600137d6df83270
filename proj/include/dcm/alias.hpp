#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcm/common.hpp"

namespace dcm {

// Walker/Vose alias table; one 64-bit draw per sample.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights);

  std::size_t sample(Rng& rng) const {
    const std::uint64_t u = rng();
    const auto col = static_cast<std::size_t>((static_cast<unsigned __int128>(u >> 32) * size_) >> 32);
    return (u & 0xffffffffULL) < threshold_[col] ? col : alias_[col];
  }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> threshold_;
  std::vector<std::size_t> alias_;
};

}  // namespace dcm
