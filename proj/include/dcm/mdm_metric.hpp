#pragma once

#include <string>
#include <vector>

#include "dcm/mdm.hpp"

namespace dcm {

struct SizeCap {
  std::size_t vertices = 24;
  std::size_t edges = 48;
};

struct Isomorphism {
  std::vector<std::size_t> vertex_map;  // index in m1.vertices() -> index in m2.vertices()
  std::vector<std::size_t> edge_map;    // index in m1.edges() -> index in m2.edges()
};

std::vector<Isomorphism> enumerate_isomorphisms(const MDM& m1, const MDM& m2, SizeCap cap = {});

// Extended nonnegative real; infinite for non-isomorphic arguments.
class Distance {
 public:
  static Distance finite(double v) { return Distance(v, false); }
  static Distance infinite() { return Distance(0.0, true); }
  bool is_infinite() const { return inf_; }
  double value() const;
  std::string str() const;
  friend bool operator==(const Distance& a, const Distance& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }
  friend bool operator<(const Distance& a, const Distance& b) { return !a.inf_ && (b.inf_ || a.v_ < b.v_); }

 private:
  Distance(double v, bool inf) : v_(v), inf_(inf) {}
  double v_;
  bool inf_;
};

Distance dg_distance(const MDM& m1, const MDM& m2, SizeCap cap = {});

// Text code "n;e;sig;mult" minimal over signature-respecting vertex orders.
std::string canonical_code(const MDM& m, SizeCap cap = {});
inline const std::string loop_unit_code = "1;1;1/1;1";

Distance sequence_distance(const std::vector<MDM>& s1, const std::vector<MDM>& s2, std::size_t k);

}  // namespace dcm
