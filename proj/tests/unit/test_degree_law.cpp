#include <doctest.h>

#include <cmath>

#include "dcm/common.hpp"
#include "dcm/degree_law.hpp"

using namespace dcm;

namespace {

JointDegreeLaw tbl(std::vector<Atom> a) { return JointDegreeLaw::table(std::move(a)); }

double poisson(double l, int k) { return std::exp(-l) * std::pow(l, k) / std::tgamma(k + 1.0); }

}  // namespace

TEST_CASE("poisson product parameters") {
  auto law = JointDegreeLaw::poisson_product(1, 1);
  auto p = compute_params(law);
  CHECK(p.mu == doctest::Approx(1).epsilon(1e-12));
  CHECK(p.sigma_plus == doctest::Approx(1).epsilon(1e-12));
  CHECK(p.sigma_minus_plus + p.nu_minus == doctest::Approx(1).epsilon(1e-12));
  CHECK(p.nu_minus == doctest::Approx(1).epsilon(1e-12));
  CHECK(std::abs(p.sigma_minus_plus) < 1e-12);
  CHECK(p.sigma_minus == doctest::Approx(1).epsilon(1e-12));
  CHECK(p.drift_coeff == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.cox_coeff == doctest::Approx(2).epsilon(1e-12));
  CHECK(p.candidate_coeff == doctest::Approx(1).epsilon(1e-12));
  CHECK(p.height_scale == doctest::Approx(2).epsilon(1e-12));
}

TEST_CASE("poisson parameters agree with a hand-truncated sum at 40") {
  // E[X^2] = 2, E[X^3] = 5 for Poisson(1).
  double m1 = 0, m2 = 0, m3 = 0;
  for (int k = 0; k <= 40; ++k) {
    m1 += k * poisson(1, k);
    m2 += k * k * poisson(1, k);
    m3 += k * k * k * poisson(1, k);
  }
  CHECK(m2 == doctest::Approx(2).epsilon(1e-12));
  CHECK(m3 == doctest::Approx(5).epsilon(1e-12));
  auto p = compute_params(JointDegreeLaw::poisson_product(1, 1, 40));
  CHECK(p.nu_minus == doctest::Approx((m2 - m1) / m1).epsilon(1e-12));
  CHECK(p.sigma_minus == doctest::Approx(std::sqrt((m1 * m3 - m2 * m2) / (m1 * m1))).epsilon(1e-12));
}

TEST_CASE("deterministic law has vanishing variances") {
  auto p = compute_params(tbl({{{1, 1}, 1.0}}));
  CHECK(p.mu == 1);
  CHECK(p.nu_minus == 0);
  CHECK(p.sigma_minus == 0);
  CHECK(p.sigma_plus == 0);
  CHECK(p.sigma_minus_plus == 0);
  CHECK_FALSE(p.has_continuum_limit());
  CHECK(std::isnan(p.drift_coeff));
  auto j = p.to_json();
  CHECK(j["drift_coeff"].is_null());
}

TEST_CASE("derived coefficients match their definitions") {
  auto law = tbl({{{0, 1}, 0.25}, {{1, 1}, 0.5}, {{2, 1}, 0.25}});
  auto p = compute_params(law);
  double s = p.sigma_minus_plus + p.nu_minus;
  auto q = CriticalParams::from_base(p.mu, p.nu_minus, p.sigma_minus, p.sigma_plus, p.sigma_minus_plus);
  CHECK(q.candidate_coeff == s / (p.mu * p.mu));
  auto law2 = JointDegreeLaw::geometric_product(0.5, 0.5, 80);
  auto r = compute_params(law2);
  CHECK(r.drift_coeff == doctest::Approx((r.sigma_minus_plus + r.nu_minus) / (2 * r.sigma_plus * r.mu)));
  CHECK(r.cox_coeff == doctest::Approx(2 * (r.sigma_minus_plus + r.nu_minus) / (r.sigma_plus * r.mu * r.mu)));
  CHECK(r.height_scale == doctest::Approx(2 / r.sigma_plus));
}

TEST_CASE("unequal means are rejected") {
  auto law = tbl({{{1, 0}, 0.5}, {{1, 1}, 0.5}});
  CHECK_THROWS_AS(compute_params(law), Error);
  try {
    compute_params(law);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unequal_means);
  }
}

TEST_CASE("criticality") {
  CHECK(check_criticality(JointDegreeLaw::poisson_product(1, 1), 1e-10));
  CHECK(check_criticality(tbl({{{1, 1}, 1.0}}), 1e-12));
  std::vector<Atom> diag;
  double mass = 0;
  for (int k = 0; k <= 30; ++k) {
    diag.push_back({{k, k}, poisson(1, k)});
    mass += poisson(1, k);
  }
  for (auto& a : diag) a.p /= mass;
  auto coupled = tbl(diag);
  CHECK_FALSE(check_criticality(coupled, 1e-6));
  CHECK(coupled.moment(1, 1) == doctest::Approx(2).epsilon(1e-10));
}

TEST_CASE("size biasing") {
  auto z = size_biased(tbl({{{1, 1}, 1.0}}));
  REQUIRE(z.atoms().size() == 1);
  CHECK(z.prob({1, 1}) == 1.0);

  auto z2 = size_biased(tbl({{{0, 1}, 0.5}, {{2, 1}, 0.5}}));
  REQUIRE(z2.atoms().size() == 1);
  CHECK(z2.prob({2, 1}) == doctest::Approx(1.0));

  auto z3 = size_biased(JointDegreeLaw::poisson_product(1, 1));
  for (int a = 1; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b)
      CHECK(z3.prob({a, b}) == doctest::Approx(poisson(1, a - 1) * poisson(1, b)).epsilon(1e-9));
  CHECK(z3.prob({0, 0}) == 0.0);
}

TEST_CASE("size-biased mass and out-mean") {
  for (auto law : {JointDegreeLaw::poisson_product(1, 1), JointDegreeLaw::geometric_product(0.5, 0.5),
                   tbl({{{0, 1}, 0.25}, {{1, 1}, 0.5}, {{2, 1}, 0.25}})}) {
    auto z = size_biased(law);
    double mass = 0, out = 0;
    for (const auto& a : z.atoms()) {
      mass += a.p;
      out += a.p * a.degrees.out;
      CHECK(a.degrees.in > 0);
    }
    CHECK(mass == doctest::Approx(1).epsilon(1e-12));
    CHECK(out == doctest::Approx(law.moment(1, 1) / law.moment(1, 0)).epsilon(1e-10));
    if (check_criticality(law, 1e-10)) CHECK(out == doctest::Approx(1).epsilon(1e-10));
  }
}

TEST_CASE("difference lattice") {
  auto a = difference_lattice(JointDegreeLaw::poisson_product(1, 1));
  CHECK(a.period == 1);
  CHECK(a.strongly_aperiodic);
  auto b = difference_lattice(tbl({{{0, 2}, 0.5}, {{2, 0}, 0.5}}));
  CHECK(b.period == 4);
  CHECK_FALSE(b.strongly_aperiodic);
  auto c = difference_lattice(tbl({{{1, 1}, 1.0}}));
  CHECK(c.period == 0);
  CHECK_FALSE(c.strongly_aperiodic);
}

TEST_CASE("difference lattice against enumeration over periods") {
  // Minimal p with support in c + pZ, by brute force over p <= 12.
  std::vector<std::vector<Atom>> laws = {{{{0, 1}, 0.5}, {{2, 1}, 0.5}},
                                         {{{0, 3}, 0.5}, {{3, 0}, 0.5}},
                                         {{{1, 0}, 0.3}, {{0, 2}, 0.3}, {{4, 0}, 0.4}}};
  for (auto& atoms : laws) {
    auto law = tbl(atoms);
    long want = 0;
    for (long p = 12; p >= 1; --p) {
      long c = atoms[0].degrees.in - atoms[0].degrees.out;
      bool ok = true;
      for (auto& a : atoms) ok = ok && ((a.degrees.in - a.degrees.out - c) % p == 0);
      if (ok) {
        want = p;
        break;
      }
    }
    CHECK(difference_lattice(law).period == want);
  }
}

TEST_CASE("drift coefficient is nonnegative for critical laws") {
  std::vector<JointDegreeLaw> laws = {JointDegreeLaw::poisson_product(1, 1),
                                      tbl({{{0, 1}, 0.25}, {{1, 1}, 0.5}, {{2, 1}, 0.25}}),
                                      tbl({{{1, 1}, 0.5}, {{2, 2}, 0.5}}),
                                      tbl({{{0, 2}, 0.25}, {{1, 0}, 0.25}, {{1, 1}, 0.25}, {{2, 1}, 0.25}})};
  for (auto& law : laws) {
    if (!check_criticality(law, 1e-12)) continue;
    auto p = compute_params(law);
    if (p.has_continuum_limit()) CHECK(p.drift_coeff >= 0);
    CHECK(law.moment(1, 1) == doctest::Approx(p.mu).epsilon(1e-12));
  }
}

TEST_CASE("law json round trip and validation") {
  auto j = nlohmann::json::parse(R"({"kind":"table","entries":[[0,1,0.5],[2,1,0.5]]})");
  auto law = JointDegreeLaw::from_json(j);
  CHECK(law.prob({0, 1}) == 0.5);
  auto again = JointDegreeLaw::from_json(law.to_json());
  CHECK(again.atoms().size() == 2);
  auto pj = nlohmann::json::parse(R"({"kind":"poisson_product","lambda_minus":1.0,"lambda_plus":1.0})");
  auto pl = JointDegreeLaw::from_json(pj);
  CHECK(pl.truncation() == JointDegreeLaw::default_cutoff);
  CHECK(pl.tolerance() < 1e-11);
  CHECK_THROWS_AS(tbl({{{1, 1}, 0.7}}), Error);
  CHECK_THROWS_AS(tbl({{{1, 1}, -0.1}, {{0, 0}, 1.1}}), Error);
  CHECK_THROWS_AS(JointDegreeLaw::from_json(nlohmann::json::parse(R"({"kind":"zipf"})")), Error);
  // A cutoff that discards too much mass is reported.
  CHECK_THROWS_AS(JointDegreeLaw::poisson_product(5, 5, 3), Error);
}

TEST_CASE("alias sampling matches the pmf") {
  auto law = tbl({{{0, 1}, 0.2}, {{1, 1}, 0.5}, {{3, 0}, 0.3}});
  Rng rng = make_rng(7);
  std::vector<int> counts(3, 0);
  const int N = 200000;
  for (int i = 0; i < N; ++i) ++counts[law.sample_index(rng)];
  for (int i = 0; i < 3; ++i) {
    double p = law.atoms()[i].p;
    CHECK(std::abs(counts[i] - N * p) < 4 * std::sqrt(N * p * (1 - p)));
  }
}
