#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "dcm/limit_theorems.hpp"
#include "dcm/stats.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

JointDegreeLaw two_atom_a() { return JointDegreeLaw::table({{{1, 0}, 0.5}, {{1, 2}, 0.5}}); }
// Has zero in-degree vertices, so R_n is random.
JointDegreeLaw two_atom_b() { return JointDegreeLaw::table({{{0, 2}, 1.0 / 3}, {{2, 1}, 2.0 / 3}}); }
JointDegreeLaw three_atom() { return JointDegreeLaw::table({{{0, 1}, 0.25}, {{1, 1}, 0.5}, {{2, 1}, 0.25}}); }

double law_p(const JointDegreeLaw& law, DegreePair d) { return law.prob(d); }

double z_prob(const JointDegreeLaw& law, const std::vector<DegreePair>& k) {
  double mu = law.moment(1, 0), p = 1;
  for (auto d : k) p *= d.in * law_p(law, d) / mu;
  return p;
}

}  // namespace

TEST_CASE("Hermite normal form") {
  auto id = hermite_normal_form({{{1, 0}, {0, 1}}});
  CHECK(id.generator == IntMatrix2{{{1, 0}, {0, 1}}});
  CHECK(hermite_normal_form({{{0, 1}, {1, 0}}}).generator == IntMatrix2{{{1, 0}, {0, 1}}});
  CHECK(hermite_normal_form({{{2, 0}, {1, 1}}}).generator == IntMatrix2{{{2, 0}, {1, 1}}});
  CHECK(hermite_normal_form({{{2, 0}, {0, 2}}}).det == 4);
  CHECK_THROWS_AS(hermite_normal_form({{{1, 2}, {2, 4}}}), Error);
  Rng rng = make_rng(3);
  std::uniform_int_distribution<long> coef(-9, 9);
  for (int t = 0; t < 2000; ++t) {
    IntMatrix2 a{{{coef(rng), coef(rng)}, {coef(rng), coef(rng)}}};
    const long det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if (det == 0) continue;
    auto h = hermite_normal_form(a);
    CHECK(h.det == std::labs(det));
    CHECK(h.generator[0][1] == 0);
    CHECK(h.generator[0][0] > 0);
    CHECK(h.generator[1][1] > 0);
    CHECK(h.generator[1][0] >= 0);
    CHECK(h.generator[1][0] < h.generator[0][0]);
    CHECK(hermite_normal_form(h.generator).generator == h.generator);
    // Rows of a lie in the lattice, random combinations too; and generator rows lie in span(a).
    for (int k = 0; k < 5; ++k) {
      const long u = coef(rng), v = coef(rng);
      CHECK(h.contains(u * a[0][0] + v * a[1][0], u * a[0][1] + v * a[1][1]));
    }
    for (auto row : h.generator) {
      // Solve row = x a with Cramer's rule; x must be integral.
      const long x0 = row[0] * a[1][1] - row[1] * a[1][0];
      const long x1 = -row[0] * a[0][1] + row[1] * a[0][0];
      CHECK(x0 % det == 0);
      CHECK(x1 % det == 0);
    }
  }
}

TEST_CASE("main lattice") {
  auto z2 = main_lattice({{0, 0}, {1, 0}, {0, 1}});
  CHECK(z2.det == 1);
  auto two = main_lattice({{0, 0}, {2, 0}, {0, 2}});
  CHECK(two.generator == IntMatrix2{{{2, 0}, {0, 2}}});
  CHECK(two.det == 4);
  CHECK_THROWS_AS(main_lattice({{0, 0}, {1, 1}}), Error);
  CHECK_THROWS_AS(main_lattice({{0, 0}, {1, 1}, {3, 3}}), Error);
  auto shifted = main_lattice({{5, 7}, {7, 7}, {5, 9}, {6, 8}});
  CHECK(shifted.det == 2);
  CHECK(shifted.contains(1, 1));
  CHECK_FALSE(shifted.contains(1, 0));
}

TEST_CASE("exact sum pmf") {
  auto law = two_atom_a();
  auto one = exact_sum_pmf(law, 1);
  CHECK(one.at(1) == doctest::Approx(0.5));
  CHECK(one.at(-1) == doctest::Approx(0.5));
  auto pm = JointDegreeLaw::table({{{1, 0}, 0.5}, {{0, 1}, 0.5}});
  auto two = exact_sum_pmf(pm, 2);
  CHECK(two.at(-2) == doctest::Approx(0.25));
  CHECK(two.at(0) == doctest::Approx(0.5));
  CHECK(two.at(2) == doctest::Approx(0.25));
  CHECK(two.at(1) == 0.0L);
  auto pois = JointDegreeLaw::poisson_product(1, 1, 12);
  auto big = exact_sum_pmf(pois, 400);
  long double mass = 0;
  for (auto x : big.p) mass += x;
  // Total mass is (sum of stored atom masses)^400, not exactly 1.
  long double step = 0;
  for (const auto& a : pois.atoms()) step += a.p;
  CHECK(std::abs(static_cast<double>(mass - std::pow(step, 400.0L))) < 1e-15);
  CHECK_THROWS_AS(exact_sum_pmf(pois, 400, 100), Error);
  auto joint = exact_joint_sum_pmf(pm, 3);
  long double jm = 0;
  for (auto x : joint.p) jm += x;
  CHECK(std::abs(static_cast<double>(jm - 1)) < 1e-15);
  CHECK(joint.at(3, 3) == doctest::Approx(0.125));
  CHECK(joint.at(-1, 1) == doctest::Approx(0.375));
}

TEST_CASE("local limit predictions") {
  CHECK(llt_prediction(100, 1, 2.0, 0.0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi * 2 * 100)));
  CHECK(llt_prediction(100, 1, 2.0, 1e4) < 1e-300);
  CHECK_THROWS_AS(llt_prediction(10, 1, 0.0, 0.0), Error);
  auto z2 = main_lattice({{0, 0}, {1, 0}, {0, 1}});
  CHECK(llt_prediction(50, z2, {{{1, 0}, {0, 1}}}, {0, 0}) == doctest::Approx(1 / (2 * std::numbers::pi * 50)));
  CHECK_THROWS_AS(llt_prediction(50, z2, {{{1, 2}, {2, 1}}}, {0, 0}), Error);
  auto pois = JointDegreeLaw::poisson_product(1, 1, 12);
  double prev_err = 1e9, prev_sup = 1e9;
  for (std::size_t n : {100, 200, 400}) {
    auto pmf = exact_sum_pmf(pois, n);
    const double exact = static_cast<double>(pmf.at(0));
    const double err = std::abs(exact / llt_prediction(n, 1, 2.0, 0.0) - 1);
    CHECK(err < prev_err);
    prev_err = err;
    double sup = 0;
    const long w = static_cast<long>(3 * std::sqrt(2.0 * n));
    for (long y = -w; y <= w; ++y)
      sup = std::max(sup, std::sqrt(double(n)) * std::abs(static_cast<double>(pmf.at(y)) -
                                                         llt_prediction(n, 1, 2.0, static_cast<double>(y))));
    CHECK(sup < prev_sup);
    prev_sup = sup;
  }
  CHECK(prev_err <= 0.05);
}

TEST_CASE("psi examples") {
  std::vector<DegreePair> ones{{1, 0}, {1, 3}, {1, 1}};
  CHECK(psi_r(ones, 1.0, 1.0) == doctest::Approx(1.0));
  std::vector<DegreePair> k{{2, 0}, {1, 0}};
  CHECK(psi_r(k, 1.0, 1.5) == doctest::Approx(1.5));
  std::vector<DegreePair> bad{{0, 1}};
  CHECK_THROWS_AS(psi_r(bad, 1.0, 1.0), Error);
}

TEST_CASE("reorder identity by enumeration") {
  for (const auto& law : {two_atom_a(), two_atom_b(), three_atom()}) {
    const std::size_t n = 4;
    auto atoms = oracle::enumerate_discovery(law, n);
    const double p = law.positive_in_probability(), mu = law.moment(1, 0);
    for (std::size_t r = 1; r <= n; ++r) {
      long double pr = 0;
      std::map<std::vector<DegreePair>, long double> cond;
      for (const auto& a : atoms)
        if (a.order.size() == r) {
          pr += a.prob;
          cond[a.order] += a.prob;
        }
      if (pr == 0) continue;
      double total = 0;
      for (auto& [k, q] : cond) {
        const double want = static_cast<double>(q / pr);
        const double got = z_prob(law, k) * psi_r(k, p, mu);
        CHECK(std::abs(want - got) <= 1e-12);
        total += got;
      }
      CHECK(std::abs(total - 1) <= 1e-12);
    }
  }
}

TEST_CASE("measure change by enumeration") {
  for (const auto& law : {two_atom_b(), three_atom()}) {
    const std::size_t n = 6;
    auto atoms = oracle::enumerate_discovery(law, n);
    for (std::size_t m : {1, 2, 3}) {
      long double norm = 0;
      std::map<std::vector<DegreePair>, long double> cond;
      for (const auto& a : atoms)
        if (a.order.size() >= m && a.delta == 0) {
          norm += a.prob;
          cond[std::vector<DegreePair>(a.order.begin(), a.order.begin() + static_cast<long>(m))] += a.prob;
        }
      CHECK(static_cast<double>(reorder_normalizer(law, n, m)) == doctest::Approx(static_cast<double>(norm)).epsilon(1e-12));
      for (auto& [k, q] : cond) {
        const double want = static_cast<double>(q / norm) / z_prob(law, k);
        auto exact = phi_nm_exact(law, k, n);
        CHECK(exact.value == doctest::Approx(want).epsilon(1e-10));
        if (m == 2) {
          auto est = phi_nm_estimate(law, k, n, 20000, m * 1000 + k.front().in);
          REQUIRE(est.mc_std_error);
          CHECK(std::abs(est.value - want) <= 3 * *est.mc_std_error + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("degenerate measure change") {
  auto law = JointDegreeLaw::table({{{1, 1}, 1.0}});
  std::vector<DegreePair> k{{1, 1}, {1, 1}};
  CHECK(phi_nm_exact(law, k, 5).value == doctest::Approx(1.0));
  auto est = phi_nm_estimate(law, k, 5, 100, 1);
  CHECK(est.value == doctest::Approx(1.0));
  CHECK(*est.mc_std_error == doctest::Approx(0.0));
  CHECK_THROWS_AS(phi_nm_exact(law, k, 1), Error);
  CHECK_THROWS_AS(phi_nm_estimate(law, k, 5, 1, 1), Error);
}

TEST_CASE("tilting") {
  auto pois = JointDegreeLaw::poisson_product(1, 1);
  auto zero = tilted_expansion(pois, 0.0);
  CHECK(zero.alpha == 0.0);
  CHECK(zero.mean_in == doctest::Approx(1.0));
  CHECK(zero.mean_out == doctest::Approx(1.0));
  for (double t : {0.01, 0.1, 0.5, 2.0}) {
    auto m = tilted_expansion(pois, t);
    CHECK(m.alpha == doctest::Approx(std::expm1(-t)).epsilon(1e-12));
    CHECK(m.mean_in == doctest::Approx(std::exp(-t)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(tilted_expansion(pois, -1), Error);
  // Remainder is o(theta^3): |remainder| / theta^4 settles at kappa_4 / 24 = 1/24.
  double prev = 0;
  for (double t : {1e-2, 1e-3, 1e-4}) {
    auto m = tilted_expansion(pois, t);
    const double r = std::abs(m.alpha_remainder) / std::pow(t, 3);
    CHECK(r < 0.1 * t + 1e-9);
    const double r4 = std::abs(m.alpha_remainder) / std::pow(t, 4);
    if (t < 1e-2) CHECK(r4 == doctest::Approx(prev).epsilon(0.02));
    prev = r4;
    CHECK(m.mean_in - m.mean_in_series == doctest::Approx(0.0).epsilon(1e-3));
  }
  CHECK(prev == doctest::Approx(1.0 / 24).epsilon(0.01));
  auto with_zero = tilted_expansion(two_atom_b(), 0.3);
  REQUIRE(with_zero.zero_in_out_law.size() == 1);
  CHECK(with_zero.zero_in_out_law[0].first == 2);
}

TEST_CASE("gamma bound") {
  // D in {(0,1), (2,1)}: Z = (2,1) always, so a constant prefix has s = 0.
  auto law = JointDegreeLaw::table({{{0, 1}, 0.5}, {{2, 1}, 0.5}});
  std::vector<DegreePair> k(5, DegreePair{2, 1});
  CHECK(gamma_admissible(law, k));
  // sigma_- is the spread of Z-, which is constant here.
  CHECK(compute_params(law).sigma_minus == 0.0);
  CHECK(gamma_lower_bound(law, k, 100) == doctest::Approx(1.0));
  // Z- uniform on {1, 2}: Var = 1/4, s-(0..4) = 0, -1/2, 0, -1/2, 0.
  std::vector<DegreePair> alt{{1, 1}, {2, 1}, {1, 1}, {2, 1}};
  CHECK(gamma_admissible(three_atom(), alt));
  CHECK(gamma_lower_bound(three_atom(), alt, 100) ==
        doctest::Approx(std::exp(-1.0 / 100 - 0.25 * 64 / (6 * 1e4))).epsilon(1e-12));
  CHECK(gamma_lower_bound(law, std::vector<DegreePair>{}, 100) == 1.0);
  CHECK_THROWS_AS(gamma_admissible(law, k, 0.2), Error);
  auto pois = JointDegreeLaw::poisson_product(1, 1);
  std::vector<DegreePair> wild{{9, 0}, {9, 0}, {9, 0}};
  CHECK_FALSE(gamma_admissible(pois, wild));
  CHECK_THROWS_AS(gamma_lower_bound(pois, wild, 100), Error);
}

TEST_CASE("gamma bound is asymptotic: worst phi / gamma rises toward 1") {
  auto law = three_atom();
  double prev = 0;
  for (std::size_t n : {8, 50, 400}) {
    double worst = 1e300;
    for (int a = 1; a <= 2; ++a)
      for (int b = 1; b <= 2; ++b)
        for (int c = 1; c <= 2; ++c) {
          std::vector<DegreePair> k{{a, 1}, {b, 1}, {c, 1}};
          REQUIRE(gamma_admissible(law, k));
          worst = std::min(worst, phi_nm_exact(law, k, n).value / gamma_lower_bound(law, k, n));
        }
    CHECK(worst > prev);
    CHECK(worst < 1.0);
    prev = worst;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("limiting Phi") {
  auto params = compute_params(JointDegreeLaw::poisson_product(1, 1));
  auto flat = params;
  flat.sigma_minus = 0;
  CHECK(phi_limit_sample(flat, 1.0, 1e-3, 1) == 1.0);
  std::vector<double> phi, logphi;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    const double x = phi_limit_sample(params, 1.0, 1e-2, s);
    phi.push_back(x);
    logphi.push_back(std::log(x));
  }
  auto m = mean_se(phi);
  CHECK(std::abs(m.mean - 1) < 3 * m.se);
  auto lm = mean_se(logphi);
  const double a2 = params.sigma_minus * params.sigma_minus / (params.mu * params.mu);
  CHECK(std::abs(lm.mean + a2 / 6) < 3 * lm.se);
  std::vector<double> sq;
  for (double x : logphi) sq.push_back((x - lm.mean) * (x - lm.mean));
  auto v = mean_se(sq);
  CHECK(std::abs(v.mean - a2 / 3) < 3 * v.se + 1e-4);
}
