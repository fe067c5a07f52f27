#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "doctest.h"
#include "pin/coarsegrain.hpp"
#include "pin/error.hpp"
#include "pin/stats.hpp"

using namespace pin;

TEST_CASE("decompose examples") {
  const double a[] = {0.5, 1.2, 3.7};
  const auto cg = decompose(a);
  CHECK(cg.J == std::vector<std::int64_t>{1, 2, 4});
  CHECK(cg.s == std::vector<double>{0.5, 1.2, 3.7});
  CHECK(cg.t == std::vector<double>{0.5, 1.2, 3.7});
  CHECK(cg.m(5) == 3);
  CHECK(cg.m(3) == 2);

  const double b[] = {0.1, 0.9};
  const auto cb = decompose(b);
  CHECK(cb.J == std::vector<std::int64_t>{1});
  CHECK(cb.s[0] == 0.1);
  CHECK(cb.t[0] == 0.9);
  CHECK(cb.m(1) == 1);

  const int N = 8;
  std::vector<double> lattice;
  for (int k = 0; k < 5 * N; ++k) lattice.push_back(static_cast<double>(k) / N);
  const auto cl = decompose(lattice);
  REQUIRE(cl.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(cl.J[k] == k + 1);
    CHECK(cl.s[k] == k);
    CHECK(cl.t[k] == doctest::Approx(k + 1 - 1.0 / N));
  }
  CHECK(decompose(std::vector<double>{}).m(10) == 0);
  CHECK_THROWS_AS(decompose(std::vector<double>{1.0, 0.5}), DomainError);
}

TEST_CASE("regenerative samples satisfy the block invariants and decompose idempotently") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (std::uint64_t r = 0; r < 200; ++r) {
      Rng rng(11, r);
      const auto s = sample_regenerative_cg(alpha, 20, rng);
      const auto& cg = s.cg;
      REQUIRE(cg.size() >= 1);
      CHECK(cg.J[0] == 1);
      CHECK(cg.s[0] == 0.0);
      std::vector<double> pts;
      for (std::size_t k = 0; k < cg.size(); ++k) {
        const auto j = static_cast<double>(cg.J[k]);
        CHECK(j - 1.0 <= cg.s[k]);
        CHECK(cg.s[k] <= cg.t[k]);
        CHECK(cg.t[k] < j);
        CHECK(cg.J[k] <= 20);
        if (k + 1 < cg.size()) {
          CHECK(cg.J[k + 1] > cg.J[k]);
          CHECK(cg.s[k + 1] >= j);
        }
        pts.push_back(cg.s[k]);
        pts.push_back(cg.t[k]);
      }
      const auto again = decompose(pts);
      CHECK(again.J == cg.J);
      CHECK(again.s == cg.s);
      CHECK(again.t == cg.t);
    }
  }
}

TEST_CASE("last point law before the first boundary") {
  for (double alpha : {0.5, 0.75}) {
    std::vector<double> g(100000);
    for (std::size_t i = 0; i < g.size(); ++i) {
      Rng rng(21, i);
      g[i] = sample_last_before(alpha, 0.0, 1.0, rng);
    }
    CHECK(std::abs(stats::summarize(g).mean - alpha) < 0.005);
    // Integrated density against the incomplete Beta function.
    for (double u : {0.01, 0.3, 0.7, 0.99}) {
      CHECK(last_point_cdf(alpha, 0.0, 1.0, u) ==
            doctest::Approx(boost::math::ibeta(alpha, 1.0 - alpha, u)).epsilon(1e-9));
    }
    const double d = stats::ks_distance(g, [&](double u) { return last_point_cdf(alpha, 0.0, 1.0, u); });
    CHECK(d < 0.01);
  }
  // Shifted start.
  CHECK(last_point_cdf(0.6, 0.4, 2.0, 1.2) ==
        doctest::Approx(boost::math::ibeta(0.6, 0.4, 0.8 / 1.6)).epsilon(1e-9));
}

TEST_CASE("first point after a boundary: conditional tail") {
  const double alpha = 0.5;
  std::size_t hit = 0, beyond = 0;
  for (std::uint64_t i = 0; hit < 20000; ++i) {
    Rng rng(31, i);
    const double g = sample_last_before(alpha, 0.0, 1.0, rng);
    if (std::abs(g - 0.5) > 0.01) continue;
    ++hit;
    if (sample_first_after(alpha, g, 1.0, rng) > 2.0) ++beyond;
  }
  const double p = static_cast<double>(beyond) / static_cast<double>(hit);
  CHECK(std::abs(p - std::pow(0.5 / 1.5, alpha)) < 0.02);
}

TEST_CASE("Johnk beta sampler") {
  const double a = 0.3, b = 0.6;
  std::vector<double> xs(50000);
  Rng rng(41, 0);
  for (auto& v : xs) v = beta_johnk(a, b, rng);
  CHECK(stats::ks_distance(xs, [&](double u) { return boost::math::ibeta(a, b, u); }) < 0.01);
  CHECK_THROWS_AS(beta_johnk(1.5, 0.5, rng), DomainError);
}

TEST_CASE("coarse-grained Hamiltonian") {
  CoarseGrain empty;
  CHECK(cg_hamiltonian(empty, 5, [](double, double) { return 1.0; }) == 0.0);
  const double pts[] = {0.2, 0.4, 2.5};
  const auto cg = decompose(pts);
  CHECK(cg_hamiltonian(cg, 5, [](double, double) { return 0.0; }) == 0.0);
  int call = 0;
  const double h = cg_hamiltonian(cg, 5, [&](double, double) { return ++call == 1 ? 1.0 : 2.0; });
  CHECK(h == doctest::Approx(3.0));
  // Blocks beyond the horizon are ignored.
  CHECK(cg_hamiltonian(cg, 2, [](double, double) { return 1.0; }) == 1.0);
}

TEST_CASE("coarse-grained identity by exhaustive skeleton sums") {
  SUBCASE("zero energies") {
    const auto law = build_renewal(0.75, SlowlyVarying::constant(1.0), 64);
    Rng rng(1, 1);
    const auto omega = sample_disorder(DisorderLaw::gaussian(), 32, rng);
    const auto rep = verify_cg_identity(law, omega, 0.0, 0.0, 0.0, 4, 3);
    CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.total_probability == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two-point law") {
    const auto law = two_point_law(64);
    DisorderSample omega;
    omega.omega = {0.0, 0.3, -1.1, 0.8, 0.2, -0.4, 1.7, 0.5, -0.9};
    const double beta = 0.4, h = 0.2, lam = DisorderLaw::gaussian().lambda(beta);
    const auto rep = verify_cg_identity(law, omega, beta, lam, h, 4, 2);
    CHECK(rep.rel_dev < 1e-10);
    CHECK(rep.total_probability == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("heavy-tailed law, several disorders") {
    const auto law = build_renewal(0.75, SlowlyVarying::constant(1.0), 64);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed, 5);
      const auto omega = sample_disorder(DisorderLaw::gaussian(), 24, rng);
      const double beta = 0.7, lam = DisorderLaw::gaussian().lambda(beta);
      const auto rep = verify_cg_identity(law, omega, beta, lam, 0.3, 8, 2);
      CHECK(rep.rel_dev < 1e-10);
      const auto rep3 = verify_cg_identity(law, omega, beta, lam, -0.2, 6, 4);
      CHECK(rep3.rel_dev < 1e-10);
    }
  }
  SUBCASE("size cap") {
    const auto law = two_point_law(64);
    Rng rng(1, 1);
    const auto omega = sample_disorder(DisorderLaw::gaussian(), 40, rng);
    CHECK_THROWS_AS(verify_cg_identity(law, omega, 0.1, 0.005, 0.0, 5, 5), BudgetExceeded);
  }
}

TEST_CASE("tail estimates for the next visited block") {
  const std::vector<double> gammas = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  const auto half = lemma_tail_estimates(0.5, gammas, 100000, 3);
  CHECK(std::abs(half.slope_short - 0.5) < 0.05);
  const auto three = lemma_tail_estimates(0.75, gammas, 100000, 4);
  CHECK(std::abs(three.slope_near_end - 0.25) < 0.05);
  const double quarter[] = {0.25};
  const auto big = lemma_tail_estimates(0.6, quarter, 10000, 5);
  for (const auto& r : big.rows) CHECK(r.p_hat <= 1.0);
  CHECK_THROWS_AS(lemma_tail_estimates(0.5, std::vector<double>{0.3}, 100, 1), DomainError);
}

TEST_CASE("regenerative property: history does not matter given the last point") {
  std::vector<double> ps;
  for (double y : {0.3, 0.6, 0.9}) ps.push_back(regenerative_property_pvalue(0.6, y, 0.0, 0.2, 4000, 17));
  // Aggregate by the smallest p-value with a Bonferroni factor.
  CHECK(*std::min_element(ps.begin(), ps.end()) * ps.size() > 0.001);
}

TEST_CASE("coarse-grain CSV") {
  Rng rng(1, 2);
  const std::vector<RegenSample> s = {sample_regenerative_cg(0.5, 3, rng)};
  std::ostringstream os;
  write_cg_csv(os, s);
  CHECK(os.str().rfind("# schema: regen_cg v1\nsample,alpha,k,J_k,s_k,t_k\n0,0.5,1,1,0,", 0) == 0);
  const auto rep = lemma_tail_estimates(0.5, std::vector<double>{0.01}, 1000, 1);
  std::ostringstream ts;
  write_tail_csv(ts, rep);
  CHECK(ts.str().find("0.5,0.01,short_block,") != std::string::npos);
}
