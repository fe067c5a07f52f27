#include <cmath>
#include <vector>

#include "doctest.h"
#include "pin/error.hpp"
#include "pin/partition.hpp"

using namespace pin;

namespace {

DisorderSample fixed_sample(std::vector<double> w) {
  DisorderSample s;
  s.omega = std::move(w);
  return s;
}

const RenewalLaw& law75() {
  static const RenewalLaw law = build_renewal(0.75, SlowlyVarying::constant(1.0), 8192);
  return law;
}

}  // namespace

TEST_CASE("constrained partition trivial cases") {
  const auto& law = law75();
  Rng rng(1, 1);
  const auto omega = sample_disorder(DisorderLaw::gaussian(), 40, rng);
  CHECK(log_z_constrained(law, omega, 0.7, 0.245, 0.3, 5, 5) == 0.0);
  CHECK(std::abs(log_z_constrained(law, omega, 0.7, 0.245, 0.3, 5, 6)) < 1e-15);
  for (std::size_t a : {0, 3, 10}) {
    for (std::size_t b : {a + 2, a + 9, a + 25}) {
      CHECK(std::abs(log_z_constrained(law, omega, 0.0, 0.0, 0.0, a, b)) < 1e-13);
    }
  }
  CHECK_THROWS_AS(log_z_constrained(law, omega, 0.1, 0.005, 0.0, 6, 5), DomainError);
}

TEST_CASE("constrained partition: two-point law by hand") {
  const auto law = two_point_law(10);
  const auto omega = fixed_sample({0.0, 0.4, -1.3, 0.8, 2.0});
  const double beta = 0.5, h = 0.1, lam = DisorderLaw::gaussian().lambda(beta);
  const double x1 = beta * 0.4 - lam + h;
  const double expected = (0.5 + 0.25 * std::exp(x1)) / 0.75;
  CHECK(std::exp(log_z_constrained(law, omega, beta, lam, h, 0, 2)) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(brute_force_constrained(law, omega, beta, lam, h, 0, 2) == doctest::Approx(expected).epsilon(1e-14));
  const double dp = std::exp(log_z_constrained(law, omega, beta, lam, h, 0, 4));
  CHECK(dp == doctest::Approx(brute_force_constrained(law, omega, beta, lam, h, 0, 4)).epsilon(1e-12));
}

TEST_CASE("free partition trivial cases") {
  const auto& law = law75();
  Rng rng(2, 2);
  const auto omega = sample_disorder(DisorderLaw::rademacher(), 64, rng);
  CHECK(log_z_free(law, omega, 0.4, 0.1, 0.2, 0) == 0.0);
  const double beta = 0.4, lam = DisorderLaw::rademacher().lambda(beta), h = 0.2;
  const double x1 = beta * omega.omega[1] - lam + h;
  CHECK(std::exp(log_z_free(law, omega, beta, lam, h, 1)) ==
        doctest::Approx(law.tail(1) + law.K(1) * std::exp(x1)).epsilon(1e-14));
  for (std::size_t n : {1, 7, 64}) CHECK(std::abs(log_z_free(law, omega, 0.0, 0.0, 0.0, n)) < 1e-13);
}

TEST_CASE("oracle equivalence on random instances") {
  const RenewalLaw laws[] = {build_renewal(0.6, SlowlyVarying::constant(1.0), 64), two_point_law(64)};
  const DisorderLaw dis[] = {DisorderLaw::gaussian(), DisorderLaw::rademacher()};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed, 77);
    const auto& law = laws[seed % 2];
    const auto& d = dis[(seed / 2) % 2];
    const auto omega = sample_disorder(d, 40, rng);
    const double beta = rng.uniform(), h = 2.0 * rng.uniform() - 1.0, lam = d.lambda(beta);
    const auto a = static_cast<std::size_t>(rng.uniform() * 20);
    const auto b = a + 1 + static_cast<std::size_t>(rng.uniform() * 12);
    const double dp = std::exp(log_z_constrained(law, omega, beta, lam, h, a, b));
    const double bf = brute_force_constrained(law, omega, beta, lam, h, a, b);
    worst = std::max(worst, std::abs(dp / bf - 1.0));
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
    const double fdp = std::exp(log_z_free(law, omega, beta, lam, h, n));
    const double fbf = brute_force_free(law, omega, beta, lam, h, n);
    worst = std::max(worst, std::abs(fdp / fbf - 1.0));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("homogeneous functions") {
  const auto& law = law75();
  CHECK(log_psi(law, 0.0, 100) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(std::abs(log_psi_c(law, 0.0, 100)) < 1e-13);
  const auto det = deterministic_law(50);
  for (std::size_t n : {1, 2, 10, 50}) {
    CHECK(log_psi_c(det, 0.3, n) == doctest::Approx(0.3 * (static_cast<double>(n) - 1.0)).epsilon(1e-13));
  }
  const auto two = two_point_law(10);
  DisorderSample zero = fixed_sample(std::vector<double>(8, 0.0));
  CHECK(std::exp(log_psi(two, 0.2, 6)) ==
        doctest::Approx(brute_force_free(two, zero, 0.0, 0.0, 0.2, 6)).epsilon(1e-12));
  CHECK(std::exp(log_psi_c(two, 0.2, 6)) ==
        doctest::Approx(brute_force_constrained(two, zero, 0.0, 0.0, 0.2, 0, 6)).epsilon(1e-12));
  const auto tab = psi_table(law, 0.05, 200);
  CHECK(tab.log_psi[200] == doctest::Approx(log_psi(law, 0.05, 200)).epsilon(1e-14));
  CHECK(tab.log_psi_c[137] == doctest::Approx(log_psi_c(law, 0.05, 137)).epsilon(1e-14));
}

TEST_CASE("large h stays finite and matches the homogeneous growth") {
  const auto det = deterministic_law(5000);
  // Every site pinned: log Z^c = delta (n - 1) even when that is huge.
  CHECK(log_psi_c(det, 2.0, 5000) == doctest::Approx(2.0 * 4999.0).epsilon(1e-12));
  const auto& law = law75();
  const double big = log_psi_c(law, 3.0, 8000);
  CHECK(std::isfinite(big));
  CHECK(big > 8000.0 * 2.0);
  const double small = log_psi_c(law, -5.0, 8000);
  CHECK(std::isfinite(small));
}

TEST_CASE("exact expectation identities by Rademacher enumeration") {
  const auto& law = law75();
  for (std::size_t n : {2, 5, 8}) {
    for (double beta : {0.3, 0.9}) {
      const double h = 0.15;
      const auto m = rademacher_moments(law, beta, h, n);
      CHECK(m.mean == doctest::Approx(std::exp(log_psi_c(law, h, n))).epsilon(1e-12));
      const auto m0 = rademacher_moments(law, beta, 0.0, n);
      const auto inter = intersection_law(law, n);
      const auto rad = DisorderLaw::rademacher();
      const double delta = rad.lambda(2.0 * beta) - 2.0 * rad.lambda(beta);
      CHECK(m0.second == doctest::Approx(std::exp(log_psi_c(inter, delta, n))).epsilon(1e-12));
    }
  }
}

TEST_CASE("Monte Carlo expectation identities") {
  const auto& law = law75();
  const auto scale = WeakCouplingScale::from_law(law, 512, 1.0, 0.5);
  const auto mean = mean_partition_identity_check(law, DisorderLaw::gaussian(), scale, 1.0, 2000, 42);
  CHECK(std::abs(mean.z_score) < 4.0);

  const auto zero_h = WeakCouplingScale::from_law(law, 512, 1.0, 0.0);
  const auto m0 = mean_partition_identity_check(law, DisorderLaw::gaussian(), zero_h, 0.5, 2000, 43);
  CHECK(m0.exact == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m0.estimate - 1.0) < 4.0 * m0.std_error);

  const auto s2 = WeakCouplingScale::from_law(law, 256, 1.0, 0.0);
  const auto sec = second_moment_check(law, DisorderLaw::gaussian(), s2, 1.0, 5000, 44);
  CHECK(std::abs(sec.z_score) < 4.0);

  const auto flat = WeakCouplingScale::from_law(law, 256, 0.0, 0.0);
  const auto sec0 = second_moment_check(law, DisorderLaw::gaussian(), flat, 1.0, 10, 45);
  CHECK(sec0.estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sec0.exact == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weak coupling scale signs") {
  const auto& law = law75();
  const auto s = WeakCouplingScale::from_law(law, 1000, 1.0, -0.5);
  CHECK(s.beta_N() > 0.0);
  CHECK(s.h_N() < 0.0);
  CHECK(s.beta_N() == doctest::Approx(law.effective_L()(1000.0) / std::pow(1000.0, 0.25)));
  CHECK(WeakCouplingScale::from_law(law, 1000, 0.0, 0.0).beta_N() == 0.0);
}

TEST_CASE("monotone and log-convex in h") {
  const auto& law = law75();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed, 9);
    const auto omega = sample_disorder(DisorderLaw::gaussian(), 300, rng);
    const double beta = 0.4, lam = 0.08;
    const double step = 0.01;
    for (double h : {-0.2, 0.0, 0.2}) {
      const double c0 = log_z_constrained(law, omega, beta, lam, h - step, 0, 300);
      const double c1 = log_z_constrained(law, omega, beta, lam, h, 0, 300);
      const double c2 = log_z_constrained(law, omega, beta, lam, h + step, 0, 300);
      CHECK(c1 > c0);
      CHECK(c2 > c1);
      CHECK(c2 - 2.0 * c1 + c0 >= -1e-9);
      const double f0 = log_z_free(law, omega, beta, lam, h - step, 300);
      const double f1 = log_z_free(law, omega, beta, lam, h, 300);
      const double f2 = log_z_free(law, omega, beta, lam, h + step, 300);
      CHECK(f1 > f0);
      CHECK(f2 > f1);
      CHECK(f2 - 2.0 * f1 + f0 >= -1e-9);
    }
  }
}

TEST_CASE("moment boundedness does not blow up as N doubles") {
  const auto& law = law75();
  const std::size_t ns[] = {128, 256, 512, 1024};
  for (double p : {2.0, -2.0}) {
    const auto sup = moment_sup_trend(law, DisorderLaw::gaussian(), 1.0, 0.0, p, ns, 8, 400, 7);
    REQUIRE(sup.size() == 4);
    for (double v : sup) CHECK(std::isfinite(v));
    CHECK(sup.back() < 2.0 * sup.front());
  }
}
