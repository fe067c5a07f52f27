#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pin/continuum_psi.hpp"
#include "pin/error.hpp"

using namespace pin;

namespace {

// Closed forms of the iterated integrals (homogeneity plus Beta integrals):
// free k-th coefficient Gamma(nu)^k / Gamma(k nu + 1), constrained
// Gamma(nu)^(k+1) / Gamma((k+1) nu).
double ml_free(double nu, double x) {
  double s = 1.0;
  for (int k = 1; k < 400; ++k) {
    s += std::exp(k * std::lgamma(nu) - std::lgamma(k * nu + 1.0)) * std::pow(x, k);
  }
  return s;
}

double ml_constrained(double nu, double x) {
  double s = 1.0;
  for (int k = 1; k < 400; ++k) {
    s += std::exp((k + 1) * std::lgamma(nu) - std::lgamma((k + 1) * nu)) * std::pow(x, k);
  }
  return s;
}

}  // namespace

TEST_CASE("continuum series at zero coupling") {
  const auto a = psi_hat(0.6, 0.0, 1.3);
  CHECK(a.value == 1.0);
  CHECK(a.terms.empty());
  CHECK(psi_hat_c(0.6, 0.0, 0.7).value == 1.0);
}

TEST_CASE("first terms") {
  const auto a = psi_hat(0.5, 1.0, 1.0);
  REQUIRE(!a.terms.empty());
  CHECK(a.terms[0] == doctest::Approx(2.0).epsilon(1e-12));
  const auto c = psi_hat_c(0.5, 1.0, 1.0);
  CHECK(c.terms[0] == doctest::Approx(M_PI).epsilon(1e-8));
  // delta_hat t^nu / nu in general.
  const auto b = psi_hat(0.7, 0.4, 2.5);
  CHECK(b.terms[0] == doctest::Approx(0.4 * std::pow(2.5, 0.7) / 0.7).epsilon(1e-12));
}

TEST_CASE("matches the closed-form series") {
  for (double nu : {0.5, 0.6, 0.75}) {
    for (double dh : {1.0, 0.3, -1.0}) {
      for (double t : {0.5, 1.0}) {
        const double x = dh * std::pow(t, nu);
        const auto a = psi_hat(nu, dh, t);
        const auto c = psi_hat_c(nu, dh, t);
        CHECK(std::abs(a.value - ml_free(nu, x)) < 1e-6);
        CHECK(std::abs(c.value - ml_constrained(nu, x)) < 1e-6);
        CHECK(a.truncation_bound < 1e-8);
      }
    }
  }
}

TEST_CASE("scaling relation") {
  const double nu = 0.6, c = 2.0;
  for (double t : {0.3, 1.0}) {
    CHECK(psi_hat_c(nu, 1.0, c * t).value ==
          doctest::Approx(psi_hat_c(nu, std::pow(c, nu), t).value).epsilon(1e-6));
    CHECK(psi_hat(nu, 1.0, c * t).value == doctest::Approx(psi_hat(nu, std::pow(c, nu), t).value).epsilon(1e-6));
  }
}

TEST_CASE("positivity, monotonicity and continuity") {
  const double nu = 0.75;
  double prev = 1.0, prev_c = 1.0;
  for (double dh : {0.25, 0.5, 1.0, 1.5}) {
    const auto a = psi_hat(nu, dh, 1.0);
    const auto c = psi_hat_c(nu, dh, 1.0);
    for (double v : a.terms) CHECK(v > 0.0);
    for (double v : c.terms) CHECK(v > 0.0);
    CHECK(a.value > prev);
    CHECK(c.value > prev_c);
    prev = a.value;
    prev_c = c.value;
  }
  double worst = 0.0;
  for (double t = 0.1; t < 1.0; t += 0.1) {
    worst = std::max(worst, std::abs(psi_hat(nu, 1.0, t + 1e-6).value - psi_hat(nu, 1.0, t).value));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("factorial decay envelope dominates the coefficients") {
  for (double nu : {0.5, 0.75}) {
    const auto& c = psi_coefficients(nu, {});
    for (const auto* list : {&c.free, &c.constrained}) {
      const auto env = fit_decay_envelope(*list);
      CHECK(env.c2 > 0.0);
      for (std::size_t k = 1; k <= list->size(); ++k) CHECK(std::log((*list)[k - 1]) <= env.log_bound(k));
    }
  }
}

TEST_CASE("truncation bound covers the omitted terms") {
  const double nu = 0.6, dh = 1.0;
  const auto a = psi_hat(nu, dh, 1.0, 1e-4);
  const double omitted = ml_free(nu, dh) - 1.0 - [&] {
    double s = 0.0;
    for (std::size_t k = 1; k <= a.k_max; ++k) s += std::exp(k * std::lgamma(nu) - std::lgamma(k * nu + 1.0));
    return s;
  }();
  CHECK(omitted <= a.truncation_bound);
  CHECK(a.truncation_bound < 1e-4);
}

TEST_CASE("mesh refinement stability") {
  for (double nu : {0.5, 0.75}) {
    const auto a = psi_hat(nu, 1.0, 1.0);
    const auto c = psi_hat_c(nu, 1.0, 1.0);
    CHECK(a.quadrature_error < 1e-6);
    CHECK(c.quadrature_error < 1e-6);
  }
}

TEST_CASE("unreachable tolerance is a convergence diagnostic") {
  CHECK_THROWS_AS(psi_hat(0.25, 1.0, 1.0), ConvergenceError);
  CHECK_THROWS_AS(psi_hat(1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(psi_hat(0.5, 1.0, 0.0), DomainError);
}

TEST_CASE("discrete to continuum convergence") {
  const auto law = build_renewal(0.75, SlowlyVarying::constant(1.0), 1024);
  std::vector<double> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(i / 16.0);
  const std::size_t ns[] = {64, 256, 1024};
  const auto zero = uconv_check(law, 0.75, 0.0, grid, ns);
  for (const auto& r : zero) {
    CHECK(r.sup_dev < 1e-12);
    CHECK(r.sup_dev_c < 1e-12);
  }
  const auto rows = uconv_check(law, 0.75, 1.0, grid, ns);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].sup_dev < rows[i - 1].sup_dev);
    CHECK(rows[i].sup_dev_c < rows[i - 1].sup_dev_c);
  }
  CHECK_THROWS_AS(uconv_check(law, 0.5, 1.0, grid, ns), DomainError);
}

TEST_CASE("psi csv") {
  const std::vector<PsiSeries> f = {psi_hat(0.5, 0.0, 1.0)}, c = {psi_hat_c(0.5, 0.0, 1.0)};
  std::ostringstream os;
  write_psi_csv(os, f, c);
  const auto s = os.str();
  CHECK(s.find("nu,delta_hat,t,psi_hat,psi_hat_c,k_max,trunc_bound") != std::string::npos);
  CHECK(s.find("0.5,0,1,1,1,0,0") != std::string::npos);
}
