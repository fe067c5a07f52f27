#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pin/error.hpp"
#include "pin/slowvar.hpp"

using namespace pin;

namespace {
std::vector<double> int_grid(int lo, int hi) {
  std::vector<double> g(static_cast<std::size_t>(hi - lo + 1));
  std::iota(g.begin(), g.end(), static_cast<double>(lo));
  return g;
}
}  // namespace

TEST_CASE("slowly varying evaluation") {
  CHECK(SlowlyVarying::constant(1.0)(1e6) == 1.0);
  CHECK(SlowlyVarying::log_power(1.0)(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double e = std::numbers::e;
  CHECK(SlowlyVarying::log_power(2.0)(e * e - e) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(SlowlyVarying::from_key("logpow", 1.0).family() == SlowFamily::log_power);
  CHECK_THROWS_AS(SlowlyVarying::from_key("oscillating", 1.0), DomainError);
}

TEST_CASE("eval_log agrees with direct evaluation and stays finite") {
  const auto L = SlowlyVarying::log_power(1.5).scaled(0.3);
  for (double n : {0.0, 1.0, 10.0, 1e5, 1e12}) {
    CHECK(L.eval_log(std::log(n)) == doctest::Approx(L(n)).epsilon(1e-12));
  }
  CHECK(std::isfinite(L.eval_log(5000.0)));
  CHECK(L.eval_log(5000.0) == doctest::Approx(0.3 * std::pow(5000.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("slow variation on a grid") {
  for (const auto& L : {SlowlyVarying::constant(2.0), SlowlyVarying::log_power(1.0), SlowlyVarying::log_power(-2.0)}) {
    CHECK(L(0.0) > 0.0);
    for (double a : {0.5, 2.0, 10.0}) {
      // The ratio approaches 1 as n grows; far out via the log argument.
      const double near = std::abs(L(std::floor(a * 1e6)) / L(1e6) - 1.0);
      const double far = std::abs(L.eval_log(std::log(a) + 1e4) / L.eval_log(1e4) - 1.0);
      CHECK(far <= near);
      CHECK(far < 1e-3);
    }
  }
}

TEST_CASE("potter report") {
  const auto grid = int_grid(1, 10000);
  auto r = potter_report(SlowlyVarying::constant(1.0), 0.1, grid);
  CHECK(r.c_delta == 1.0);
  CHECK(r.violations == 0);

  r = potter_report(SlowlyVarying::log_power(1.0), 0.1, grid);
  CHECK(std::isfinite(r.c_delta));
  CHECK(r.violations == 0);

  r = potter_report(SlowlyVarying::log_power(1.0), 1e-6, grid, 1.0);
  CHECK(r.violations > 0);

  CHECK_THROWS_AS(potter_report(SlowlyVarying::constant(1.0), 0.1, std::vector<double>{}), DomainError);
}

TEST_CASE("potter report against a quadratic scan") {
  const auto grid = int_grid(1, 300);
  const auto L = SlowlyVarying::log_power(2.0);
  const double delta = 0.05;
  double sup = 1.0;
  for (double m : grid) {
    for (double l : grid) {
      const double ratio = std::max((m + 1) / (l + 1), (l + 1) / (m + 1));
      sup = std::max(sup, L(m) / L(l) / std::pow(ratio, delta));
    }
  }
  const auto r = potter_report(L, delta, grid);
  CHECK(r.c_delta == doctest::Approx(sup).epsilon(1e-12));
  CHECK(r.violations == 0);
  CHECK(r.pairs == grid.size() * (grid.size() - 1));

  // A constant below the supremum must be broken by exactly the pairs the
  // quadratic scan finds.
  const double c = 0.9 * sup;
  std::size_t brute = 0;
  for (double m : grid) {
    for (double l : grid) {
      if (m == l) continue;
      const double ratio = std::max((m + 1) / (l + 1), (l + 1) / (m + 1));
      if (L(m) / L(l) > c * std::pow(ratio, delta) * (1 + 1e-12)) ++brute;
    }
  }
  CHECK(potter_report(L, delta, grid, c).violations == brute);
}

TEST_CASE("potter property: delta 0.5 over 1..1e5 never violated with fitted constant") {
  const auto grid = int_grid(1, 100000);
  for (const auto& L : {SlowlyVarying::constant(3.0), SlowlyVarying::log_power(1.0), SlowlyVarying::log_power(-1.0)}) {
    CHECK(potter_report(L, 0.5, grid).violations == 0);
  }
}

TEST_CASE("de Bruijn conjugate") {
  CHECK(de_bruijn_conjugate([](double) { return 1.0; }, 100.0, 1e-10) == doctest::Approx(1.0));
  CHECK(de_bruijn_conjugate([](double) { return 2.0; }, 10.0, 1e-10) == doctest::Approx(0.5));

  auto M = [](double n) { return 1.0 / std::log(std::numbers::e + n); };
  const double tol = 1e-10;
  const double y = de_bruijn_conjugate(M, 1e6, tol);
  CHECK(std::abs(y * M(1e6 * y) - 1.0) < 10 * tol);

  DeBruijnOptions capped;
  capped.max_iterations = 1;
  CHECK_THROWS_AS(de_bruijn_conjugate(M, 1e6, 1e-14, capped), ConvergenceError);
  try {
    de_bruijn_conjugate(M, 1e6, 1e-14, capped);
  } catch (const ConvergenceError& e) {
    CHECK(e.last_value() > 0.0);
  }
}

TEST_CASE("universal scale") {
  CHECK(UniversalScale(0.75, SlowlyVarying::constant(1.0)).tilde_L(1e3) == 1.0);
  for (double x : {1e-3, 1.0, 7.0, 1e9}) {
    CHECK(UniversalScale(0.6, SlowlyVarying::constant(1.0)).tilde_L(x) == 1.0);
  }
  // Constant L != 1 still gives a constant scale.
  const UniversalScale c3(0.7, SlowlyVarying::constant(3.0));
  CHECK(c3.tilde_L(10.0) == doctest::Approx(c3.tilde_L(1e8)).epsilon(1e-12));

  const UniversalScale s(0.75, SlowlyVarying::log_power(1.0));
  const double x = 1e4;
  const double y = s.M_sharp(x, 1e-12);
  CHECK(std::abs(y * s.M(x * y) - 1.0) < 1e-11);
  CHECK(s.tilde_L(x) == doctest::Approx(std::pow(y, -2.0)).epsilon(1e-10));

  CHECK_THROWS_AS(UniversalScale(0.4, SlowlyVarying::constant(1.0)), DomainError);
}
