#include "pin/disorder.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pin/error.hpp"
#include "pin/stats.hpp"

namespace pin {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// log(sinh(x) / x), stable at both ends.
double log_sinhc(double x) {
  x = std::abs(x);
  if (x < 1e-4) return x * x / 6.0;
  if (x > 20.0) return x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x) / x);
}

// log E exp(b Y) for the unscaled density exp(-|y|^g) / (2 Gamma(1 + 1/g)).
double gamma_exp_log_mgf(double b, double g) {
  if (b == 0.0) return 0.0;
  const double ab = std::abs(b);
  const double ystar = std::pow(ab / g, 1.0 / (g - 1.0));
  const double peak = ab * ystar - std::pow(ystar, g);
  auto phi = [&](double y) { return std::exp(ab * y - std::pow(std::abs(y), g) - peak); };
  boost::math::quadrature::exp_sinh<double> half_line;
  boost::math::quadrature::tanh_sinh<double> segment;
  const double tol = 1e-13;
  const double right = half_line.integrate([&](double t) { return phi(ystar + t); }, 0.0,
                                           std::numeric_limits<double>::infinity(), tol);
  const double middle = segment.integrate(phi, 0.0, ystar, tol);
  const double left = half_line.integrate([&](double t) { return phi(-t); }, 0.0,
                                          std::numeric_limits<double>::infinity(), tol);
  const double norm = 2.0 * std::tgamma(1.0 + 1.0 / g);
  return peak + std::log(left + middle + right) - std::log(norm);
}

}  // namespace

DisorderLaw DisorderLaw::gaussian() { return {DisorderKind::gaussian, 2.0, 1.0}; }
DisorderLaw DisorderLaw::uniform() { return {DisorderKind::uniform, 2.0, 1.0}; }
DisorderLaw DisorderLaw::rademacher() { return {DisorderKind::rademacher, 2.0, 1.0}; }

DisorderLaw DisorderLaw::gamma_exp(double gamma) {
  if (!(gamma > 1.0 && gamma < 2.0)) throw DomainError("gamma_exp disorder needs gamma in (1, 2)");
  const double var = std::tgamma(3.0 / gamma) / std::tgamma(1.0 / gamma);
  return {DisorderKind::gamma_exp, gamma, std::sqrt(var)};
}

DisorderLaw DisorderLaw::from_key(std::string_view kind, double gamma) {
  if (kind == "gaussian") return gaussian();
  if (kind == "uniform") return uniform();
  if (kind == "rademacher") return rademacher();
  if (kind == "gamma_exp") return gamma_exp(gamma);
  throw DomainError("unknown disorder kind '" + std::string(kind) + "'");
}

std::string DisorderLaw::key() const {
  switch (kind_) {
    case DisorderKind::gaussian: return "gaussian";
    case DisorderKind::uniform: return "uniform";
    case DisorderKind::rademacher: return "rademacher";
    case DisorderKind::gamma_exp: return "gamma_exp";
  }
  return "unknown";
}

double DisorderLaw::beta0() const { return std::numeric_limits<double>::infinity(); }

double DisorderLaw::lambda(double beta) const {
  if (!(std::abs(beta) < beta0())) throw DomainError("lambda: |beta| outside the finiteness radius");
  switch (kind_) {
    case DisorderKind::gaussian:
      return beta * beta / 2.0;
    case DisorderKind::uniform:
      return log_sinhc(kSqrt3 * beta);
    case DisorderKind::rademacher: {
      const double a = std::abs(beta);
      return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
    }
    case DisorderKind::gamma_exp:
      return gamma_exp_log_mgf(beta / scale_, gamma_);
  }
  return 0.0;
}

double DisorderLaw::draw(Rng& rng) const {
  switch (kind_) {
    case DisorderKind::gaussian:
      return rng.normal();
    case DisorderKind::uniform:
      return kSqrt3 * (2.0 * rng.uniform() - 1.0);
    case DisorderKind::rademacher:
      return (rng() >> 63) ? 1.0 : -1.0;
    case DisorderKind::gamma_exp: {
      // Laplace proposal; exp(|y| - |y|^g) peaks at y = g^(-1/(g-1)).
      const double xs = std::pow(gamma_, -1.0 / (gamma_ - 1.0));
      const double log_bound = xs - std::pow(xs, gamma_);
      while (true) {
        const double e = rng.exponential();
        const double y = rng.uniform() < 0.5 ? -e : e;
        if (std::log(rng.uniform()) <= e - std::pow(e, gamma_) - log_bound) return y / scale_;
      }
    }
  }
  return 0.0;
}

DisorderSample sample_disorder(const DisorderLaw& law, std::size_t n, Rng& rng) {
  if (n < 1) throw DomainError("sample_disorder: need at least one site");
  DisorderSample s;
  s.seed = rng.record();
  s.omega.resize(n + 1);
  s.omega[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) s.omega[i] = law.draw(rng);
  return s;
}

LeftTailReport left_tail_fit(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 10000) throw DiagnosticError("left_tail_fit: need at least 10^4 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double depth = -s[9];
  if (!(depth > 0.0) || s.front() == s.back()) throw DiagnosticError("left_tail_fit: degenerate left tail");

  std::vector<double> lx, ly, xs, ps;
  const auto total = static_cast<double>(n);
  const double ten = 10.0 / total;  // tail probability at the tenth smallest sample
  for (std::size_t i = 9; i < n; ++i) {
    // Use the last index of a run of ties so that P is the empirical CDF.
    if (i + 1 < n && s[i + 1] == s[i]) continue;
    const double x = -s[i];
    const double p = static_cast<double>(i + 1) / total;
    if (x <= 0.0 || p > 10.0 * ten || p > 0.5) break;
    xs.push_back(x);
    ps.push_back(p);
    lx.push_back(std::log(x));
    ly.push_back(std::log(-std::log(p)));
  }
  if (xs.size() < 10) throw DiagnosticError("left_tail_fit: too few distinct tail points");
  if (lx.front() - lx.back() < 1e-6) throw DiagnosticError("left_tail_fit: tail window has no spread");

  const auto fit = stats::linear_fit(lx, ly);
  LeftTailReport rep;
  rep.points = xs.size();
  rep.gamma_hat = fit.slope;
  rep.gamma_lo = fit.slope - 2.0 * fit.slope_se;
  rep.gamma_hi = fit.slope + 2.0 * fit.slope_se;
  rep.B_hat = std::exp(-fit.intercept);
  double logA = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    logA = std::max(logA, std::log(ps[i]) + std::pow(xs[i], rep.gamma_hat) / rep.B_hat);
  }
  rep.A_hat = std::exp(logA);
  return rep;
}

}  // namespace pin
