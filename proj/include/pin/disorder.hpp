#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pin/rng.hpp"

namespace pin {

enum class DisorderKind { gaussian, uniform, rademacher, gamma_exp };

/// Law of the i.i.d. charges omega_n, standardized to mean 0 and variance 1.
///   gaussian     standard normal
///   uniform      uniform on [-sqrt 3, sqrt 3]
///   rademacher   +-1 with probability 1/2
///   gamma_exp    density proportional to exp(-|x / s|^gamma), gamma in (1, 2)
class DisorderLaw {
 public:
  static DisorderLaw gaussian();
  static DisorderLaw uniform();
  static DisorderLaw rademacher();
  static DisorderLaw gamma_exp(double gamma);

  /// Config keys "gaussian", "uniform", "rademacher", "gamma_exp".
  static DisorderLaw from_key(std::string_view kind, double gamma = 1.5);

  DisorderKind kind() const { return kind_; }
  std::string key() const;

  /// Concentration exponent: 2 except for gamma_exp.
  double gamma() const { return gamma_; }

  /// Radius of finiteness of the log-moment generating function.
  double beta0() const;

  /// log E[exp(beta omega)].
  double lambda(double beta) const;

  double draw(Rng& rng) const;

 private:
  DisorderLaw(DisorderKind k, double gamma, double scale) : kind_(k), gamma_(gamma), scale_(scale) {}

  DisorderKind kind_;
  double gamma_;
  double scale_;  // standard deviation of the unscaled gamma_exp density
};

/// Charges for sites 1..N; omega[0] is an unused zero so that omega[n]
/// belongs to site n.
struct DisorderSample {
  std::vector<double> omega;
  SeedRecord seed;

  std::size_t size() const { return omega.empty() ? 0 : omega.size() - 1; }
};

DisorderSample sample_disorder(const DisorderLaw& law, std::size_t n, Rng& rng);

struct LeftTailReport {
  double gamma_hat = 0.0;
  double gamma_lo = 0.0;  // approximate 95% interval from the regression
  double gamma_hi = 0.0;
  double A_hat = 0.0;     // smallest A with P(X <= -x) <= A exp(-x^gamma / B) on the window
  double B_hat = 0.0;
  std::size_t points = 0;
};

/// Fits P(X <= -x) ~ A exp(-x^gamma / B) on the deepest decade of the
/// empirical left tail: tail probabilities from 10/n (the tenth smallest
/// sample) to 100/n, restricted to x > 0. The exponent comes from regressing
/// log(-log P) on log x.
LeftTailReport left_tail_fit(std::span<const double> samples);

}  // namespace pin
