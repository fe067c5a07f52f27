#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace pin {

enum class SlowFamily { constant, log_power };

/// A slowly varying function L. Evaluated at e + n so that L(0) is finite.
///   constant(c):   L(n) = c
///   log_power(b):  L(n) = s * (log(e + n))^b   (s = 1 unless rescaled)
class SlowlyVarying {
 public:
  SlowlyVarying() = default;

  static SlowlyVarying constant(double c = 1.0);
  static SlowlyVarying log_power(double b);

  /// Config keys: "const" (param = c) and "logpow" (param = b).
  static SlowlyVarying from_key(std::string_view key, double param);

  double operator()(double n) const;

  /// L(exp(log_n)), finite for arguments far beyond the double range.
  double eval_log(double log_n) const;

  /// The same function multiplied by a positive constant.
  SlowlyVarying scaled(double factor) const;

  SlowFamily family() const { return family_; }
  double param() const { return param_; }
  double scale() const { return scale_; }
  std::string key() const;

 private:
  SlowlyVarying(SlowFamily f, double p, double s) : family_(f), param_(p), scale_(s) {}

  SlowFamily family_ = SlowFamily::constant;
  double param_ = 1.0;
  double scale_ = 1.0;
};

struct PotterReport {
  double c_delta = 1.0;          // smallest C making the bound hold on the grid
  std::size_t violations = 0;    // ordered pairs breaking the bound with the constant used
  std::size_t pairs = 0;         // ordered pairs examined
};

/// Fits the smallest C with
///   L(m)/L(l) <= C * max{(m+1)/(l+1), (l+1)/(m+1)}^delta
/// over all pairs of the grid, then counts violations. With `forced_c` the
/// violations are counted against that constant instead of the fitted one.
PotterReport potter_report(const SlowlyVarying& L, double delta, std::span<const double> grid,
                           std::optional<double> forced_c = std::nullopt);

struct DeBruijnOptions {
  double damping = 0.5;
  int max_iterations = 10000;
};

/// Approximates the de Bruijn conjugate M#(x) of a slowly varying M, i.e. the
/// y solving y = 1 / M(x * y), by damped fixed-point iteration. On return
/// |y * M(x * y) - 1| < 10 * tol; otherwise ConvergenceError carries the
/// last iterate.
double de_bruijn_conjugate(const std::function<double(double)>& M, double x, double tol,
                           const DeBruijnOptions& opts = {});

/// The universal scale L~_alpha(x) = M#(x)^(-1/(2 alpha - 1)) with
/// M(x) = 1 / L(x^(2/(2 alpha - 1))).
class UniversalScale {
 public:
  UniversalScale(double alpha, SlowlyVarying L);

  double alpha() const { return alpha_; }
  const SlowlyVarying& L() const { return L_; }

  double M(double x) const;
  double M_sharp(double x, double tol = 1e-12) const;
  double tilde_L(double x, double tol = 1e-12) const;

 private:
  double alpha_;
  SlowlyVarying L_;
};

}  // namespace pin
