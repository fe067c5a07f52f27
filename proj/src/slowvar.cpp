#include "pin/slowvar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pin/error.hpp"

namespace pin {

SlowlyVarying SlowlyVarying::constant(double c) {
  if (!(c > 0.0)) throw DomainError("constant slowly varying function must be positive");
  return {SlowFamily::constant, c, 1.0};
}

SlowlyVarying SlowlyVarying::log_power(double b) { return {SlowFamily::log_power, b, 1.0}; }

SlowlyVarying SlowlyVarying::from_key(std::string_view key, double param) {
  if (key == "const") return constant(param);
  if (key == "logpow") return log_power(param);
  throw DomainError("unknown slowly varying family '" + std::string(key) + "'");
}

double SlowlyVarying::operator()(double n) const {
  switch (family_) {
    case SlowFamily::constant:
      return scale_ * param_;
    case SlowFamily::log_power:
      return scale_ * std::pow(std::log(std::numbers::e + n), param_);
  }
  return scale_;
}

double SlowlyVarying::eval_log(double log_n) const {
  if (family_ == SlowFamily::constant) return scale_ * param_;
  // log(e + e^y) = max(1, y) + log1p(exp(-|y - 1|))
  const double lg = std::max(1.0, log_n) + std::log1p(std::exp(-std::abs(log_n - 1.0)));
  return scale_ * std::pow(lg, param_);
}

SlowlyVarying SlowlyVarying::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("slowly varying rescale factor must be positive");
  SlowlyVarying out = *this;
  out.scale_ *= factor;
  return out;
}

std::string SlowlyVarying::key() const {
  return family_ == SlowFamily::constant ? "const" : "logpow";
}

namespace {

// Counts j < i with v[j] < v[i] - shift (or j > i when `forward` is false).
std::size_t count_dominated(const std::vector<double>& v, double shift, bool forward) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> tree(sorted.size() + 1, 0);
  auto add = [&](std::size_t pos) {
    for (++pos; pos < tree.size(); pos += pos & (~pos + 1)) ++tree[pos];
  };
  auto prefix = [&](std::size_t count) {
    std::size_t s = 0;
    for (; count > 0; count -= count & (~count + 1)) s += tree[count];
    return s;
  };
  std::size_t total = 0;
  const std::size_t n = v.size();
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = forward ? step : n - 1 - step;
    const double threshold = v[i] - shift;
    const auto below = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), threshold) - sorted.begin());
    total += prefix(below);
    add(static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin()));
  }
  return total;
}

}  // namespace

PotterReport potter_report(const SlowlyVarying& L, double delta, std::span<const double> grid,
                           std::optional<double> forced_c) {
  if (grid.empty()) throw DomainError("potter_report: empty grid");
  if (!(delta > 0.0)) throw DomainError("potter_report: delta must be positive");

  std::vector<double> pts(grid.begin(), grid.end());
  std::sort(pts.begin(), pts.end());
  const std::size_t n = pts.size();
  // a = log L - delta*log(n+1) handles pairs m > l; b = log L + delta*log(n+1) handles m < l.
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::log(L(pts[i]));
    const double y = std::log(pts[i] + 1.0);
    a[i] = g - delta * y;
    b[i] = g + delta * y;
  }
  double sup = 0.0;
  double run_min = a[0];
  for (std::size_t i = 1; i < n; ++i) {
    sup = std::max(sup, a[i] - run_min);
    run_min = std::min(run_min, a[i]);
  }
  run_min = b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    sup = std::max(sup, b[i] - run_min);
    run_min = std::min(run_min, b[i]);
  }

  PotterReport rep;
  rep.c_delta = std::exp(sup);
  rep.pairs = n * (n - 1);
  const double log_c = forced_c ? std::log(*forced_c) : sup;
  const double shift = log_c + 1e-12 * std::max(1.0, std::abs(log_c));
  rep.violations = count_dominated(a, shift, true) + count_dominated(b, shift, false);
  return rep;
}

double de_bruijn_conjugate(const std::function<double(double)>& M, double x, double tol,
                           const DeBruijnOptions& opts) {
  if (!(tol > 0.0)) throw DomainError("de_bruijn_conjugate: tol must be positive");
  if (!(x > 0.0)) throw DomainError("de_bruijn_conjugate: x must be positive");
  double y = 1.0 / M(x);
  if (!std::isfinite(y) || y <= 0.0) throw DomainError("de_bruijn_conjugate: M undefined at x");
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double next = (1.0 - opts.damping) * y + opts.damping / M(x * y);
    const double change = std::abs(next - y) / std::abs(next);
    y = next;
    if (change < tol) {
      const double residual = std::abs(y * M(x * y) - 1.0);
      if (residual < 10.0 * tol) return y;
      throw ConvergenceError("de_bruijn_conjugate: stalled with residual " + std::to_string(residual), y);
    }
  }
  throw ConvergenceError("de_bruijn_conjugate: iteration cap reached", y);
}

UniversalScale::UniversalScale(double alpha, SlowlyVarying L) : alpha_(alpha), L_(L) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("UniversalScale: alpha must lie in (1/2, 1)");
}

double UniversalScale::M(double x) const {
  return 1.0 / L_.eval_log(std::log(x) * 2.0 / (2.0 * alpha_ - 1.0));
}

double UniversalScale::M_sharp(double x, double tol) const {
  return de_bruijn_conjugate([this](double v) { return M(v); }, x, tol);
}

double UniversalScale::tilde_L(double x, double tol) const {
  return std::pow(M_sharp(x, tol), -1.0 / (2.0 * alpha_ - 1.0));
}

}  // namespace pin
