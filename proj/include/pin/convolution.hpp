#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pin::conv {

enum class Summation { plain, compensated };

/// Solves the causal convolution equation
///   y[n] = b[n] + sign * sum_{k=0}^{n-1} y[k] a[n-k],   n = 1 .. y.size()-1
/// in place. y[0] is taken as given, a[0] is never read, and an empty `b`
/// means b = 0. Quadratic cost, blocked into register tiles.
void causal_solve(std::span<const double> a, std::span<const double> b, double sign,
                  std::span<double> y, Summation mode = Summation::compensated);

/// Values y[n] = mantissa[n] * exp(log_scale[n]) with a piecewise constant
/// log scale, so that sequences growing or decaying exponentially stay
/// representable.
struct ScaledSeries {
  std::vector<double> mantissa;
  std::vector<double> log_scale;

  std::size_t size() const { return mantissa.size(); }
  double log_value(std::size_t n) const;
};

/// Pinned recursion y[0] = 1, y[n] = exp(x[n]) * sum_{k<n} y[k] a[n-k] for
/// n = 1 .. n_max. Requires a.size() > n_max and x.size() > n_max.
ScaledSeries pinned_solve(std::span<const double> a, std::span<const double> x, std::size_t n_max);

/// Linear convolution c[n] = sum_k p[k] q[n-k] for n < out_len via FFT.
std::vector<double> fft_convolve(std::span<const double> p, std::span<const double> q, std::size_t out_len);

}  // namespace pin::conv
