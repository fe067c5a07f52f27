#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pin::stats {

/// Pairwise (cascade) summation. The association order depends only on the
/// length of the input, which keeps aggregates independent of scheduling.
double pairwise_sum(std::span<const double> xs);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;      // sample standard deviation (n-1)
  double std_error = 0.0;  // sd / sqrt(count)
};

Summary summarize(std::span<const double> xs);

/// Type-7 quantiles (linear interpolation between order statistics).
std::vector<double> quantiles(std::span<const double> xs, std::span<const double> probs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double residual_sd = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Requires >= 2 points;
/// standard errors need >= 3.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `xs`.
double ks_distance(std::span<const double> xs, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Asymptotic two-sample KS p-value (Kolmogorov distribution with the
/// Stephens small-sample correction).
double ks_two_sample_pvalue(std::span<const double> a, std::span<const double> b);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

}  // namespace pin::stats
