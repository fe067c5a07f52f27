#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pin/disorder.hpp"
#include "pin/renewal.hpp"
#include "pin/rng.hpp"

namespace pin {

/// First and last points of a set inside each visited unit block B_j = [j-1, j).
struct CoarseGrain {
  std::vector<std::int64_t> J;  // strictly increasing visited block indices
  std::vector<double> s;        // first point in block J[k]
  std::vector<double> t;        // last point in block J[k]

  std::size_t size() const { return J.size(); }
  /// Number of visited blocks with index at most horizon.
  std::size_t m(std::int64_t horizon) const;
};

/// Decomposes a sorted set of nonnegative points.
CoarseGrain decompose(std::span<const double> points);

/// Coarse-grained skeleton of the alpha-stable regenerative set started at 0,
/// for all blocks with index <= t_max.
struct RegenSample {
  double alpha = 0.0;
  std::int64_t t_max = 0;
  CoarseGrain cg;
};

RegenSample sample_regenerative_cg(double alpha, std::int64_t t_max, Rng& rng);

/// Beta(a, b) variate by Johnk's method, valid for a, b < 1.
double beta_johnk(double a, double b, Rng& rng);

/// Last point before the integer boundary n for the set started at x < n:
/// x + (n - x) Beta(alpha, 1 - alpha).
double sample_last_before(double alpha, double x, double n, Rng& rng);

/// First point after n given the last point u before it: u + (n - u) U^(-1/alpha).
double sample_first_after(double alpha, double u, double n, Rng& rng);

/// P_x(g_t <= u) by numerical integration of the density
/// (C_alpha / alpha) (v - x)^(alpha - 1) (t - v)^(-alpha) over (x, u).
double last_point_cdf(double alpha, double x, double t, double u);

/// Sum over visited blocks of log Z^c(s_k, t_k), for blocks with index <= horizon.
double cg_hamiltonian(const CoarseGrain& cg, std::int64_t horizon,
                      const std::function<double(double, double)>& log_zc);

struct CgIdentityReport {
  double lhs = 0.0;            // sum over skeletons of weight times product of block factors
  double rhs = 0.0;            // Z(Nt) by the direct recursion
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  double total_probability = 0.0;  // sum of the skeleton probabilities, should be 1
  std::uint64_t signatures = 0;    // number of coarse-grained skeletons summed
};

/// Exact check of Z(Nt) = E[prod_k (block factor)] by summing over every
/// coarse-grained skeleton of tau / N in [0, t). Each block factor is
/// e^{x_a} Z^c(a, b) e^{x_b} for its first and last lattice points a <= b
/// (endpoint energies counted once, none at the origin), and the last visited
/// point b contributes Kbar(Nt - b) + K(Nt - b) e^{x_Nt} for the site Nt.
CgIdentityReport verify_cg_identity(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda,
                                    double h, std::size_t N, std::size_t t);

enum class LemmaEvent { near_block_end, short_block };

std::string lemma_event_key(LemmaEvent e);

struct TailEstimate {
  double gamma = 0.0;
  LemmaEvent event = LemmaEvent::short_block;
  double p_hat = 0.0;  // maximum over the conditioning grid
  double ci = 0.0;     // two-standard-error half width at the maximizing point
  double worst_y = 0.0;
};

struct LemmaTailReport {
  double alpha = 0.0;
  std::vector<TailEstimate> rows;
  double slope_near_end = 0.0;   // log-log slope, expected 1 - alpha
  double slope_short = 0.0;      // expected alpha
  double slope_near_end_se = 0.0;
  double slope_short_se = 0.0;
};

/// Estimates sup_y P(t_2 in [J_2 - gamma, J_2] | t_1 = y) and
/// sup_y P(t_2 - s_2 <= gamma | t_1 = y) by sampling directly from the
/// conditional law given t_1 = y (which does not depend on the start x).
/// The same random numbers are reused across gamma.
LemmaTailReport lemma_tail_estimates(double alpha, std::span<const double> gamma_list, std::size_t samples,
                                     std::uint64_t seed, std::span<const double> y_grid = {});

/// Regenerative property check: the law of s_2 - t_1 given t_1 near y is
/// compared between two starting points x_a, x_b (t_1 binned within +-0.01).
/// Returns the two-sample Kolmogorov-Smirnov p-value.
double regenerative_property_pvalue(double alpha, double y, double x_a, double x_b, std::size_t samples,
                                    std::uint64_t seed);

/// Columns sample, alpha, k, J_k, s_k, t_k.
void write_cg_csv(std::ostream& os, std::span<const RegenSample> samples);

/// Columns alpha, gamma, event, p_hat, ci.
void write_tail_csv(std::ostream& os, const LemmaTailReport& report);

}  // namespace pin
