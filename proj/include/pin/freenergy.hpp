#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pin/disorder.hpp"
#include "pin/renewal.hpp"
#include "pin/rng.hpp"
#include "pin/weakcoupling.hpp"

namespace pin {

/// Quenched free energy from F_N = (1/N) mean log Z^c(0, N), one value per N.
struct FreeEnergyEstimate {
  double beta = 0.0;
  double h = 0.0;
  std::size_t replicas = 0;
  SeedRecord seed;
  std::vector<std::size_t> N_list;
  std::vector<double> F_N;
  std::vector<double> std_error;

  double F = 0.0;      // largest-N value clamped at 0
  double F_raw = 0.0;  // largest-N value before the clamp
  std::string method = "largest_N";
  bool trend_shrinking = true;  // successive |F_N differences| do not grow beyond noise
};

/// Replica r draws its disorder from Rng(seed, r) for every N. The total cost
/// sum N^2 * replicas must not exceed budget.
FreeEnergyEstimate free_energy(const RenewalLaw& law, const DisorderLaw& disorder, double beta, double h,
                               std::span<const std::size_t> N_list, std::size_t replicas, std::uint64_t seed,
                               double budget = kNoBudget);

/// Homogeneous free energy: the root F of sum_n K(n) exp(-F n) = exp(-h), or 0
/// when the root would be negative and K has unbounded support. The tail beyond
/// the table is continued as a power law for power-law laws.
double homogeneous_free_energy(const RenewalLaw& law, double h);

struct ContactFraction {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t N = 0;
  std::size_t replicas = 0;
};

/// Mean of l_N / N under the free-endpoint measure, from a central difference
/// of log Z(N) in h with step 1e-4 on each disorder sample.
ContactFraction contact_fraction(const RenewalLaw& law, const DisorderLaw& disorder, double beta, double h,
                                 std::size_t N, std::size_t replicas, std::uint64_t seed,
                                 double budget = kNoBudget);

/// Finite-N rule F_N(h) - (kappa * stderr(F_N) + c0 / N) whose sign change locates h_c.
struct CriticalSolver {
  double kappa = 3.0;
  double c0 = 2.0;
  double h_lo = 0.0;
  double h_hi = 1.0;
  double tol = 1e-4;    // final bracket width
  bool expand = false;  // widen an invalid bracket instead of failing
  int max_expand = 40;
};

struct CriticalPoint {
  double beta = 0.0;
  double h_c = 0.0;  // midpoint of the final bracket
  double ci_lo = 0.0, ci_hi = 0.0;
  std::size_t N = 0;
  std::size_t replicas = 0;
  SeedRecord seed;
  std::string rule;  // threshold rule id
  std::vector<std::pair<double, double>> trace;  // bracket after each step
  std::size_t evaluations = 0;
};

/// Bisection on the threshold rule with the same disorder samples at every h.
/// The interval comes from the roots of the rule with kappa -/+ 2, widened by
/// the final bracket width.
CriticalPoint critical_point(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                             const CriticalSolver& solver, std::size_t N, std::size_t replicas, std::uint64_t seed,
                             double budget = kNoBudget);

/// Widens [h_lo, h_hi] geometrically until rule(h_lo) <= 0 < rule(h_hi).
std::pair<double, double> expand_bracket(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                                         const CriticalSolver& solver, std::size_t N, std::size_t replicas,
                                         std::uint64_t seed, double budget = kNoBudget);

struct ScanPoint {
  CriticalPoint point;
  double scale = 0.0;  // L~_alpha(1/beta) beta^(2 alpha / (2 alpha - 1))
  double ratio = 0.0, ratio_lo = 0.0, ratio_hi = 0.0;
};

struct ScanResult {
  double alpha = 0.0;
  std::string disorder;
  std::size_t N = 0;
  std::size_t replicas = 0;
  double planned_cost = 0.0;
  bool complete = true;  // false when the budget ran out before the last beta
  std::vector<ScanPoint> points;  // sorted by beta

  double target_exponent = 0.0;
  double exponent = 0.0, exponent_se = 0.0;  // slope of log(h_c / L~) against log beta
  double plateau = 0.0, plateau_lo = 0.0, plateau_hi = 0.0;  // from the last two ratios
  bool plateau_consistent = false;
  double ratio_min = 0.0, ratio_max = 0.0;
};

/// h_c over a beta grid spanning at least half a decade with beta <= 0.5.
/// Brackets start from the ratio scale and are expanded as needed.
ScanResult universality_scan(const RenewalLaw& law, const DisorderLaw& disorder, std::span<const double> beta_grid,
                             std::size_t N, std::size_t replicas, std::uint64_t seed, CriticalSolver solver = {},
                             double budget = kNoBudget);

struct AlphaGt1Row {
  CriticalPoint point;
  double ratio = 0.0;  // h_c / beta^2
  double rel_err = 0.0;
};

struct AlphaGt1Report {
  double alpha = 0.0;
  double mean_return_time = 0.0;
  double target = 0.0;  // alpha / (2 (1 + alpha) E[tau_1])
  std::vector<AlphaGt1Row> rows;
};

AlphaGt1Report alpha_gt1_check(const RenewalLaw& law, const DisorderLaw& disorder, std::span<const double> beta_grid,
                               std::size_t N, std::size_t replicas, std::uint64_t seed, CriticalSolver solver = {},
                               double budget = kNoBudget);

struct SmoothingRow {
  double h = 0.0;
  double F = 0.0, std_error = 0.0;
  double bound = 0.0;  // (1 + alpha) / (2 beta^2) (h - h_c)^2
  bool violation = false;
  bool negative = false;  // F below zero by more than 3 stderr
};

struct SmoothingReport {
  double alpha = 0.0, beta = 0.0, h_c = 0.0;
  std::size_t N = 0;
  std::vector<SmoothingRow> rows;
  std::size_t violations = 0;
  std::size_t negatives = 0;
};

/// Checks 0 <= F_N(h) <= bound + 3 stderr at every h >= h_c with common disorder.
SmoothingReport smoothing_check(const RenewalLaw& law, const DisorderLaw& disorder, double beta, double h_c,
                                std::span<const double> h_grid, std::size_t N, std::size_t replicas,
                                std::uint64_t seed, double budget = kNoBudget);

/// F_N with common disorder across an h grid, sorted by h.
std::vector<FreeEnergyEstimate> free_energy_sweep(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                                                  std::span<const double> h_grid, std::size_t N,
                                                  std::size_t replicas, std::uint64_t seed,
                                                  double budget = kNoBudget);

/// beta, h, N, F, stderr for every N of every estimate.
void write_free_energy_csv(std::ostream& os, std::span<const FreeEnergyEstimate> rows);

/// beta, h_c, ci_lo, ci_hi.
void write_critical_csv(std::ostream& os, std::span<const CriticalPoint> rows);

/// One row per beta: h_c with its interval, the universal scale and the ratio.
void write_scan_csv(std::ostream& os, const ScanResult& scan);

/// Single row with the fitted exponent and the plateau estimate.
void write_scan_summary_csv(std::ostream& os, const ScanResult& scan);

}  // namespace pin
