#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "pin/disorder.hpp"
#include "pin/renewal.hpp"
#include "pin/rng.hpp"

namespace pin {

/// Quantile levels reported for every sample summary.
inline constexpr double kEnsembleQuantiles[] = {0.05, 0.25, 0.5, 0.75, 0.95};

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> quantiles;  // at kEnsembleQuantiles
};

/// Finite-N ensemble of Z_{beta_N, h_N}(Nt) standing in for its weak-coupling limit.
struct EnsembleEstimate {
  double alpha = 0.0;
  double beta_hat = 0.0;
  double h_hat = 0.0;
  double t = 0.0;
  std::size_t N = 0;
  std::size_t replicas = 0;
  double beta_N = 0.0;
  double h_N = 0.0;
  SeedRecord seed;

  std::vector<double> log_free;         // per replica, log Z(Nt)
  std::vector<double> log_constrained;  // per replica, log Z^c(0, Nt)

  SampleSummary log_free_stats, log_constrained_stats;
  SampleSummary free_stats, constrained_stats;  // of Z itself
};

inline constexpr double kNoBudget = std::numeric_limits<double>::infinity();

/// Replica r draws its disorder from Rng(seed, r). The cost (Nt)^2 * replicas
/// must not exceed budget.
EnsembleEstimate ensemble(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat, double h_hat, double t,
                          std::size_t N, std::size_t replicas, std::uint64_t seed, double budget = kNoBudget);

struct HSweep {
  std::vector<EnsembleEstimate> points;  // one per h_hat, sorted ascending
  double worst_monotonicity = 0.0;       // max over replicas of -(increment of log Z^c), <= 0 when monotone
  double worst_convexity = 0.0;          // min over replicas of the change in slope of log Z^c
};

/// All h_hat values evaluated on the same disorder sample of each replica.
HSweep common_h_sweep(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat,
                      std::span<const double> h_hat_list, double t, std::size_t N, std::size_t replicas,
                      std::uint64_t seed, double budget = kNoBudget);

struct ScalingReport {
  double c = 1.0;
  std::size_t N = 0;          // lattice scale of the (beta_hat, h_hat, ct) side
  std::size_t N_scaled = 0;   // c N, used by the (c^(alpha-1/2) beta_hat, c^alpha h_hat, t) side
  double mean_a = 0.0, mean_b = 0.0;
  double var_a = 0.0, var_b = 0.0;
  double ks = 0.0;            // two-sample KS distance of Z(.) between the sides
  double ks_constrained = 0.0;
};

/// Compares Z at (beta_hat, h_hat, ct) on scale N with Z at
/// (c^(alpha-1/2) beta_hat, c^alpha h_hat, t) on scale cN. Both sides use the
/// same lattice length Nct and the same replica seeds.
ScalingReport scaling_check(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat, double h_hat,
                            double t, double c, std::size_t N, std::size_t replicas, std::uint64_t seed,
                            double budget = kNoBudget);

/// One row per replica: alpha, beta_hat, h_hat, t, N, replica, log_z, log_z_c.
void write_ensemble_csv(std::ostream& os, std::span<const EnsembleEstimate> points);

/// One row per parameter point with means, standard errors and quantiles.
void write_ensemble_summary_csv(std::ostream& os, std::span<const EnsembleEstimate> points);

}  // namespace pin
