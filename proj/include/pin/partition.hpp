#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pin/convolution.hpp"
#include "pin/disorder.hpp"
#include "pin/renewal.hpp"

namespace pin {

/// Site energies x[m] = beta * omega[origin + m] - Lambda(beta) + h for
/// m = 1 .. len; x[0] = 0.
std::vector<double> site_energies(const DisorderSample& omega, std::size_t origin, std::size_t len, double beta,
                                  double lambda, double h);

/// Pinned partition values z(m), m = 0 .. len, of the renewal started at
/// `origin`: z(0) = 1 and z(m) = exp(x[m]) * sum_{k<m} z(k) K(m-k).
class PartitionTable {
 public:
  PartitionTable(const RenewalLaw& law, std::vector<double> x);

  std::size_t horizon() const { return x_.size() - 1; }

  /// log z(m), endpoint energy included.
  double log_z(std::size_t m) const;

  /// log of the constrained partition function over (origin, origin + m):
  /// interior sites only, normalized by u(m).
  double log_constrained(std::size_t m) const;

  /// log of the free partition function over sites origin+1 .. origin+m.
  double log_free(std::size_t m) const;

 private:
  const RenewalLaw* law_;
  std::vector<double> x_;
  conv::ScaledSeries z_;
};

/// log Z^c(a, b) for the disordered model.
double log_z_constrained(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda, double h,
                         std::size_t a, std::size_t b);

/// log Z(N) for the disordered model with free endpoint.
double log_z_free(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda, double h,
                  std::size_t n);

/// Homogeneous partition functions (beta = 0, h = delta).
double log_psi(const RenewalLaw& law, double delta, std::size_t n);
double log_psi_c(const RenewalLaw& law, double delta, std::size_t n);

/// Both homogeneous functions for every length 0 .. n from a single DP.
struct PsiTable {
  std::vector<double> log_psi;
  std::vector<double> log_psi_c;
};
PsiTable psi_table(const RenewalLaw& law, double delta, std::size_t n);

/// Enumerates every renewal configuration inside (a, b). Span at most 22.
double brute_force_constrained(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda,
                               double h, std::size_t a, std::size_t b);

/// Enumerates every renewal configuration on 1..N. N at most 22.
double brute_force_free(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda, double h,
                        std::size_t n);

/// Weak-coupling parameters beta_N = beta_hat L(N) / N^(alpha - 1/2) and
/// h_N = h_hat L(N) / N^alpha, with L the law's effective slowly varying factor.
struct WeakCouplingScale {
  double alpha;
  SlowlyVarying L;
  std::size_t N;
  double beta_hat;
  double h_hat;

  static WeakCouplingScale from_law(const RenewalLaw& law, std::size_t N, double beta_hat, double h_hat);

  double beta_N() const;
  double h_N() const;
};

struct MomentReport {
  double estimate = 0.0;  // Monte Carlo mean (or exact average under enumeration)
  double std_error = 0.0;
  double exact = 0.0;     // value of the homogeneous identity
  double z_score = 0.0;
  std::size_t replicas = 0;
};

/// E[Z^c(0, Nt)] against Psi^c_{h_N}(Nt) by Monte Carlo over disorder replicas.
MomentReport mean_partition_identity_check(const RenewalLaw& law, const DisorderLaw& disorder,
                                           const WeakCouplingScale& scale, double t, std::size_t replicas,
                                           std::uint64_t seed);

/// E[Z^c(0, Nt)^2] at h = 0 against Psi^c of the intersection renewal at
/// Lambda(2 beta_N) - 2 Lambda(beta_N).
MomentReport second_moment_check(const RenewalLaw& law, const DisorderLaw& disorder, const WeakCouplingScale& scale,
                                 double t, std::size_t replicas, std::uint64_t seed);

/// Exact disorder averages of Z^c(0, n) and Z^c(0, n)^2 for Rademacher charges
/// by enumerating all sign patterns of the interior sites (n <= 21).
struct EnumeratedMoments {
  double mean = 0.0;
  double second = 0.0;
};
EnumeratedMoments rademacher_moments(const RenewalLaw& law, double beta, double h, std::size_t n);

/// Empirical sup over 0 <= s <= t <= 1 (grid step 1/grid) of E[Z^c(Ns, Nt)^p]
/// for each N in n_list.
std::vector<double> moment_sup_trend(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat,
                                     double h_hat, double p, std::span<const std::size_t> n_list, std::size_t grid,
                                     std::size_t replicas, std::uint64_t seed);

}  // namespace pin
