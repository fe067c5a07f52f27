#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pin/renewal.hpp"

namespace pin {

struct PsiQuadrature {
  std::size_t panels = 1024; // the estimate also runs at twice this count
  double grading = 0.0;      // mesh r_j = t (j/n)^q; 0 selects q = 1/nu
};

/// Truncated continuum series 1 + sum_k delta_hat^k (iterated integral)_k.
struct PsiSeries {
  double nu = 0.0;
  double delta_hat = 0.0;
  double t = 0.0;
  bool constrained = false;
  std::vector<double> terms;     // k-th term including delta_hat^k, k = 1 .. k_max
  std::size_t k_max = 0;
  double value = 1.0;
  double truncation_bound = 0.0; // bound on |sum of the omitted terms|
  double quadrature_error = 0.0; // |value(n panels) - value(2n panels)|
  PsiQuadrature quadrature;
};

/// Unconstrained series: kernel t_1^(nu-1) (t_2-t_1)^(nu-1) ... (t_k-t_(k-1))^(nu-1).
PsiSeries psi_hat(double nu, double delta_hat, double t, double tol = 1e-8, const PsiQuadrature& q = {});

/// Constrained series: the extra factor t^(1-nu) (t - t_k)^(nu-1).
PsiSeries psi_hat_c(double nu, double delta_hat, double t, double tol = 1e-8, const PsiQuadrature& q = {});

/// Coefficients of the series in x = delta_hat t^nu, i.e. the iterated
/// integrals at t = 1, computed by product integration on a graded mesh.
struct PsiCoefficients {
  std::vector<double> free;         // index k-1 holds the k-th coefficient
  std::vector<double> constrained;
};
const PsiCoefficients& psi_coefficients(double nu, const PsiQuadrature& q);

/// Conservative factorial-decay envelope log|c_k| <= log c1 + k log C - c2 k log k
/// fitted on the first ten coefficients.
struct DecayEnvelope {
  double log_c1 = 0.0;
  double log_C = 0.0;
  double c2 = 0.0;

  double log_bound(std::size_t k) const;
  /// Bound on sum_{k > k0} c1 C^k k^(-c2 k) |x|^k.
  double tail(std::size_t k0, double abs_x) const;
};
DecayEnvelope fit_decay_envelope(std::span<const double> coefficients);

struct UconvRow {
  std::size_t N = 0;
  double delta_N = 0.0;
  double sup_dev = 0.0;    // sup over t of |Psi_{delta_N}(Nt) - Psi_hat(t)|
  double sup_dev_c = 0.0;  // same for the constrained pair
};

/// Compares the discrete homogeneous partition functions with their continuum
/// limits along N_list, with delta_N = delta_hat M(N) / N^nu and M the law's
/// contact scale. Non-integer Nt is linearly interpolated.
std::vector<UconvRow> uconv_check(const RenewalLaw& law, double nu, double delta_hat, std::span<const double> t_grid,
                                  std::span<const std::size_t> N_list, double tol = 1e-8);

/// CSV with columns nu, delta_hat, t, psi_hat, psi_hat_c, k_max, trunc_bound.
void write_psi_csv(std::ostream& os, std::span<const PsiSeries> free, std::span<const PsiSeries> constrained);

}  // namespace pin
