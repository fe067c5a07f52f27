#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pin/rng.hpp"
#include "pin/slowvar.hpp"

namespace pin {

enum class RenewalFamily { power_law, deterministic, two_point, tabulated, intersection };

/// Law of the return time tau_1 on {1, 2, ...}, tabulated up to n_max with the
/// remaining mass kept as a single tail lump, together with the contact mass
/// u(n) = P(n in tau).
class RenewalLaw {
 public:
  RenewalFamily family() const { return family_; }

  /// Tail exponent; for intersection laws the exponent of the contact mass.
  /// NaN for the auxiliary families.
  double alpha() const { return alpha_; }
  bool heavy_tailed() const { return family_ == RenewalFamily::power_law || family_ == RenewalFamily::intersection; }

  /// The slowly varying factor as configured (before normalization).
  const SlowlyVarying& L() const { return L_; }

  /// L divided by the normalizing sum, so that K(n) = L_eff(n) / n^(1+alpha)
  /// holds exactly on the table.
  const SlowlyVarying& effective_L() const { return L_eff_; }

  /// M with u(n) ~ 1 / (M(n) n^(1-alpha)).
  const SlowlyVarying& contact_scale() const { return M_; }

  double C_alpha() const { return C_alpha_; }
  std::size_t n_max() const { return K_.size() - 1; }

  double K(std::size_t n) const { return n < K_.size() ? K_[n] : 0.0; }
  double tail(std::size_t n) const { return tail_.at(n); }
  double u(std::size_t n) const { return u_.at(n); }

  /// Tables indexed by n = 0 .. n_max; K[0] = 0, tail[0] = 1, u[0] = 1.
  std::span<const double> K_table() const { return K_; }
  std::span<const double> tail_table() const { return tail_; }
  std::span<const double> u_table() const { return u_; }

  /// E[tau_1]; infinite unless alpha > 1 or the law is supported on the table.
  double mean_return_time() const { return mean_; }

  /// Identifies the law for caching: family, parameters and n_max.
  std::string cache_key() const;

  /// One increment drawn from K, with the tail lump continued as a Pareto law.
  std::int64_t draw_increment(Rng& rng) const;

 private:
  friend RenewalLaw build_renewal(double, const SlowlyVarying&, std::size_t);
  friend RenewalLaw deterministic_law(std::size_t);
  friend RenewalLaw two_point_law(std::size_t);
  friend RenewalLaw tabulated_law(std::vector<double>, std::size_t);
  friend RenewalLaw intersection_law(const RenewalLaw&, std::size_t);
  friend RenewalLaw read_law_csv(std::istream&);

  void finish_tables();

  RenewalFamily family_ = RenewalFamily::tabulated;
  double alpha_ = 0.0;
  SlowlyVarying L_, L_eff_, M_;
  double C_alpha_ = 0.0;
  double mean_ = 0.0;
  std::vector<double> K_, tail_, u_;
};

/// alpha sin(alpha pi) / pi.
double stable_constant(double alpha);

/// K(n) proportional to L(n) / n^(1+alpha), normalized over all n >= 1.
RenewalLaw build_renewal(double alpha, const SlowlyVarying& L, std::size_t n_max);

/// K(1) = 1.
RenewalLaw deterministic_law(std::size_t n_max);

/// K(1) = K(2) = 1/2.
RenewalLaw two_point_law(std::size_t n_max);

/// Arbitrary finitely supported law; probs[i] = K(i + 1) must sum to 1.
RenewalLaw tabulated_law(std::vector<double> probs, std::size_t n_max);

/// The renewal tau intersected with an independent copy: contact mass u(n)^2,
/// return-time law recovered by inverting the renewal equation. Tabulated up
/// to n_max (0 means the base law's n_max).
RenewalLaw intersection_law(const RenewalLaw& law, std::size_t n_max = 0);

struct ContactReport {
  bool skipped = false;
  std::string diagnostic;
  double max_rel_dev = 0.0;
  std::size_t worst_n = 0;
};

/// max over n in [n_lo, n_hi] of |u(n) M(n) n^(1-alpha) - 1|.
ContactReport contact_asymptotics_check(const RenewalLaw& law, std::size_t n_lo, std::size_t n_hi);

/// max over n of |u(n) - sum_k K(k) u(n-k)|, with the convolution evaluated
/// independently by FFT.
double renewal_residual(const RenewalLaw& law);

/// Renewal epochs 0 = tau_0 < tau_1 < ... <= horizon.
std::vector<std::int64_t> sample_renewal(const RenewalLaw& law, std::int64_t horizon, Rng& rng);

struct RegularityReport {
  double worst_C = 0.0;
  std::size_t worst_n = 0;
  std::size_t worst_l = 0;
};

/// Smallest C with |u(n+l)/u(n) - 1| <= C (l/n)^delta for n in the grid and
/// 1 <= l <= eps n.
RegularityReport regularity_check(const RenewalLaw& law, double eps, double delta,
                                  std::span<const std::size_t> n_grid);

/// CSV table with columns n, K, Kbar, u.
void write_law_csv(const RenewalLaw& law, std::ostream& os);

/// Restores a law written by write_law_csv as a tabulated law.
RenewalLaw read_law_csv(std::istream& is);

}  // namespace pin
