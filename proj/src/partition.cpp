#include "pin/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pin/error.hpp"
#include "pin/parallel.hpp"
#include "pin/stats.hpp"

namespace pin {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t lattice_length(std::size_t N, double t) {
  const double nt = static_cast<double>(N) * t;
  const double r = std::round(nt);
  if (!(t >= 0.0) || std::abs(nt - r) > 1e-9) throw DomainError("N * t must be a nonnegative integer");
  return static_cast<std::size_t>(r);
}

MomentReport finish_report(std::vector<double> values, double exact) {
  MomentReport rep;
  const auto s = stats::summarize(values);
  rep.replicas = values.size();
  rep.estimate = s.mean;
  rep.std_error = s.std_error;
  rep.exact = exact;
  const double diff = s.mean - exact;
  if (s.std_error > 0.0) {
    rep.z_score = diff / s.std_error;
  } else {
    rep.z_score = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(exact)) ? 0.0 : std::copysign(INFINITY, diff);
  }
  return rep;
}

}  // namespace

std::vector<double> site_energies(const DisorderSample& omega, std::size_t origin, std::size_t len, double beta,
                                  double lambda, double h) {
  if (omega.size() < origin + len) throw DomainError("site_energies: disorder sample too short");
  std::vector<double> x(len + 1, 0.0);
  for (std::size_t m = 1; m <= len; ++m) x[m] = beta * omega.omega[origin + m] - lambda + h;
  return x;
}

PartitionTable::PartitionTable(const RenewalLaw& law, std::vector<double> x) : law_(&law), x_(std::move(x)) {
  if (x_.empty()) throw DomainError("PartitionTable: empty energy vector");
  if (horizon() > law.n_max()) throw DomainError("PartitionTable: horizon beyond the tabulated renewal law");
  z_ = conv::pinned_solve(law.K_table(), x_, horizon());
}

double PartitionTable::log_z(std::size_t m) const { return m == 0 ? 0.0 : z_.log_value(m); }

double PartitionTable::log_constrained(std::size_t m) const {
  if (m == 0) return 0.0;
  return z_.log_value(m) - x_[m] - std::log(law_->u(m));
}

double PartitionTable::log_free(std::size_t m) const {
  if (m > horizon()) throw DomainError("PartitionTable: length beyond horizon");
  double peak = kNegInf;
  std::vector<double> terms(m + 1, kNegInf);
  for (std::size_t k = 0; k <= m; ++k) {
    const double tail = law_->tail(m - k);
    if (tail <= 0.0) continue;
    terms[k] = log_z(k) + std::log(tail);
    peak = std::max(peak, terms[k]);
  }
  double s = 0.0;
  for (double v : terms) {
    if (v != kNegInf) s += std::exp(v - peak);
  }
  return peak + std::log(s);
}

double log_z_constrained(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda, double h,
                         std::size_t a, std::size_t b) {
  if (a > b) throw DomainError("log_z_constrained: a > b");
  if (a == b) return 0.0;
  PartitionTable t(law, site_energies(omega, a, b - a, beta, lambda, h));
  return t.log_constrained(b - a);
}

double log_z_free(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda, double h,
                  std::size_t n) {
  if (n == 0) return 0.0;
  PartitionTable t(law, site_energies(omega, 0, n, beta, lambda, h));
  return t.log_free(n);
}

PsiTable psi_table(const RenewalLaw& law, double delta, std::size_t n) {
  PartitionTable t(law, std::vector<double>(n + 1, delta));
  PsiTable out;
  out.log_psi.resize(n + 1);
  out.log_psi_c.resize(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    out.log_psi[m] = m == 0 ? 0.0 : t.log_free(m);
    out.log_psi_c[m] = t.log_constrained(m);
  }
  return out;
}

double log_psi(const RenewalLaw& law, double delta, std::size_t n) {
  if (n == 0) return 0.0;
  PartitionTable t(law, std::vector<double>(n + 1, delta));
  return t.log_free(n);
}

double log_psi_c(const RenewalLaw& law, double delta, std::size_t n) {
  if (n == 0) return 0.0;
  PartitionTable t(law, std::vector<double>(n + 1, delta));
  return t.log_constrained(n);
}

double brute_force_constrained(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda,
                               double h, std::size_t a, std::size_t b) {
  if (a > b) throw DomainError("brute_force_constrained: a > b");
  if (b - a > 22) throw DomainError("brute_force_constrained: span too large to enumerate");
  if (b - a <= 1) return 1.0;
  const auto x = site_energies(omega, a, b - a, beta, lambda, h);
  const std::size_t inner = b - a - 1;
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << inner); ++mask) {
    double w = 1.0, energy = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < inner; ++i) {
      if (!(mask >> i & 1u)) continue;
      const std::size_t pos = i + 1;
      w *= law.K(pos - prev);
      energy += x[pos];
      prev = pos;
    }
    w *= law.K(b - a - prev);
    total += w * std::exp(energy);
  }
  return total / law.u(b - a);
}

double brute_force_free(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda, double h,
                        std::size_t n) {
  if (n > 22) throw DomainError("brute_force_free: horizon too large to enumerate");
  if (n == 0) return 1.0;
  const auto x = site_energies(omega, 0, n, beta, lambda, h);
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double w = 1.0, energy = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) continue;
      const std::size_t pos = i + 1;
      w *= law.K(pos - prev);
      energy += x[pos];
      prev = pos;
    }
    w *= law.tail(n - prev);
    total += w * std::exp(energy);
  }
  return total;
}

WeakCouplingScale WeakCouplingScale::from_law(const RenewalLaw& law, std::size_t N, double beta_hat, double h_hat) {
  if (!(law.alpha() > 0.5 && law.alpha() < 1.0)) throw DomainError("weak coupling needs alpha in (1/2, 1)");
  if (N < 1) throw DomainError("weak coupling needs N >= 1");
  return {law.alpha(), law.effective_L(), N, beta_hat, h_hat};
}

double WeakCouplingScale::beta_N() const {
  const auto n = static_cast<double>(N);
  return beta_hat * L(n) / std::pow(n, alpha - 0.5);
}

double WeakCouplingScale::h_N() const {
  const auto n = static_cast<double>(N);
  return h_hat * L(n) / std::pow(n, alpha);
}

MomentReport mean_partition_identity_check(const RenewalLaw& law, const DisorderLaw& disorder,
                                           const WeakCouplingScale& scale, double t, std::size_t replicas,
                                           std::uint64_t seed) {
  const std::size_t n = lattice_length(scale.N, t);
  if (n == 0 || replicas < 2) throw DomainError("mean_partition_identity_check: need Nt >= 1 and >= 2 replicas");
  const double beta = scale.beta_N(), h = scale.h_N(), lam = disorder.lambda(beta);
  std::vector<double> vals(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    const auto omega = sample_disorder(disorder, n, rng);
    vals[r] = std::exp(log_z_constrained(law, omega, beta, lam, h, 0, n));
  });
  return finish_report(std::move(vals), std::exp(log_psi_c(law, h, n)));
}

MomentReport second_moment_check(const RenewalLaw& law, const DisorderLaw& disorder, const WeakCouplingScale& scale,
                                 double t, std::size_t replicas, std::uint64_t seed) {
  const std::size_t n = lattice_length(scale.N, t);
  if (n == 0 || replicas < 2) throw DomainError("second_moment_check: need Nt >= 1 and >= 2 replicas");
  const auto inter = intersection_law(law, n);
  const double beta = scale.beta_N(), lam = disorder.lambda(beta);
  std::vector<double> vals(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    const auto omega = sample_disorder(disorder, n, rng);
    vals[r] = std::exp(2.0 * log_z_constrained(law, omega, beta, lam, 0.0, 0, n));
  });
  const double delta = disorder.lambda(2.0 * beta) - 2.0 * lam;
  return finish_report(std::move(vals), std::exp(log_psi_c(inter, delta, n)));
}

EnumeratedMoments rademacher_moments(const RenewalLaw& law, double beta, double h, std::size_t n) {
  if (n < 1 || n > 21) throw DomainError("rademacher_moments: need 1 <= n <= 21");
  const double lam = DisorderLaw::rademacher().lambda(beta);
  const std::size_t inner = n - 1;
  const std::uint32_t patterns = 1u << inner;
  DisorderSample omega;
  omega.omega.assign(n + 1, 0.0);
  double s1 = 0.0, s2 = 0.0;
  for (std::uint32_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t i = 0; i < inner; ++i) omega.omega[i + 1] = (mask >> i & 1u) ? 1.0 : -1.0;
    const double z = std::exp(log_z_constrained(law, omega, beta, lam, h, 0, n));
    s1 += z;
    s2 += z * z;
  }
  return {s1 / patterns, s2 / patterns};
}

std::vector<double> moment_sup_trend(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat,
                                     double h_hat, double p, std::span<const std::size_t> n_list, std::size_t grid,
                                     std::size_t replicas, std::uint64_t seed) {
  if (grid < 1 || replicas < 2) throw DomainError("moment_sup_trend: need grid >= 1 and >= 2 replicas");
  std::vector<double> out;
  for (std::size_t N : n_list) {
    if (N % grid != 0) throw DomainError("moment_sup_trend: N must be a multiple of the grid size");
    const auto scale = WeakCouplingScale::from_law(law, N, beta_hat, h_hat);
    const double beta = scale.beta_N(), h = scale.h_N(), lam = disorder.lambda(beta);
    const std::size_t cells = (grid + 1) * (grid + 1);
    std::vector<std::vector<double>> per(replicas, std::vector<double>(cells, 0.0));
    parallel_for(replicas, [&](std::size_t r) {
      Rng rng(seed, r);
      const auto omega = sample_disorder(disorder, N, rng);
      for (std::size_t i = 0; i <= grid; ++i) {
        const std::size_t a = N * i / grid;
        PartitionTable t(law, site_energies(omega, a, N - a, beta, lam, h));
        for (std::size_t j = i; j <= grid; ++j) {
          per[r][i * (grid + 1) + j] = std::exp(p * t.log_constrained(N * j / grid - a));
        }
      }
    });
    double sup = 0.0;
    std::vector<double> col(replicas);
    for (std::size_t c = 0; c < cells; ++c) {
      for (std::size_t r = 0; r < replicas; ++r) col[r] = per[r][c];
      sup = std::max(sup, stats::pairwise_sum(col) / static_cast<double>(replicas));
    }
    out.push_back(sup);
  }
  return out;
}

}  // namespace pin
