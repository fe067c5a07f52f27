#include "pin/weakcoupling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pin/csv.hpp"
#include "pin/error.hpp"
#include "pin/parallel.hpp"
#include "pin/partition.hpp"
#include "pin/stats.hpp"

namespace pin {

namespace {

std::size_t lattice(std::size_t N, double t) {
  const double nt = static_cast<double>(N) * t;
  const double r = std::round(nt);
  if (!(t > 0.0) || std::abs(nt - r) > 1e-9 || r < 1.0) throw DomainError("ensemble: N t must be a positive integer");
  return static_cast<std::size_t>(r);
}

void check_budget(std::size_t n, std::size_t replicas, std::size_t evaluations, double budget) {
  const double cost = static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(replicas) *
                      static_cast<double>(evaluations);
  if (cost > budget) throw BudgetExceeded("ensemble: cost exceeds the configured budget", cost, budget);
}

SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  const auto base = stats::summarize(xs);
  s.mean = base.mean;
  s.std_error = base.std_error;
  s.quantiles = stats::quantiles(xs, kEnsembleQuantiles);
  return s;
}

void finish(EnsembleEstimate& e) {
  e.log_free_stats = summarize(e.log_free);
  e.log_constrained_stats = summarize(e.log_constrained);
  std::vector<double> zf(e.log_free.size()), zc(e.log_constrained.size());
  std::transform(e.log_free.begin(), e.log_free.end(), zf.begin(), [](double v) { return std::exp(v); });
  std::transform(e.log_constrained.begin(), e.log_constrained.end(), zc.begin(),
                 [](double v) { return std::exp(v); });
  e.free_stats = summarize(zf);
  e.constrained_stats = summarize(zc);
}

EnsembleEstimate make_point(const RenewalLaw& law, double beta_hat, double h_hat, double t, std::size_t N,
                            std::size_t replicas, std::uint64_t seed) {
  const auto scale = WeakCouplingScale::from_law(law, N, beta_hat, h_hat);
  EnsembleEstimate e;
  e.alpha = law.alpha();
  e.beta_hat = beta_hat;
  e.h_hat = h_hat;
  e.t = t;
  e.N = N;
  e.replicas = replicas;
  e.beta_N = scale.beta_N();
  e.h_N = scale.h_N();
  e.seed = {seed, 0, 0};
  e.log_free.resize(replicas);
  e.log_constrained.resize(replicas);
  return e;
}

}  // namespace

EnsembleEstimate ensemble(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat, double h_hat, double t,
                          std::size_t N, std::size_t replicas, std::uint64_t seed, double budget) {
  const double hs[] = {h_hat};
  return std::move(common_h_sweep(law, disorder, beta_hat, hs, t, N, replicas, seed, budget).points.front());
}

HSweep common_h_sweep(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat,
                      std::span<const double> h_hat_list, double t, std::size_t N, std::size_t replicas,
                      std::uint64_t seed, double budget) {
  if (h_hat_list.empty()) throw DomainError("common_h_sweep: empty h_hat list");
  if (replicas < 2) throw DomainError("ensemble: need at least 2 replicas");
  const std::size_t n = lattice(N, t);
  if (n > law.n_max()) throw DomainError("ensemble: renewal law not tabulated up to N t");
  std::vector<double> hs(h_hat_list.begin(), h_hat_list.end());
  std::sort(hs.begin(), hs.end());
  check_budget(n, replicas, hs.size(), budget);

  HSweep out;
  for (double h : hs) out.points.push_back(make_point(law, beta_hat, h, t, N, replicas, seed));
  const double beta = out.points.front().beta_N;
  const double lam = disorder.lambda(beta);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    const auto omega = sample_disorder(disorder, n, rng);
    for (auto& p : out.points) {
      PartitionTable table(law, site_energies(omega, 0, n, beta, lam, p.h_N));
      p.log_constrained[r] = table.log_constrained(n);
      p.log_free[r] = table.log_free(n);
    }
  });
  for (auto& p : out.points) finish(p);

  for (std::size_t r = 0; r < replicas; ++r) {
    for (std::size_t i = 1; i < hs.size(); ++i) {
      const double inc = out.points[i].log_constrained[r] - out.points[i - 1].log_constrained[r];
      out.worst_monotonicity = std::max(out.worst_monotonicity, -inc);
      if (i + 1 < hs.size()) {
        const double s0 = inc / (out.points[i].h_N - out.points[i - 1].h_N);
        const double s1 = (out.points[i + 1].log_constrained[r] - out.points[i].log_constrained[r]) /
                          (out.points[i + 1].h_N - out.points[i].h_N);
        out.worst_convexity = std::min(out.worst_convexity, s1 - s0);
      }
    }
  }
  return out;
}

ScalingReport scaling_check(const RenewalLaw& law, const DisorderLaw& disorder, double beta_hat, double h_hat,
                            double t, double c, std::size_t N, std::size_t replicas, std::uint64_t seed,
                            double budget) {
  if (!(c > 0.0)) throw DomainError("scaling_check: c must be positive");
  const double cn = c * static_cast<double>(N);
  if (std::abs(cn - std::round(cn)) > 1e-9) throw DomainError("scaling_check: c N must be an integer");
  ScalingReport rep;
  rep.c = c;
  rep.N = N;
  rep.N_scaled = static_cast<std::size_t>(std::round(cn));
  const double alpha = law.alpha();
  const auto a = ensemble(law, disorder, beta_hat, h_hat, c * t, N, replicas, seed, budget / 2.0);
  const auto b = ensemble(law, disorder, std::pow(c, alpha - 0.5) * beta_hat, std::pow(c, alpha) * h_hat, t,
                          rep.N_scaled, replicas, seed, budget / 2.0);
  rep.mean_a = a.free_stats.mean;
  rep.mean_b = b.free_stats.mean;
  auto var = [](const EnsembleEstimate& e) {
    const double se = e.free_stats.std_error;
    return se * se * static_cast<double>(e.replicas);
  };
  rep.var_a = var(a);
  rep.var_b = var(b);
  rep.ks = stats::ks_distance(a.log_free, b.log_free);
  rep.ks_constrained = stats::ks_distance(a.log_constrained, b.log_constrained);
  return rep;
}

void write_ensemble_csv(std::ostream& os, std::span<const EnsembleEstimate> points) {
  csv::header(os, "ensemble", {"alpha", "beta_hat", "h_hat", "t", "N", "replica", "log_z", "log_z_c"});
  for (const auto& p : points) {
    for (std::size_t r = 0; r < p.replicas; ++r) {
      csv::row(os, {csv::num(p.alpha), csv::num(p.beta_hat), csv::num(p.h_hat), csv::num(p.t),
                    csv::num(static_cast<std::uint64_t>(p.N)), csv::num(static_cast<std::uint64_t>(r)),
                    csv::num(p.log_free[r]), csv::num(p.log_constrained[r])});
    }
  }
}

void write_ensemble_summary_csv(std::ostream& os, std::span<const EnsembleEstimate> points) {
  csv::header(os, "ensemble_summary",
              {"alpha", "beta_hat", "h_hat", "t", "N", "replicas", "seed", "mean_z", "se_z", "mean_z_c", "se_z_c",
               "mean_log_z", "se_log_z", "mean_log_z_c", "se_log_z_c", "q05_log_z_c", "q25_log_z_c",
               "q50_log_z_c", "q75_log_z_c", "q95_log_z_c"});
  for (const auto& p : points) {
    const auto& q = p.log_constrained_stats.quantiles;
    csv::row(os, {csv::num(p.alpha), csv::num(p.beta_hat), csv::num(p.h_hat), csv::num(p.t),
                  csv::num(static_cast<std::uint64_t>(p.N)), csv::num(static_cast<std::uint64_t>(p.replicas)),
                  csv::num(p.seed.seed), csv::num(p.free_stats.mean), csv::num(p.free_stats.std_error),
                  csv::num(p.constrained_stats.mean), csv::num(p.constrained_stats.std_error),
                  csv::num(p.log_free_stats.mean), csv::num(p.log_free_stats.std_error),
                  csv::num(p.log_constrained_stats.mean), csv::num(p.log_constrained_stats.std_error),
                  csv::num(q[0]), csv::num(q[1]), csv::num(q[2]), csv::num(q[3]), csv::num(q[4])});
  }
}

}  // namespace pin
