#include "pin/freenergy.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "pin/csv.hpp"
#include "pin/error.hpp"
#include "pin/parallel.hpp"
#include "pin/partition.hpp"
#include "pin/slowvar.hpp"
#include "pin/stats.hpp"

namespace pin {

namespace {

constexpr double kContactStep = 1e-4;

struct Stat {
  double F = 0.0;
  double se = 0.0;
};

double unit_cost(std::size_t N, std::size_t replicas) {
  return static_cast<double>(N) * static_cast<double>(N) * static_cast<double>(replicas);
}

void check_size(const RenewalLaw& law, std::size_t N, std::size_t replicas) {
  if (N < 1) throw DomainError("free energy: N must be positive");
  if (N > law.n_max()) throw DomainError("free energy: renewal law not tabulated up to N");
  if (replicas < 2) throw DomainError("free energy: need at least 2 replicas");
}

// log Z^c(0, N) / N per replica for each h, all on the disorder of Rng(seed, r).
std::vector<std::vector<double>> constrained_rates(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                                                   std::span<const double> hs, std::size_t N, std::size_t replicas,
                                                   std::uint64_t seed) {
  std::vector<std::vector<double>> out(hs.size(), std::vector<double>(replicas));
  const double lam = disorder.lambda(beta);
  const double n = static_cast<double>(N);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    const auto omega = sample_disorder(disorder, N, rng);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      // Zero energies: Z^c is identically 1.
      if (beta == 0.0 && hs[i] == 0.0) {
        out[i][r] = 0.0;
        continue;
      }
      PartitionTable table(law, site_energies(omega, 0, N, beta, lam, hs[i]));
      out[i][r] = table.log_constrained(N) / n;
    }
  });
  return out;
}

Stat stat_of(std::span<const double> xs) {
  const auto s = stats::summarize(xs);
  return {s.mean, s.std_error};
}

// Memoized F_N(h) on a fixed set of disorder samples, charged against a budget.
class RuleEvaluator {
 public:
  RuleEvaluator(const RenewalLaw& law, const DisorderLaw& disorder, double beta, const CriticalSolver& solver,
                std::size_t N, std::size_t replicas, std::uint64_t seed, double budget)
      : law_(law), disorder_(disorder), beta_(beta), solver_(solver), N_(N), replicas_(replicas), seed_(seed),
        budget_(budget) {
    check_size(law, N, replicas);
  }

  Stat at(double h) {
    if (auto it = cache_.find(h); it != cache_.end()) return it->second;
    const double cost = unit_cost(N_, replicas_);
    if (spent_ + cost > budget_) throw BudgetExceeded("critical_point: cost exceeds the configured budget",
                                                      spent_ + cost, budget_);
    spent_ += cost;
    const double hs[] = {h};
    const auto rates = constrained_rates(law_, disorder_, beta_, hs, N_, replicas_, seed_);
    return cache_[h] = stat_of(rates[0]);
  }

  double rule(double h, double kappa) {
    const Stat s = at(h);
    return s.F - (kappa * s.se + solver_.c0 / static_cast<double>(N_));
  }

  std::pair<double, double> expand(double lo, double hi) {
    if (!(hi > lo)) throw DomainError("critical_point: bracket must satisfy h_lo < h_hi");
    double w = hi - lo;
    int steps = 0;
    while (rule(lo, solver_.kappa) > 0.0) {
      if (++steps > solver_.max_expand) throw DomainError("critical_point: bracket expansion failed at h_lo");
      lo -= w;
      w *= 2.0;
    }
    while (rule(hi, solver_.kappa) <= 0.0) {
      if (++steps > solver_.max_expand) throw DomainError("critical_point: bracket expansion failed at h_hi");
      hi += w;
      w *= 2.0;
    }
    return {lo, hi};
  }

  // Bisection of the rule with the given kappa, started from the tightest
  // sign change among the points evaluated so far.
  double root(double kappa, double lo, double hi, std::vector<std::pair<double, double>>* trace) {
    double a = lo, b = hi;
    bool have_b = false;
    for (const auto& [h, s] : cache_) {
      if (h < lo || h > hi) continue;
      if (rule(h, kappa) > 0.0) {
        b = h;
        have_b = true;
        break;
      }
    }
    if (!have_b) return hi;
    bool have_a = false;
    for (const auto& [h, s] : cache_) {
      if (h < lo || h >= b) continue;
      if (rule(h, kappa) <= 0.0) {
        a = h;
        have_a = true;
      }
    }
    if (!have_a) return lo;
    while (b - a > solver_.tol) {
      const double mid = 0.5 * (a + b);
      if (rule(mid, kappa) <= 0.0) {
        a = mid;
      } else {
        b = mid;
      }
      if (trace) trace->emplace_back(a, b);
    }
    return 0.5 * (a + b);
  }

  std::size_t evaluations() const { return cache_.size(); }
  double spent() const { return spent_; }

 private:
  const RenewalLaw& law_;
  const DisorderLaw& disorder_;
  double beta_;
  CriticalSolver solver_;
  std::size_t N_, replicas_;
  std::uint64_t seed_;
  double budget_;
  double spent_ = 0.0;
  std::map<double, Stat> cache_;
};

std::string rule_id(const CriticalSolver& s) {
  return "F_N-(" + csv::num(s.kappa) + "*se+" + csv::num(s.c0) + "/N)";
}

// sum_n K(n) exp(-F n), with the mass beyond the table continued as L_eff(n) n^-(1+alpha).
double laplace_K(const RenewalLaw& law, double F) {
  const std::size_t nm = law.n_max();
  std::vector<double> terms;
  terms.reserve(nm);
  for (std::size_t n = 1; n <= nm; ++n) terms.push_back(law.K(n) * std::exp(-F * static_cast<double>(n)));
  double head = stats::pairwise_sum(terms);
  const double lump = law.tail(nm);
  if (lump == 0.0) return head;
  if (F == 0.0) return head + lump;
  if (law.family() != RenewalFamily::power_law) {
    return head + lump * std::exp(-F * static_cast<double>(nm + 1));
  }
  // Terms beyond 40 / F are below exp(-40) times the lump.
  const double span = std::min(40.0 / F, 1e8);
  const auto stop = nm + static_cast<std::size_t>(std::ceil(span));
  const double p = 1.0 + law.alpha();
  terms.clear();
  for (std::size_t n = nm + 1; n <= stop; ++n) {
    const double x = static_cast<double>(n);
    terms.push_back(law.effective_L()(x) * std::pow(x, -p) * std::exp(-F * x));
  }
  return head + stats::pairwise_sum(terms);
}

}  // namespace

FreeEnergyEstimate free_energy(const RenewalLaw& law, const DisorderLaw& disorder, double beta, double h,
                               std::span<const std::size_t> N_list, std::size_t replicas, std::uint64_t seed,
                               double budget) {
  if (N_list.empty()) throw DomainError("free_energy: empty N list");
  if (replicas < 8) throw DomainError("free_energy: need at least 8 replicas");
  double cost = 0.0;
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (i > 0 && N_list[i] <= N_list[i - 1]) throw DomainError("free_energy: N list must be increasing");
    check_size(law, N_list[i], replicas);
    cost += unit_cost(N_list[i], replicas);
  }
  if (cost > budget) throw BudgetExceeded("free_energy: cost exceeds the configured budget", cost, budget);

  FreeEnergyEstimate e;
  e.beta = beta;
  e.h = h;
  e.replicas = replicas;
  e.seed = {seed, 0, 0};
  e.N_list.assign(N_list.begin(), N_list.end());
  const double hs[] = {h};
  for (std::size_t N : N_list) {
    const auto s = stat_of(constrained_rates(law, disorder, beta, hs, N, replicas, seed)[0]);
    e.F_N.push_back(s.F);
    e.std_error.push_back(s.se);
  }
  e.F_raw = e.F_N.back();
  e.F = std::max(e.F_raw, 0.0);
  for (std::size_t i = 0; i + 2 < e.F_N.size(); ++i) {
    const double d0 = std::abs(e.F_N[i + 1] - e.F_N[i]);
    const double d1 = std::abs(e.F_N[i + 2] - e.F_N[i + 1]);
    const double noise =
        2.0 * std::sqrt(e.std_error[i] * e.std_error[i] + e.std_error[i + 1] * e.std_error[i + 1] +
                        e.std_error[i + 2] * e.std_error[i + 2]);
    if (d1 > d0 + noise) e.trend_shrinking = false;
  }
  return e;
}

std::vector<FreeEnergyEstimate> free_energy_sweep(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                                                  std::span<const double> h_grid, std::size_t N,
                                                  std::size_t replicas, std::uint64_t seed, double budget) {
  if (h_grid.empty()) throw DomainError("free_energy_sweep: empty h grid");
  if (replicas < 8) throw DomainError("free_energy: need at least 8 replicas");
  check_size(law, N, replicas);
  const double cost = unit_cost(N, replicas) * static_cast<double>(h_grid.size());
  if (cost > budget) throw BudgetExceeded("free_energy_sweep: cost exceeds the configured budget", cost, budget);
  std::vector<double> hs(h_grid.begin(), h_grid.end());
  std::sort(hs.begin(), hs.end());
  const auto rates = constrained_rates(law, disorder, beta, hs, N, replicas, seed);
  std::vector<FreeEnergyEstimate> out;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    FreeEnergyEstimate e;
    e.beta = beta;
    e.h = hs[i];
    e.replicas = replicas;
    e.seed = {seed, 0, 0};
    e.N_list = {N};
    const auto s = stat_of(rates[i]);
    e.F_N = {s.F};
    e.std_error = {s.se};
    e.F_raw = s.F;
    e.F = std::max(s.F, 0.0);
    out.push_back(std::move(e));
  }
  return out;
}

double homogeneous_free_energy(const RenewalLaw& law, double h) {
  if (!std::isfinite(h)) throw DomainError("homogeneous_free_energy: h must be finite");
  const double target = std::exp(-h);
  auto f = [&](double F) { return laplace_K(law, F) - target; };
  const double f0 = f(0.0);
  if (f0 == 0.0) return 0.0;
  // The transform is decreasing in F and lies below e^{-F} for F > 0, above it
  // for F < 0, so the root sits between 0 and h.
  if (f0 < 0.0 && law.tail(law.n_max()) > 0.0) return 0.0;  // unbounded support: F >= 0
  std::uintmax_t iters = 200;
  const double lo = std::min(0.0, h), hi = std::max(0.0, h);
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

ContactFraction contact_fraction(const RenewalLaw& law, const DisorderLaw& disorder, double beta, double h,
                                 std::size_t N, std::size_t replicas, std::uint64_t seed, double budget) {
  check_size(law, N, replicas);
  const double cost = 2.0 * unit_cost(N, replicas);
  if (cost > budget) throw BudgetExceeded("contact_fraction: cost exceeds the configured budget", cost, budget);
  const double lam = disorder.lambda(beta);
  const double n = static_cast<double>(N);
  std::vector<double> frac(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    const auto omega = sample_disorder(disorder, N, rng);
    PartitionTable up(law, site_energies(omega, 0, N, beta, lam, h + kContactStep));
    PartitionTable down(law, site_energies(omega, 0, N, beta, lam, h - kContactStep));
    frac[r] = (up.log_free(N) - down.log_free(N)) / (2.0 * kContactStep * n);
  });
  const auto s = stats::summarize(frac);
  return {s.mean, s.std_error, N, replicas};
}

std::pair<double, double> expand_bracket(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                                         const CriticalSolver& solver, std::size_t N, std::size_t replicas,
                                         std::uint64_t seed, double budget) {
  RuleEvaluator ev(law, disorder, beta, solver, N, replicas, seed, budget);
  return ev.expand(solver.h_lo, solver.h_hi);
}

CriticalPoint critical_point(const RenewalLaw& law, const DisorderLaw& disorder, double beta,
                             const CriticalSolver& solver, std::size_t N, std::size_t replicas, std::uint64_t seed,
                             double budget) {
  if (!(solver.tol > 0.0)) throw DomainError("critical_point: tol must be positive");
  if (!(solver.kappa >= 0.0) || !(solver.c0 >= 0.0)) throw DomainError("critical_point: kappa and c0 must be >= 0");
  RuleEvaluator ev(law, disorder, beta, solver, N, replicas, seed, budget);
  CriticalPoint cp;
  cp.beta = beta;
  cp.N = N;
  cp.replicas = replicas;
  cp.seed = {seed, 0, 0};
  cp.rule = rule_id(solver);

  double lo = solver.h_lo, hi = solver.h_hi;
  if (solver.expand) {
    std::tie(lo, hi) = ev.expand(lo, hi);
  } else if (!(hi > lo) || ev.rule(lo, solver.kappa) > 0.0 || ev.rule(hi, solver.kappa) <= 0.0) {
    throw DomainError("critical_point: invalid bracket, need rule(h_lo) <= 0 < rule(h_hi)");
  }
  cp.trace.emplace_back(lo, hi);
  double a = lo, b = hi;
  while (b - a > solver.tol) {
    const double mid = 0.5 * (a + b);
    if (ev.rule(mid, solver.kappa) <= 0.0) {
      a = mid;
    } else {
      b = mid;
    }
    cp.trace.emplace_back(a, b);
  }
  cp.h_c = 0.5 * (a + b);
  const double low = ev.root(std::max(solver.kappa - 2.0, 0.0), lo, hi, nullptr);
  const double high = ev.root(solver.kappa + 2.0, lo, hi, nullptr);
  cp.ci_lo = std::min(low, cp.h_c) - solver.tol;
  cp.ci_hi = std::max(high, cp.h_c) + solver.tol;
  cp.evaluations = ev.evaluations();
  return cp;
}

ScanResult universality_scan(const RenewalLaw& law, const DisorderLaw& disorder, std::span<const double> beta_grid,
                             std::size_t N, std::size_t replicas, std::uint64_t seed, CriticalSolver solver,
                             double budget) {
  const double alpha = law.alpha();
  if (!law.heavy_tailed() || !(alpha > 0.5 && alpha < 1.0)) {
    throw DomainError("universality_scan: needs a heavy-tailed law with alpha in (1/2, 1)");
  }
  if (beta_grid.size() < 2) throw DomainError("universality_scan: need at least two beta values");
  std::vector<double> betas(beta_grid.begin(), beta_grid.end());
  std::sort(betas.begin(), betas.end());
  if (!(betas.front() > 0.0) || betas.back() > 0.5) throw DomainError("universality_scan: beta must lie in (0, 0.5]");
  if (betas.back() / betas.front() < std::sqrt(10.0)) {
    throw DomainError("universality_scan: beta grid narrower than half a decade");
  }
  check_size(law, N, replicas);

  ScanResult res;
  res.alpha = alpha;
  res.disorder = disorder.key();
  res.N = N;
  res.replicas = replicas;
  res.target_exponent = 2.0 * alpha / (2.0 * alpha - 1.0);
  const UniversalScale us(alpha, law.effective_L());

  // Expansion, bisection to tol from a bracket of width ~2 scale, and the two interval roots.
  const double per_point = 3.0 * (std::ceil(std::log2(2.0 / solver.tol)) + 4.0);
  res.planned_cost = static_cast<double>(betas.size()) * per_point * unit_cost(N, replicas);

  double spent = 0.0;
  for (double beta : betas) {
    ScanPoint p;
    p.scale = us.tilde_L(1.0 / beta) * std::pow(beta, res.target_exponent);
    CriticalSolver s = solver;
    s.h_lo = 0.0;
    s.h_hi = 2.0 * p.scale;
    s.expand = true;
    try {
      p.point = critical_point(law, disorder, beta, s, N, replicas, seed, budget - spent);
    } catch (const BudgetExceeded&) {
      res.complete = false;
      break;
    }
    spent += static_cast<double>(p.point.evaluations) * unit_cost(N, replicas);
    p.ratio = p.point.h_c / p.scale;
    p.ratio_lo = p.point.ci_lo / p.scale;
    p.ratio_hi = p.point.ci_hi / p.scale;
    res.points.push_back(std::move(p));
  }

  const auto nan = std::numeric_limits<double>::quiet_NaN();
  res.exponent = res.exponent_se = nan;
  res.plateau = res.plateau_lo = res.plateau_hi = nan;
  res.ratio_min = res.ratio_max = nan;
  if (res.points.empty()) return res;

  bool positive = true;
  std::vector<double> x, y;
  for (const auto& p : res.points) {
    if (!(p.point.h_c > 0.0)) positive = false;
    x.push_back(std::log(p.point.beta));
    y.push_back(std::log(p.point.h_c / us.tilde_L(1.0 / p.point.beta)));
  }
  if (positive && res.points.size() >= 2) {
    const auto fit = stats::linear_fit(x, y);
    res.exponent = fit.slope;
    res.exponent_se = res.points.size() >= 3 ? fit.slope_se : nan;
  }
  const auto [mn, mx] = std::minmax_element(res.points.begin(), res.points.end(),
                                            [](const ScanPoint& a, const ScanPoint& b) { return a.ratio < b.ratio; });
  res.ratio_min = mn->ratio;
  res.ratio_max = mx->ratio;
  if (res.points.size() >= 2) {
    const auto& p1 = res.points[res.points.size() - 2];
    const auto& p2 = res.points.back();
    const double w1 = 0.5 * (p1.ratio_hi - p1.ratio_lo);
    const double w2 = 0.5 * (p2.ratio_hi - p2.ratio_lo);
    const double joint = std::hypot(w1, w2);
    res.plateau = 0.5 * (p1.ratio + p2.ratio);
    res.plateau_lo = res.plateau - 0.5 * joint;
    res.plateau_hi = res.plateau + 0.5 * joint;
    res.plateau_consistent = std::abs(p1.ratio - p2.ratio) <= joint;
  }
  return res;
}

AlphaGt1Report alpha_gt1_check(const RenewalLaw& law, const DisorderLaw& disorder, std::span<const double> beta_grid,
                               std::size_t N, std::size_t replicas, std::uint64_t seed, CriticalSolver solver,
                               double budget) {
  if (!(law.alpha() > 1.0)) throw DomainError("alpha_gt1_check: needs alpha > 1");
  const double mean = law.mean_return_time();
  if (!std::isfinite(mean)) throw DomainError("alpha_gt1_check: mean return time is infinite");
  if (beta_grid.empty()) throw DomainError("alpha_gt1_check: empty beta grid");
  AlphaGt1Report rep;
  rep.alpha = law.alpha();
  rep.mean_return_time = mean;
  rep.target = rep.alpha / (2.0 * (1.0 + rep.alpha) * mean);
  std::vector<double> betas(beta_grid.begin(), beta_grid.end());
  std::sort(betas.begin(), betas.end());
  if (!(betas.front() > 0.0)) throw DomainError("alpha_gt1_check: beta must be positive");
  double spent = 0.0;
  for (double beta : betas) {
    CriticalSolver s = solver;
    s.h_lo = 0.0;
    s.h_hi = 2.0 * rep.target * beta * beta;
    s.expand = true;
    AlphaGt1Row row;
    row.point = critical_point(law, disorder, beta, s, N, replicas, seed, budget - spent);
    spent += static_cast<double>(row.point.evaluations) * unit_cost(N, replicas);
    row.ratio = row.point.h_c / (beta * beta);
    row.rel_err = std::abs(row.ratio - rep.target) / rep.target;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

SmoothingReport smoothing_check(const RenewalLaw& law, const DisorderLaw& disorder, double beta, double h_c,
                                std::span<const double> h_grid, std::size_t N, std::size_t replicas,
                                std::uint64_t seed, double budget) {
  if (disorder.kind() != DisorderKind::gaussian) throw DomainError("smoothing_check: needs gaussian disorder");
  if (!(beta > 0.0)) throw DomainError("smoothing_check: beta must be positive");
  if (!std::isfinite(law.alpha())) throw DomainError("smoothing_check: law has no tail exponent");
  for (double h : h_grid) {
    if (h < h_c) throw DomainError("smoothing_check: grid points must not lie below h_c");
  }
  SmoothingReport rep;
  rep.alpha = law.alpha();
  rep.beta = beta;
  rep.h_c = h_c;
  rep.N = N;
  const auto fs = free_energy_sweep(law, disorder, beta, h_grid, N, replicas, seed, budget);
  const double c = (1.0 + rep.alpha) / (2.0 * beta * beta);
  for (const auto& f : fs) {
    SmoothingRow row;
    row.h = f.h;
    row.F = f.F_raw;
    row.std_error = f.std_error.back();
    row.bound = c * (f.h - h_c) * (f.h - h_c);
    row.violation = row.F > row.bound + 3.0 * row.std_error;
    row.negative = row.F < -3.0 * row.std_error - 1e-9;
    rep.violations += row.violation ? 1 : 0;
    rep.negatives += row.negative ? 1 : 0;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_free_energy_csv(std::ostream& os, std::span<const FreeEnergyEstimate> rows) {
  csv::header(os, "free_energy", {"beta", "h", "N", "F", "stderr"});
  for (const auto& e : rows) {
    for (std::size_t i = 0; i < e.N_list.size(); ++i) {
      csv::row(os, {csv::num(e.beta), csv::num(e.h), csv::num(static_cast<std::uint64_t>(e.N_list[i])),
                    csv::num(e.F_N[i]), csv::num(e.std_error[i])});
    }
  }
}

void write_critical_csv(std::ostream& os, std::span<const CriticalPoint> rows) {
  csv::header(os, "critical", {"beta", "h_c", "ci_lo", "ci_hi"});
  for (const auto& c : rows) csv::row(os, {csv::num(c.beta), csv::num(c.h_c), csv::num(c.ci_lo), csv::num(c.ci_hi)});
}

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  csv::header(os, "scan", {"beta", "h_c", "ci_lo", "ci_hi", "scale", "ratio", "ratio_lo", "ratio_hi"});
  for (const auto& p : scan.points) {
    csv::row(os, {csv::num(p.point.beta), csv::num(p.point.h_c), csv::num(p.point.ci_lo), csv::num(p.point.ci_hi),
                  csv::num(p.scale), csv::num(p.ratio), csv::num(p.ratio_lo), csv::num(p.ratio_hi)});
  }
}

void write_scan_summary_csv(std::ostream& os, const ScanResult& scan) {
  csv::header(os, "scan_summary",
              {"alpha", "disorder", "N", "replicas", "target_exponent", "exponent", "exponent_se", "plateau",
               "plateau_lo", "plateau_hi", "plateau_consistent", "complete"});
  csv::row(os, {csv::num(scan.alpha), scan.disorder, csv::num(static_cast<std::uint64_t>(scan.N)),
                csv::num(static_cast<std::uint64_t>(scan.replicas)), csv::num(scan.target_exponent),
                csv::num(scan.exponent), csv::num(scan.exponent_se), csv::num(scan.plateau),
                csv::num(scan.plateau_lo), csv::num(scan.plateau_hi), csv::num(scan.plateau_consistent ? 1 : 0),
                csv::num(scan.complete ? 1 : 0)});
}

}  // namespace pin
