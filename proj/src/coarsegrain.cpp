#include "pin/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pin/csv.hpp"
#include "pin/error.hpp"
#include "pin/parallel.hpp"
#include "pin/partition.hpp"
#include "pin/stats.hpp"

namespace pin {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("regenerative set: alpha must lie in (0, 1)");
}

std::int64_t block_of(double x) { return static_cast<std::int64_t>(std::floor(x)) + 1; }

}  // namespace

std::size_t CoarseGrain::m(std::int64_t horizon) const {
  return static_cast<std::size_t>(std::upper_bound(J.begin(), J.end(), horizon) - J.begin());
}

CoarseGrain decompose(std::span<const double> points) {
  CoarseGrain cg;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double p = points[i];
    if (!(p >= 0.0)) throw DomainError("decompose: points must be nonnegative");
    if (i > 0 && p < points[i - 1]) throw DomainError("decompose: points must be sorted");
    const auto j = block_of(p);
    if (cg.J.empty() || cg.J.back() != j) {
      cg.J.push_back(j);
      cg.s.push_back(p);
      cg.t.push_back(p);
    } else {
      cg.t.back() = p;
    }
  }
  return cg;
}

double beta_johnk(double a, double b, Rng& rng) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) throw DomainError("beta_johnk: parameters must lie in (0, 1)");
  for (;;) {
    const double lx = std::log(rng.uniform()) / a;
    const double ly = std::log(rng.uniform()) / b;
    const double hi = std::max(lx, ly);
    const double lsum = hi + std::log(std::exp(lx - hi) + std::exp(ly - hi));
    if (lsum <= 0.0) return 1.0 / (1.0 + std::exp(ly - lx));
  }
}

double sample_last_before(double alpha, double x, double n, Rng& rng) {
  const double g = x + (n - x) * beta_johnk(alpha, 1.0 - alpha, rng);
  // Rounding can land exactly on n; the last point lies strictly before it.
  return std::min(g, std::nextafter(n, x));
}

double sample_first_after(double alpha, double u, double n, Rng& rng) {
  const double d = u + (n - u) * std::pow(rng.uniform(), -1.0 / alpha);
  return std::max(d, n);
}

RegenSample sample_regenerative_cg(double alpha, std::int64_t t_max, Rng& rng) {
  check_alpha(alpha);
  if (t_max < 1) throw DomainError("sample_regenerative_cg: t_max must be >= 1");
  RegenSample out;
  out.alpha = alpha;
  out.t_max = t_max;
  double x = 0.0;
  for (std::int64_t j = block_of(x); j <= t_max; j = block_of(x)) {
    const auto n = static_cast<double>(j);
    const double g = sample_last_before(alpha, x, n, rng);
    out.cg.J.push_back(j);
    out.cg.s.push_back(x);
    out.cg.t.push_back(g);
    x = sample_first_after(alpha, g, n, rng);
  }
  return out;
}

double last_point_cdf(double alpha, double x, double t, double u) {
  check_alpha(alpha);
  if (!(t > x)) throw DomainError("last_point_cdf: need t > x");
  if (u <= x) return 0.0;
  if (u >= t) return 1.0;
  const double c = stable_constant(alpha) / alpha;
  // Substituting v = x + w^(1/alpha) removes the singularity at x.
  const double top = std::pow(u - x, alpha);
  auto f = [&](double w) {
    const double v = x + std::pow(w, 1.0 / alpha);
    return std::pow(t - v, -alpha) / alpha;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return std::min(1.0, c * ts.integrate(f, 0.0, top));
}

double cg_hamiltonian(const CoarseGrain& cg, std::int64_t horizon,
                      const std::function<double(double, double)>& log_zc) {
  const std::size_t m = cg.m(horizon);
  double h = 0.0;
  for (std::size_t k = 0; k < m; ++k) h += log_zc(cg.s[k], cg.t[k]);
  return h;
}

CgIdentityReport verify_cg_identity(const RenewalLaw& law, const DisorderSample& omega, double beta, double lambda,
                                    double h, std::size_t N, std::size_t t) {
  if (N < 1 || t < 1) throw DomainError("verify_cg_identity: need N >= 1 and t >= 1");
  const std::size_t L = N * t;
  if (L > 24) throw BudgetExceeded("verify_cg_identity: N t exceeds the enumeration cap", L, 24);
  if (L > law.n_max()) throw DomainError("verify_cg_identity: law not tabulated up to N t");
  const auto x = site_energies(omega, 0, L, beta, lambda, h);

  // Forward sum over skeletons, block by block, keyed by the last visited
  // point; S[b] accumulates the weight of all skeletons ending at b.
  auto run = [&](bool with_energy) {
    auto zc = [&](std::size_t a, std::size_t b) {
      return with_energy ? std::exp(log_z_constrained(law, omega, beta, lambda, h, a, b)) : 1.0;
    };
    auto ex = [&](std::size_t p) { return with_energy ? std::exp(x[p]) : 1.0; };
    std::vector<double> S(L, 0.0);
    for (std::size_t b = 0; b < N; ++b) S[b] = law.u(b) * zc(0, b) * (b > 0 ? ex(b) : 1.0);
    for (std::size_t j = 2; j <= t; ++j) {
      const std::size_t lo = (j - 1) * N, hi = j * N;
      std::vector<double> fresh(N, 0.0);
      for (std::size_t a = lo; a < hi; ++a) {
        double in = 0.0;
        for (std::size_t p = 0; p < lo; ++p) in += S[p] * law.K(a - p);
        if (in == 0.0) continue;
        for (std::size_t b = a; b < hi; ++b) {
          fresh[b - lo] += in * ex(a) * law.u(b - a) * zc(a, b) * (b > a ? ex(b) : 1.0);
        }
      }
      for (std::size_t b = lo; b < hi; ++b) S[b] = fresh[b - lo];
    }
    double total = 0.0;
    for (std::size_t b = 0; b < L; ++b) total += S[b] * (law.tail(L - b) + law.K(L - b) * ex(L));
    return total;
  };

  CgIdentityReport rep;
  rep.lhs = run(true);
  rep.total_probability = run(false);
  rep.rhs = std::exp(log_z_free(law, omega, beta, lambda, h, L));
  rep.abs_dev = std::abs(rep.lhs - rep.rhs);
  rep.rel_dev = rep.abs_dev / rep.rhs;
  // Block 1 always starts at the origin; later blocks are unvisited or carry a pair a <= b.
  rep.signatures = N;
  for (std::size_t j = 2; j <= t; ++j) rep.signatures *= N * (N + 1) / 2 + 1;
  return rep;
}

std::string lemma_event_key(LemmaEvent e) {
  return e == LemmaEvent::near_block_end ? "near_block_end" : "short_block";
}

LemmaTailReport lemma_tail_estimates(double alpha, std::span<const double> gamma_list, std::size_t samples,
                                     std::uint64_t seed, std::span<const double> y_grid) {
  check_alpha(alpha);
  if (gamma_list.empty()) throw DomainError("lemma_tail_estimates: empty gamma list");
  for (double g : gamma_list) {
    if (!(g > 0.0 && g <= 0.25)) throw DomainError("lemma_tail_estimates: gamma must lie in (0, 1/4]");
  }
  if (samples < 2) throw DomainError("lemma_tail_estimates: need at least 2 samples");
  static const double default_grid[] = {0.0, 0.25, 0.5, 0.75, 0.9, 0.99};
  if (y_grid.empty()) y_grid = default_grid;

  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  const double n = static_cast<double>(samples);

  LemmaTailReport rep;
  rep.alpha = alpha;
  std::vector<TailEstimate> near(gamma_list.size()), shrt(gamma_list.size());
  for (std::size_t gi = 0; gi < gamma_list.size(); ++gi) {
    near[gi] = {gamma_list[gi], LemmaEvent::near_block_end, -1.0, 0.0, 0.0};
    shrt[gi] = {gamma_list[gi], LemmaEvent::short_block, -1.0, 0.0, 0.0};
  }
  for (std::size_t yi = 0; yi < y_grid.size(); ++yi) {
    const double y = y_grid[yi];
    if (!(y >= 0.0 && y < 1.0)) throw DomainError("lemma_tail_estimates: y must lie in [0, 1)");
    // Given t_1 = y the next point follows the Pareto law from y across 1,
    // and the last point of its block the shifted Beta law.
    std::vector<double> to_end(samples), width(samples);
    parallel_for(chunks, [&](std::size_t c) {
      Rng rng(seed, (static_cast<std::uint64_t>(yi) << 32) | c);
      const std::size_t end = std::min(samples, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        const double s2 = sample_first_after(alpha, y, 1.0, rng);
        const auto J2 = static_cast<double>(block_of(s2));
        const double t2 = sample_last_before(alpha, s2, J2, rng);
        to_end[i] = J2 - t2;
        width[i] = t2 - s2;
      }
    });
    std::sort(to_end.begin(), to_end.end());
    std::sort(width.begin(), width.end());
    for (std::size_t gi = 0; gi < gamma_list.size(); ++gi) {
      const double g = gamma_list[gi];
      auto fill = [&](TailEstimate& e, const std::vector<double>& v) {
        const double p = static_cast<double>(std::upper_bound(v.begin(), v.end(), g) - v.begin()) / n;
        if (p > e.p_hat) {
          e.p_hat = p;
          e.ci = 2.0 * std::sqrt(p * (1.0 - p) / n);
          e.worst_y = y;
        }
      };
      fill(near[gi], to_end);
      fill(shrt[gi], width);
    }
  }
  auto slope = [&](const std::vector<TailEstimate>& es, double& s, double& se) {
    std::vector<double> lx, ly;
    for (const auto& e : es) {
      if (e.p_hat > 0.0) {
        lx.push_back(std::log(e.gamma));
        ly.push_back(std::log(e.p_hat));
      }
    }
    if (lx.size() < 2) {
      s = se = std::nan("");
      return;
    }
    const auto fit = stats::linear_fit(lx, ly);
    s = fit.slope;
    se = fit.slope_se;
  };
  slope(near, rep.slope_near_end, rep.slope_near_end_se);
  slope(shrt, rep.slope_short, rep.slope_short_se);
  rep.rows = near;
  rep.rows.insert(rep.rows.end(), shrt.begin(), shrt.end());
  return rep;
}

double regenerative_property_pvalue(double alpha, double y, double x_a, double x_b, std::size_t samples,
                                    std::uint64_t seed) {
  check_alpha(alpha);
  constexpr double kHalfWidth = 0.01;
  if (!(x_a < y - kHalfWidth && x_b < y - kHalfWidth && y + kHalfWidth < 1.0 && x_a >= 0.0 && x_b >= 0.0)) {
    throw DomainError("regenerative_property_pvalue: need 0 <= x < y - 0.01 and y + 0.01 < 1");
  }
  auto collect = [&](double x, std::uint64_t stream) {
    Rng rng(seed, stream);
    std::vector<double> gaps;
    gaps.reserve(samples);
    while (gaps.size() < samples) {
      const double t1 = sample_last_before(alpha, x, 1.0, rng);
      if (std::abs(t1 - y) > kHalfWidth) continue;
      gaps.push_back(sample_first_after(alpha, t1, 1.0, rng) - t1);
    }
    return gaps;
  };
  const auto a = collect(x_a, 0);
  const auto b = collect(x_b, 1);
  return stats::ks_two_sample_pvalue(a, b);
}

void write_cg_csv(std::ostream& os, std::span<const RegenSample> samples) {
  csv::header(os, "regen_cg", {"sample", "alpha", "k", "J_k", "s_k", "t_k"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    for (std::size_t k = 0; k < s.cg.size(); ++k) {
      csv::row(os, {csv::num(static_cast<std::uint64_t>(i)), csv::num(s.alpha),
                    csv::num(static_cast<std::uint64_t>(k + 1)), csv::num(s.cg.J[k]), csv::num(s.cg.s[k]),
                    csv::num(s.cg.t[k])});
    }
  }
}

void write_tail_csv(std::ostream& os, const LemmaTailReport& report) {
  csv::header(os, "lemma_tails", {"alpha", "gamma", "event", "p_hat", "ci"});
  for (const auto& r : report.rows) {
    csv::row(os, {csv::num(report.alpha), csv::num(r.gamma), lemma_event_key(r.event), csv::num(r.p_hat),
                  csv::num(r.ci)});
  }
}

}  // namespace pin
