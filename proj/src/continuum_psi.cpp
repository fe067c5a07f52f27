#include "pin/continuum_psi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

#include "pin/csv.hpp"
#include "pin/error.hpp"
#include "pin/partition.hpp"
#include "pin/stats.hpp"

namespace pin {

namespace {

constexpr std::size_t kMaxTerms = 60;
constexpr std::size_t kFitTerms = 10;

// Degree of the local interpolant used by the product rule.
constexpr int kDegree = 3;
constexpr int kNodes = kDegree + 1;

// Moments of the weakly singular kernel over one panel [r_i, r_i + h], in the
// distance y = s - r to the singular endpoint (y runs over [a, b], b = a + h):
//   mu_p = int_a^b y^(nu-1) ((b - y) / h)^p dy,  p = 0 .. kDegree.
// Near the singularity the monomial moments are exact; farther away the
// integrand is smooth and Gauss-Legendre is accurate to rounding.
void panel_moments(double a, double h, double nu, double mu[kNodes]) {
  const double b = a + h;
  if (a < 2.0 * h) {
    double M[kNodes];
    for (int q = 0; q < kNodes; ++q) {
      const double e = nu + q;
      M[q] = (std::pow(b, e) - (a > 0.0 ? std::pow(a, e) : 0.0)) / e;
    }
    // (b - y)^p / h^p expanded binomially in y.
    for (int p = 0; p < kNodes; ++p) {
      double acc = 0.0, binom = 1.0;
      for (int q = 0; q <= p; ++q) {
        acc += binom * std::pow(b, p - q) * (q % 2 ? -1.0 : 1.0) * M[q];
        binom = binom * (p - q) / (q + 1);
      }
      mu[p] = acc / std::pow(h, p);
    }
    return;
  }
  using GL = boost::math::quadrature::gauss<double, 10>;
  static const auto& x = GL::abscissa();
  static const auto& w = GL::weights();
  for (int p = 0; p < kNodes; ++p) mu[p] = 0.0;
  for (std::size_t g = 0; g < x.size(); ++g) {
    for (double sign : {-1.0, 1.0}) {
      const double z = 0.5 * (1.0 + sign * x[g]);
      double v = 0.5 * w[g] * std::pow(b - h * z, nu - 1.0);
      for (int p = 0; p < kNodes; ++p, v *= z) mu[p] += v;
    }
  }
  for (int p = 0; p < kNodes; ++p) mu[p] *= h;
}

using Basis = std::array<std::array<double, kNodes>, kNodes>;

// Monomial coefficients c[m][p] of the Lagrange basis polynomial of node m.
Basis lagrange_basis(const double z[kNodes]) {
  Basis c{};
  for (int m = 0; m < kNodes; ++m) {
    std::array<double, kNodes> poly{};
    poly[0] = 1.0;
    double denom = 1.0;
    int deg = 0;
    for (int o = 0; o < kNodes; ++o) {
      if (o == m) continue;
      // poly *= (z - z_o)
      for (int p = deg + 1; p > 0; --p) poly[p] = poly[p - 1] - z[o] * poly[p];
      poly[0] *= -z[o];
      ++deg;
      denom *= z[m] - z[o];
    }
    for (int p = 0; p < kNodes; ++p) c[m][p] = poly[p] / denom;
  }
  return c;
}

// Product integration: on each panel the previous iterate is replaced by its
// cubic interpolant on neighbouring mesh nodes and integrated exactly
// against the kernel.
PsiCoefficients compute_coefficients(double nu, std::size_t n, double q) {
  std::vector<double> r(n + 1);
  for (std::size_t j = 0; j <= n; ++j) r[j] = std::pow(static_cast<double>(j) / static_cast<double>(n), q);
  r[n] = 1.0;

  // First node of the (centred where possible) stencil of panel i.
  auto stencil = [&](std::size_t i) -> std::size_t {
    const std::size_t lo = i >= 1 ? i - 1 : 0;
    return std::min(lo, n + 1 - kNodes);
  };
  std::vector<Basis> basis(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = r[i + 1] - r[i];
    const std::size_t s0 = stencil(i);
    double z[kNodes];
    for (int m = 0; m < kNodes; ++m) z[m] = (r[s0 + m] - r[i]) / h;
    basis[i] = lagrange_basis(z);
  }

  // I_k(r_j) = sum_m W[j][m] I_{k-1}(r_m).
  std::vector<std::vector<double>> W(n + 1);
  for (std::size_t j = 1; j <= n; ++j) {
    W[j].assign(std::min(j + kNodes - 1, n) + 1, 0.0);
    for (std::size_t i = 0; i < j; ++i) {
      const double h = r[i + 1] - r[i];
      double mu[kNodes];
      panel_moments(r[j] - r[i + 1], h, nu, mu);
      const std::size_t s0 = stencil(i);
      for (int m = 0; m < kNodes; ++m) {
        double acc = 0.0;
        for (int p = 0; p < kNodes; ++p) acc += basis[i][m][p] * mu[p];
        W[j][s0 + m] += acc;
      }
    }
  }
  // Stieltjes weights for int_0^1 (1 - r)^(nu-1) dI(r), differentiating the
  // same interpolant.
  std::vector<double> V(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = r[i + 1] - r[i];
    double mu[kNodes];
    panel_moments(1.0 - r[i + 1], h, nu, mu);
    const std::size_t s0 = stencil(i);
    for (int m = 0; m < kNodes; ++m) {
      double acc = 0.0;
      for (int p = 1; p < kNodes; ++p) acc += p * basis[i][m][p] * mu[p - 1];
      V[s0 + m] += acc / h;
    }
  }

  PsiCoefficients c;
  std::vector<double> f(n + 1, 1.0), g(n + 1, 0.0);
  for (std::size_t k = 1; k <= kMaxTerms; ++k) {
    g[0] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < W[j].size(); ++m) s += W[j][m] * f[m];
      g[j] = s;
    }
    f.swap(g);
    c.free.push_back(f[n]);
    double s = 0.0;
    for (std::size_t m = 0; m <= n; ++m) s += f[m] * V[m];
    c.constrained.push_back(s);
  }
  return c;
}

struct CoefficientPair {
  PsiCoefficients coarse, fine;
};

const CoefficientPair& coefficient_pair(double nu, const PsiQuadrature& quad) {
  static std::mutex m;
  static std::map<std::tuple<double, std::size_t, double>, std::unique_ptr<CoefficientPair>> cache;
  const double q = quad.grading > 0.0 ? quad.grading : 1.0 / nu;
  const auto key = std::make_tuple(nu, quad.panels, q);
  std::lock_guard lock(m);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto p = std::make_unique<CoefficientPair>();
    p->coarse = compute_coefficients(nu, quad.panels, q);
    p->fine = compute_coefficients(nu, 2 * quad.panels, q);
    it = cache.emplace(key, std::move(p)).first;
  }
  return *it->second;
}

struct SeriesSum {
  std::vector<double> terms;
  double value = 1.0;
  double bound = 0.0;
};

SeriesSum sum_series(std::span<const double> coef, double x, double tol) {
  SeriesSum out;
  if (x == 0.0) return out;
  const auto env = fit_decay_envelope(coef);
  const double ax = std::abs(x);
  double sum = 1.0;
  double xk = 1.0;
  for (std::size_t k = 1; k <= coef.size(); ++k) {
    xk *= x;
    const double term = coef[k - 1] * xk;
    out.terms.push_back(term);
    sum += term;
    const double tail = env.tail(k, ax);
    if (std::abs(term) + tail < tol) {
      out.value = sum;
      out.bound = tail;
      return out;
    }
  }
  throw ConvergenceError("continuum series: tolerance not reached within the maximal number of terms", sum);
}

PsiSeries evaluate(double nu, double delta_hat, double t, double tol, const PsiQuadrature& quad, bool constrained) {
  if (!(nu > 0.0 && nu < 1.0)) throw DomainError("continuum series: nu must lie in (0, 1)");
  if (!(t > 0.0)) throw DomainError("continuum series: t must be positive");
  if (!(tol > 0.0)) throw DomainError("continuum series: tol must be positive");
  if (quad.panels < 4) throw DomainError("continuum series: need at least 4 panels");
  PsiSeries s;
  s.nu = nu;
  s.delta_hat = delta_hat;
  s.t = t;
  s.constrained = constrained;
  s.quadrature = quad;
  if (delta_hat == 0.0) return s;

  const auto& pair = coefficient_pair(nu, quad);
  const double x = delta_hat * std::pow(t, nu);
  const auto& fine = constrained ? pair.fine.constrained : pair.fine.free;
  const auto& coarse = constrained ? pair.coarse.constrained : pair.coarse.free;
  const auto main = sum_series(fine, x, tol);
  const auto check = sum_series(coarse, x, tol);
  s.terms = main.terms;
  s.k_max = main.terms.size();
  s.value = main.value;
  s.truncation_bound = main.bound;
  s.quadrature_error = std::abs(main.value - check.value);
  return s;
}

}  // namespace

double DecayEnvelope::log_bound(std::size_t k) const {
  const auto kk = static_cast<double>(k);
  return log_c1 + kk * log_C - c2 * kk * std::log(kk);
}

double DecayEnvelope::tail(std::size_t k0, double abs_x) const {
  if (abs_x == 0.0) return 0.0;
  const double lx = std::log(abs_x);
  double total = 0.0;
  for (std::size_t k = k0 + 1; k < k0 + 10000; ++k) {
    const double lt = log_bound(k) + static_cast<double>(k) * lx;
    const double term = std::exp(lt);
    total += term;
    // Past the peak the terms fall super-geometrically.
    if (k > k0 + 2 && term < 1e-18 * total) break;
    if (lt < -745.0 && static_cast<double>(k) > std::exp((log_C + lx) / c2)) break;
  }
  return total;
}

DecayEnvelope fit_decay_envelope(std::span<const double> coefficients) {
  const std::size_t m = std::min(kFitTerms, coefficients.size());
  if (m < 3) throw DomainError("fit_decay_envelope: need at least three coefficients");
  // Least squares for log|c_k| = p0 + p1 k + p2 (-k log k).
  double A[3][3] = {}, rhs[3] = {};
  for (std::size_t k = 1; k <= m; ++k) {
    const auto kk = static_cast<double>(k);
    const double f[3] = {1.0, kk, -kk * std::log(kk)};
    const double y = std::log(std::abs(coefficients[k - 1]));
    for (int a = 0; a < 3; ++a) {
      rhs[a] += f[a] * y;
      for (int b = 0; b < 3; ++b) A[a][b] += f[a] * f[b];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 normal equations.
  int piv[3] = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int best = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(A[piv[r]][c]) > std::abs(A[piv[best]][c])) best = r;
    }
    std::swap(piv[c], piv[best]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = A[piv[r]][c] / A[piv[c]][c];
      for (int cc = c; cc < 3; ++cc) A[piv[r]][cc] -= f * A[piv[c]][cc];
      rhs[piv[r]] -= f * rhs[piv[c]];
    }
  }
  double p[3];
  for (int c = 2; c >= 0; --c) {
    double s = rhs[piv[c]];
    for (int cc = c + 1; cc < 3; ++cc) s -= A[piv[c]][cc] * p[cc];
    p[c] = s / A[piv[c]][c];
  }
  DecayEnvelope env;
  env.log_C = p[1];
  env.c2 = p[2];
  if (!(env.c2 > 0.0)) throw ConvergenceError("fit_decay_envelope: coefficients show no factorial decay", env.c2);
  // Double the fitted constant, then raise it until it dominates every coefficient.
  env.log_c1 = p[0] + std::log(2.0);
  for (std::size_t k = 1; k <= coefficients.size(); ++k) {
    const double excess = std::log(std::abs(coefficients[k - 1])) - env.log_bound(k);
    if (excess > 0.0) env.log_c1 += excess + std::log(2.0);
  }
  return env;
}

const PsiCoefficients& psi_coefficients(double nu, const PsiQuadrature& q) { return coefficient_pair(nu, q).fine; }

PsiSeries psi_hat(double nu, double delta_hat, double t, double tol, const PsiQuadrature& q) {
  return evaluate(nu, delta_hat, t, tol, q, false);
}

PsiSeries psi_hat_c(double nu, double delta_hat, double t, double tol, const PsiQuadrature& q) {
  return evaluate(nu, delta_hat, t, tol, q, true);
}

std::vector<UconvRow> uconv_check(const RenewalLaw& law, double nu, double delta_hat, std::span<const double> t_grid,
                                  std::span<const std::size_t> N_list, double tol) {
  if (!law.heavy_tailed() || std::abs(law.alpha() - nu) > 1e-12) {
    throw DomainError("uconv_check: nu must equal the contact exponent of the law");
  }
  if (t_grid.empty()) throw DomainError("uconv_check: empty t grid");
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  std::vector<double> cont(t_grid.size()), cont_c(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    cont[i] = t > 0.0 ? psi_hat(nu, delta_hat, t, tol).value : 1.0;
    cont_c[i] = t > 0.0 ? psi_hat_c(nu, delta_hat, t, tol).value : 1.0;
  }
  std::vector<UconvRow> rows;
  for (std::size_t N : N_list) {
    UconvRow row;
    row.N = N;
    const auto n = static_cast<double>(N);
    row.delta_N = delta_hat * law.contact_scale()(n) / std::pow(n, nu);
    const auto top = static_cast<std::size_t>(std::ceil(n * t_max));
    PartitionTable table(law, std::vector<double>(top + 1, row.delta_N));
    auto at = [&](double nt, bool constrained) {
      const auto lo = static_cast<std::size_t>(std::floor(nt));
      const double frac = nt - static_cast<double>(lo);
      auto val = [&](std::size_t m) {
        if (m == 0) return 1.0;
        return std::exp(constrained ? table.log_constrained(m) : table.log_free(m));
      };
      const double v0 = val(lo);
      return frac == 0.0 ? v0 : (1.0 - frac) * v0 + frac * val(lo + 1);
    };
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double nt = n * t_grid[i];
      row.sup_dev = std::max(row.sup_dev, std::abs(at(nt, false) - cont[i]));
      row.sup_dev_c = std::max(row.sup_dev_c, std::abs(at(nt, true) - cont_c[i]));
    }
    rows.push_back(row);
  }
  return rows;
}

void write_psi_csv(std::ostream& os, std::span<const PsiSeries> free, std::span<const PsiSeries> constrained) {
  if (free.size() != constrained.size()) throw DomainError("write_psi_csv: mismatched series lists");
  csv::header(os, "psi", {"nu", "delta_hat", "t", "psi_hat", "psi_hat_c", "k_max", "trunc_bound"});
  for (std::size_t i = 0; i < free.size(); ++i) {
    const auto& a = free[i];
    const auto& b = constrained[i];
    csv::row(os, {csv::num(a.nu), csv::num(a.delta_hat), csv::num(a.t), csv::num(a.value), csv::num(b.value),
                  csv::num(static_cast<std::uint64_t>(std::max(a.k_max, b.k_max))),
                  csv::num(std::max(a.truncation_bound, b.truncation_bound))});
  }
}

}  // namespace pin
