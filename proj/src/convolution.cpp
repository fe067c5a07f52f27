#include "pin/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

#include "pin/error.hpp"

namespace pin::conv {

namespace {

constexpr std::size_t kTile = 32;

using v8 = double __attribute__((vector_size(64)));

inline v8 load8(const double* p) {
  v8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, v8 v) { std::memcpy(p, &v, sizeof v); }

// out[j] = sum_{k in [kb, ke)} y[k] * a[n0 + j - k] for j < kTile.
void tile_plain(const double* y, const double* a, std::size_t n0, std::size_t kb, std::size_t ke,
                double* out) {
  v8 s0{}, s1{}, s2{}, s3{};
  for (std::size_t k = kb; k < ke; ++k) {
    const double yk = y[k];
    const double* w = a + (n0 - k);
    s0 += yk * load8(w);
    s1 += yk * load8(w + 8);
    s2 += yk * load8(w + 16);
    s3 += yk * load8(w + 24);
  }
  store8(out, s0);
  store8(out + 8, s1);
  store8(out + 16, s2);
  store8(out + 24, s3);
}

// Same sum with a TwoSum error term carried per lane.
void tile_compensated(const double* y, const double* a, std::size_t n0, std::size_t kb, std::size_t ke,
                      double* hi, double* lo) {
  v8 s[4] = {}, c[4] = {};
  for (std::size_t k = kb; k < ke; ++k) {
    const double yk = y[k];
    const double* w = a + (n0 - k);
    for (int q = 0; q < 4; ++q) {
      const v8 p = yk * load8(w + 8 * q);
      const v8 t = s[q] + p;
      const v8 bp = t - s[q];
      c[q] += (s[q] - (t - bp)) + (p - bp);
      s[q] = t;
    }
  }
  for (int q = 0; q < 4; ++q) {
    store8(hi + 8 * q, s[q]);
    store8(lo + 8 * q, c[q]);
  }
}

inline void two_sum(double& s, double& c, double p) {
  const double t = s + p;
  const double bp = t - s;
  c += (s - (t - bp)) + (p - bp);
  s = t;
}

std::vector<double> padded(std::span<const double> v, std::size_t len) {
  std::vector<double> out(len, 0.0);
  std::copy_n(v.begin(), std::min(v.size(), len), out.begin());
  return out;
}

}  // namespace

void causal_solve(std::span<const double> a, std::span<const double> b, double sign,
                  std::span<double> y, Summation mode) {
  const std::size_t n = y.size();
  if (n <= 1) return;
  if (a.size() < n) throw DomainError("causal_solve: kernel shorter than output");
  if (!b.empty() && b.size() < n) throw DomainError("causal_solve: source shorter than output");

  const std::size_t len = n + kTile;
  std::vector<double> ap = padded(a.first(n), len);
  ap[0] = 0.0;
  std::vector<double> yp(len, 0.0);
  yp[0] = y[0];

  alignas(64) double hi[kTile], lo[kTile];
  for (std::size_t n0 = 0; n0 < n; n0 += kTile) {
    if (mode == Summation::compensated) {
      tile_compensated(yp.data(), ap.data(), n0, 0, n0, hi, lo);
    } else {
      tile_plain(yp.data(), ap.data(), n0, 0, n0, hi);
      std::fill_n(lo, kTile, 0.0);
    }
    for (std::size_t j = 0; j < kTile && n0 + j < n; ++j) {
      const std::size_t m = n0 + j;
      if (m == 0) continue;
      double s = hi[j], c = lo[j];
      for (std::size_t i = 0; i < j; ++i) {
        if (mode == Summation::compensated) {
          two_sum(s, c, yp[n0 + i] * ap[j - i]);
        } else {
          s += yp[n0 + i] * ap[j - i];
        }
      }
      const double conv = s + c;
      yp[m] = (b.empty() ? 0.0 : b[m]) + sign * conv;
    }
  }
  std::copy_n(yp.begin(), n, y.begin());
}

double ScaledSeries::log_value(std::size_t n) const { return std::log(mantissa[n]) + log_scale[n]; }

ScaledSeries pinned_solve(std::span<const double> a, std::span<const double> x, std::size_t n_max) {
  if (a.size() <= n_max || x.size() <= n_max) throw DomainError("pinned_solve: inputs shorter than horizon");
  const std::size_t n = n_max + 1;
  const std::size_t len = n + kTile;
  std::vector<double> ap = padded(a.first(n), len);
  ap[0] = 0.0;
  std::vector<double> yp(len, 0.0);
  yp[0] = 1.0;

  ScaledSeries out;
  out.mantissa.resize(n);
  out.log_scale.resize(n);

  // Segments of constant log scale; each starts on a tile boundary.
  std::vector<std::size_t> seg_begin{0};
  std::vector<double> seg_scale{0.0};

  alignas(64) double acc[kTile], part[kTile];
  for (std::size_t n0 = 0; n0 < n; n0 += kTile) {
    if (n0 > 0) {
      double m = 0.0;
      for (std::size_t k = n0 - kTile; k < n0; ++k) m = std::max(m, std::abs(yp[k]));
      if (m > 1e100 || (m > 0.0 && m < 1e-100)) {
        seg_begin.push_back(n0);
        seg_scale.push_back(seg_scale.back() + std::log(m));
      }
      double growth = 0.0;
      for (std::size_t j = 0; j < kTile && n0 + j < n; ++j) growth += std::max(0.0, x[n0 + j]);
      if (growth > 450.0) throw DomainError("pinned_solve: site weights too large for the scaled recursion");
    }
    const double cur = seg_scale.back();
    std::fill_n(acc, kTile, 0.0);
    for (std::size_t s = 0; s < seg_begin.size(); ++s) {
      const std::size_t kb = seg_begin[s];
      const std::size_t ke = s + 1 < seg_begin.size() ? seg_begin[s + 1] : n0;
      if (kb >= ke) continue;
      tile_plain(yp.data(), ap.data(), n0, kb, ke, part);
      const double f = std::exp(seg_scale[s] - cur);
      for (std::size_t j = 0; j < kTile; ++j) acc[j] += f * part[j];
    }
    for (std::size_t j = 0; j < kTile && n0 + j < n; ++j) {
      const std::size_t m = n0 + j;
      out.log_scale[m] = cur;
      if (m == 0) continue;
      double s = acc[j];
      for (std::size_t i = 0; i < j; ++i) s += yp[n0 + i] * ap[j - i];
      yp[m] = std::exp(x[m]) * s;
    }
  }
  std::copy_n(yp.begin(), n, out.mantissa.begin());
  return out;
}

std::vector<double> fft_convolve(std::span<const double> p, std::span<const double> q, std::size_t out_len) {
  std::size_t m = 1;
  while (m < p.size() + q.size()) m <<= 1;
  const std::size_t nc = m / 2 + 1;
  double* rp = fftw_alloc_real(m);
  double* rq = fftw_alloc_real(m);
  fftw_complex* cp = fftw_alloc_complex(nc);
  fftw_complex* cq = fftw_alloc_complex(nc);
  std::fill_n(rp, m, 0.0);
  std::fill_n(rq, m, 0.0);
  std::copy(p.begin(), p.end(), rp);
  std::copy(q.begin(), q.end(), rq);

  static std::mutex planner;
  fftw_plan fp, fq, back;
  {
    // The planner is not thread safe; execution is.
    std::lock_guard lock(planner);
    fp = fftw_plan_dft_r2c_1d(static_cast<int>(m), rp, cp, FFTW_ESTIMATE);
    fq = fftw_plan_dft_r2c_1d(static_cast<int>(m), rq, cq, FFTW_ESTIMATE);
    back = fftw_plan_dft_c2r_1d(static_cast<int>(m), cp, rp, FFTW_ESTIMATE);
  }
  fftw_execute(fp);
  fftw_execute(fq);
  for (std::size_t i = 0; i < nc; ++i) {
    const double re = cp[i][0] * cq[i][0] - cp[i][1] * cq[i][1];
    const double im = cp[i][0] * cq[i][1] + cp[i][1] * cq[i][0];
    cp[i][0] = re;
    cp[i][1] = im;
  }
  fftw_execute(back);
  std::vector<double> out(std::min(out_len, m));
  const double inv = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rp[i] * inv;
  out.resize(out_len, 0.0);
  {
    std::lock_guard lock(planner);
    fftw_destroy_plan(fp);
    fftw_destroy_plan(fq);
    fftw_destroy_plan(back);
  }
  fftw_free(rp);
  fftw_free(rq);
  fftw_free(cp);
  fftw_free(cq);
  return out;
}

}  // namespace pin::conv
