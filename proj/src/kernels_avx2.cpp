// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/kernels.hpp"

#if defined(FBCTL_HAVE_AVX2)

#include <immintrin.h>

namespace fbctl::kern::avx2 {

bool supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Accumulates conj(a)*b over pairs of complex doubles. racc collects
// re*re + im*im lanes, iacc collects re*im and im*re lanes; the sign
// pattern [+,-,+,-] is applied once at the end.
struct CdotAcc {
  __m256d racc = _mm256_setzero_pd();
  __m256d iacc = _mm256_setzero_pd();

  inline void step(const double* pa, const double* pb) {
    __m256d va = _mm256_loadu_pd(pa);
    __m256d vb = _mm256_loadu_pd(pb);
    racc = _mm256_fmadd_pd(va, vb, racc);
    __m256d vbs = _mm256_shuffle_pd(vb, vb, 0x5);
    iacc = _mm256_fmadd_pd(va, vbs, iacc);
  }

  inline cxd reduce() const {
    const __m256d sgn = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    return {hsum(racc), hsum(_mm256_mul_pd(iacc, sgn))};
  }
};

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

cxd cdot(const cxd* a, const cxd* b, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  CdotAcc acc;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc.step(pa + 2 * i, pb + 2 * i);
  cxd out = acc.reduce();
  for (; i < n; ++i) {
    out += cxd(a[i].real() * b[i].real() + a[i].imag() * b[i].imag(),
               a[i].real() * b[i].imag() - a[i].imag() * b[i].real());
  }
  return out;
}

double norm2(const cxd* a, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    acc = _mm256_fmadd_pd(va, va, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i)
    s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

void axpby(double a, const cxd* x, double b, const cxd* y, cxd* out,
           std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  double* po = reinterpret_cast<double*>(out);
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  const std::size_t nd = 2 * n;
  for (; i + 4 <= nd; i += 4) {
    __m256d vx = _mm256_loadu_pd(px + i);
    __m256d vy = _mm256_loadu_pd(py + i);
    _mm256_storeu_pd(po + i, _mm256_fmadd_pd(va, vx, _mm256_mul_pd(vb, vy)));
  }
  for (; i < nd; ++i) po[i] = a * px[i] + b * py[i];
}

std::size_t best_match(const cxd* rows, std::size_t count, const cxd* s,
                       std::size_t len, double* best_score) {
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t r = 0; r < count; ++r) {
    const cxd d = cdot(rows + r * len, s, len);
    const double score = d.real() * d.real() + d.imag() * d.imag();
    if (score > best_val) {
      best_val = score;
      best = r;
    }
  }
  if (best_score) *best_score = best_val;
  return best;
}

} // namespace fbctl::kern::avx2

#endif // FBCTL_HAVE_AVX2
