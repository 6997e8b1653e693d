// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/kernels.hpp"

namespace fbctl::kern::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

cxd cdot(const cxd* a, const cxd* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm2(const cxd* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return acc;
}

void axpby(double a, const cxd* x, double b, const cxd* y, cxd* out,
           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
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

} // namespace fbctl::kern::scalar
