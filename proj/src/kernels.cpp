// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/kernels.hpp"

#include <stdexcept>

namespace fbctl::kern {

namespace {

Backend detect_backend() {
#if defined(FBCTL_HAVE_AVX2)
  if (avx2::supported()) return Backend::Avx2;
#endif
  return Backend::Scalar;
}

Backend& current() {
  static Backend b = detect_backend();
  return b;
}

} // namespace

Backend active_backend() { return current(); }

std::string backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
#if defined(FBCTL_HAVE_AVX2)
  if (b == Backend::Avx2 && !avx2::supported())
    throw std::runtime_error("avx2 backend not supported on this host");
#else
  if (b == Backend::Avx2)
    throw std::runtime_error("avx2 backend not compiled in");
#endif
  current() = b;
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(FBCTL_HAVE_AVX2)
  if (current() == Backend::Avx2) return avx2::dot(a, b, n);
#endif
  return scalar::dot(a, b, n);
}

cxd cdot(const cxd* a, const cxd* b, std::size_t n) {
#if defined(FBCTL_HAVE_AVX2)
  if (current() == Backend::Avx2) return avx2::cdot(a, b, n);
#endif
  return scalar::cdot(a, b, n);
}

double norm2(const cxd* a, std::size_t n) {
#if defined(FBCTL_HAVE_AVX2)
  if (current() == Backend::Avx2) return avx2::norm2(a, n);
#endif
  return scalar::norm2(a, n);
}

double abs2_cdot(const cxd* a, const cxd* b, std::size_t n) {
  const cxd d = cdot(a, b, n);
  return d.real() * d.real() + d.imag() * d.imag();
}

void axpby(double a, const cxd* x, double b, const cxd* y, cxd* out,
           std::size_t n) {
#if defined(FBCTL_HAVE_AVX2)
  if (current() == Backend::Avx2) return avx2::axpby(a, x, b, y, out, n);
#endif
  return scalar::axpby(a, x, b, y, out, n);
}

std::size_t best_match(const cxd* rows, std::size_t count, const cxd* s,
                       std::size_t len, double* best_score) {
#if defined(FBCTL_HAVE_AVX2)
  if (current() == Backend::Avx2)
    return avx2::best_match(rows, count, s, len, best_score);
#endif
  return scalar::best_match(rows, count, s, len, best_score);
}

} // namespace fbctl::kern
