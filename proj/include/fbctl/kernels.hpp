// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstddef>
#include <string>

#include "fbctl/types.hpp"

// Arithmetic inner loops shared by the quantizer, channel and network
// simulator. Every operation has a scalar reference implementation and an
// AVX2 variant; the dispatched entry points select the widest supported
// backend once at startup. The two backends are equivalence-tested against
// each other (see tests/test_kernels.cpp).
namespace fbctl::kern {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
std::string backend_name(Backend b);

// Overrides the dispatched backend. Throws std::runtime_error when the
// requested backend is not supported on this host.
void force_backend(Backend b);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i conj(a[i]) * b[i]
cxd cdot(const cxd* a, const cxd* b, std::size_t n);

// sum_i |a[i]|^2
double norm2(const cxd* a, std::size_t n);

// |sum_i conj(a[i]) * b[i]|^2
double abs2_cdot(const cxd* a, const cxd* b, std::size_t n);

// out[i] = a * x[i] + b * y[i]   (real coefficients)
void axpby(double a, const cxd* x, double b, const cxd* y, cxd* out,
           std::size_t n);

// Scans `count` rows of length `len` (row-major) and returns the index of
// the row maximizing |row^H s|^2. Ties keep the first index. If best_score
// is non-null it receives the winning score.
std::size_t best_match(const cxd* rows, std::size_t count, const cxd* s,
                       std::size_t len, double* best_score);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
cxd cdot(const cxd* a, const cxd* b, std::size_t n);
double norm2(const cxd* a, std::size_t n);
void axpby(double a, const cxd* x, double b, const cxd* y, cxd* out,
           std::size_t n);
std::size_t best_match(const cxd* rows, std::size_t count, const cxd* s,
                       std::size_t len, double* best_score);
} // namespace scalar

#if defined(FBCTL_HAVE_AVX2)
namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
cxd cdot(const cxd* a, const cxd* b, std::size_t n);
double norm2(const cxd* a, std::size_t n);
void axpby(double a, const cxd* x, double b, const cxd* y, cxd* out,
           std::size_t n);
std::size_t best_match(const cxd* rows, std::size_t count, const cxd* s,
                       std::size_t len, double* best_score);
} // namespace avx2
#endif

} // namespace fbctl::kern
