// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace fbctl::mathutil {

// Regularized lower incomplete gamma P(k, x) for integer shape k >= 1.
// This is the CDF of a Gamma(k, 1) variable (i.e. chi-square with 2k
// degrees of freedom, halved).
double gamma_cdf_int(int k, double x);

// Inverse of gamma_cdf_int in x for p in [0, 1). Throws std::domain_error
// for invalid p and std::runtime_error if bracketing fails.
double gamma_quantile_int(int k, double p);

// E[X ; a <= X < b] for X ~ Gamma(k, 1). Pass b = +inf for an unbounded
// upper end.
double gamma_partial_mean_int(int k, double a, double b);

// E[X | a <= X < b] for X ~ Gamma(k, 1).
double gamma_conditional_mean_int(int k, double a, double b);

// Euler beta function, evaluated via lgamma (overflow-safe).
double beta_fn(double a, double b);

// Bessel J0, used for the lag-1 autocorrelation of Clarke fading.
double bessel_j0(double x);

// FNV-1a 64-bit hash, used for config provenance stamps.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace fbctl::mathutil
