// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/mathutil.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbctl::mathutil {

double gamma_cdf_int(int k, double x) {
  if (k < 1) throw std::domain_error("gamma_cdf_int: shape must be >= 1");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  // P(k, x) = 1 - exp(-x) * sum_{j<k} x^j / j!
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= x / j;
    sum += term;
  }
  const double tail = std::exp(-x + std::log(sum));
  return tail >= 1.0 ? 0.0 : 1.0 - tail;
}

double gamma_quantile_int(int k, double p) {
  if (k < 1) throw std::domain_error("gamma_quantile_int: shape must be >= 1");
  if (p < 0.0 || p >= 1.0)
    throw std::domain_error("gamma_quantile_int: p must be in [0,1)");
  if (p == 0.0) return 0.0;
  double hi = k + 10.0 * std::sqrt(static_cast<double>(k)) + 10.0;
  int guard = 0;
  while (gamma_cdf_int(k, hi) < p) {
    hi *= 2.0;
    if (++guard > 200)
      throw std::runtime_error("gamma_quantile_int: bracketing failed");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_cdf_int(k, mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double gamma_partial_mean_int(int k, double a, double b) {
  // E[X; a <= X < b] = k * (P(k+1, b) - P(k+1, a))
  return k * (gamma_cdf_int(k + 1, b) - gamma_cdf_int(k + 1, a));
}

double gamma_conditional_mean_int(int k, double a, double b) {
  const double mass = gamma_cdf_int(k, b) - gamma_cdf_int(k, a);
  if (mass <= 0.0)
    throw std::domain_error("gamma_conditional_mean_int: empty segment");
  return gamma_partial_mean_int(k, a, b) / mass;
}

double beta_fn(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::fabs(x)); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

} // namespace fbctl::mathutil
