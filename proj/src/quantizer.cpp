// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/quantizer.hpp"

#include <cmath>
#include <stdexcept>

#include "fbctl/kernels.hpp"
#include "fbctl/mathutil.hpp"

namespace fbctl::quant {

namespace {

void check_antennas(int L) {
  if (L < 2) throw std::domain_error("quantizer: antenna count must be >= 2");
}

void check_bits(int bits) {
  if (bits < 0) throw std::domain_error("quantizer: bits must be >= 0");
}

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::domain_error("quantizer: tau must be in [0,1]");
}

// Synthesizes a unit direction at chordal distance err from s:
// out = sqrt(1-err) * s + sqrt(err) * q with q a random unit vector
// orthogonal to s.
cvec direction_at_error(std::span<const cxd> s, double err, RngStream& rng) {
  const std::size_t L = s.size();
  cvec q(L);
  double n2;
  do {
    rng.fill_cgaussian(q.data(), L);
    const cxd proj = kern::cdot(s.data(), q.data(), L);
    for (std::size_t i = 0; i < L; ++i) q[i] -= proj * s[i];
    n2 = kern::norm2(q.data(), L);
  } while (n2 <= 1e-30);
  const double a = std::sqrt(1.0 - err);
  const double b = std::sqrt(err / n2);
  cvec out(L);
  kern::axpby(a, s.data(), b, q.data(), out.data(), L);
  return out;
}

} // namespace

double sphere_cap_cdf(double tau, int bits, int L) {
  check_antennas(L);
  check_bits(bits);
  check_tau(tau);
  const double cap = std::exp2(-static_cast<double>(bits) / (L - 1));
  if (tau >= cap) return 1.0;
  return std::exp2(static_cast<double>(bits)) * std::pow(tau, L - 1);
}

double sphere_cap_mean(int bits, int L) {
  check_antennas(L);
  check_bits(bits);
  return (static_cast<double>(L - 1) / L) *
         std::exp2(-static_cast<double>(bits) / (L - 1));
}

double rvq_tail(double tau, int bits, int L) {
  check_antennas(L);
  check_bits(bits);
  check_tau(tau);
  const double base = 1.0 - std::pow(tau, L - 1);
  if (base <= 0.0) return 0.0;
  // (1 - tau^(L-1))^(2^B) with the exponent as a double, exact enough for
  // bits up to 64 and immune to integer overflow.
  return std::exp(std::exp2(static_cast<double>(bits)) * std::log(base));
}

double rvq_mean(int bits, int L) {
  check_antennas(L);
  check_bits(bits);
  if (bits > 64) throw std::domain_error("rvq_mean: bits must be <= 64");
  const double n = std::exp2(static_cast<double>(bits));
  const double c = static_cast<double>(L) / (L - 1);
  return std::exp(std::log(n) + std::lgamma(n) + std::lgamma(c) -
                  std::lgamma(n + c));
}

double QuantizerModel::mean_error(int bits) const {
  switch (kind) {
    case QuantizerKind::SphereCap:
      return sphere_cap_mean(bits, L);
    case QuantizerKind::RvqAnalytic:
    case QuantizerKind::RvqCodebook:
      return rvq_mean(bits, L);
  }
  throw std::logic_error("unreachable");
}

double QuantizerModel::error_cdf(double tau, int bits) const {
  switch (kind) {
    case QuantizerKind::SphereCap:
      return sphere_cap_cdf(tau, bits, L);
    case QuantizerKind::RvqAnalytic:
    case QuantizerKind::RvqCodebook:
      // An actual random codebook obeys the same law as the analytic model.
      return 1.0 - rvq_tail(tau, bits, L);
  }
  throw std::logic_error("unreachable");
}

double QuantizerModel::sample_error(int bits, RngStream& rng) const {
  check_antennas(L);
  check_bits(bits);
  const double u = rng.uniform();
  switch (kind) {
    case QuantizerKind::SphereCap:
      // Inverse CDF: err = U^(1/(L-1)) * 2^(-B/(L-1)).
      return std::pow(u, 1.0 / (L - 1)) *
             std::exp2(-static_cast<double>(bits) / (L - 1));
    case QuantizerKind::RvqAnalytic:
    case QuantizerKind::RvqCodebook: {
      // F(tau) = 1 - (1 - tau^(L-1))^(2^B); invert with log1p/expm1 so the
      // small-error branch stays accurate at large B.
      const double inner =
          -std::expm1(std::exp2(-static_cast<double>(bits)) * std::log1p(-u));
      return std::pow(inner, 1.0 / (L - 1));
    }
  }
  throw std::logic_error("unreachable");
}

QuantizationOutcome quantize_raw(std::span<const cxd> direction, int bits,
                                 const QuantizerModel& model, RngStream& rng) {
  check_bits(bits);
  check_antennas(model.L);
  if (static_cast<int>(direction.size()) != model.L)
    throw std::invalid_argument("quantize: direction length != L");

  QuantizationOutcome out;
  out.bits_used = bits;

  if (model.kind == QuantizerKind::RvqCodebook) {
    if (bits > 24)
      throw std::domain_error("quantize: codebook with 2^bits entries, bits > 24 refused");
    const std::size_t count = std::size_t{1} << bits;
    const std::size_t L = direction.size();
    cvec codebook(count * L);
    for (std::size_t r = 0; r < count; ++r)
      rng.unit_vector(codebook.data() + r * L, L);
    double score = 0.0;
    const std::size_t best =
        kern::best_match(codebook.data(), count, direction.data(), L, &score);
    out.direction.assign(codebook.begin() + best * L,
                         codebook.begin() + (best + 1) * L);
    out.error = 1.0 - score;
  } else {
    const double err = model.sample_error(bits, rng);
    out.direction = direction_at_error(direction, err, rng);
    out.error = err;
  }
  if (out.error < 0.0) out.error = 0.0;
  if (out.error > 1.0) out.error = 1.0;
  return out;
}

QuantizationOutcome quantize(std::span<const cxd> direction, int bits,
                             const QuantizerModel& model, RngStream& rng) {
  if (bits == 0) {
    QuantizationOutcome out;
    out.no_feedback = true;
    out.error = 1.0; // sentinel; callers keep the previous CSIT
    out.bits_used = 0;
    return out;
  }
  return quantize_raw(direction, bits, model, rng);
}

} // namespace fbctl::quant
