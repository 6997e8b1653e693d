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
#include <span>

#include "fbctl/rng.hpp"
#include "fbctl/types.hpp"

namespace fbctl::quant {

// CDF of the CSI-quantization error under the sphere-cap model:
//   Pr(err <= tau | B bits) = 2^B * tau^(L-1) for tau <= 2^(-B/(L-1)), else 1.
double sphere_cap_cdf(double tau, int bits, int L);

// Mean sphere-cap error: ((L-1)/L) * 2^(-B/(L-1)).
double sphere_cap_mean(int bits, int L);

// Tail of the error under random vector quantization with a 2^B-entry
// codebook of i.i.d. isotropic directions:
//   Pr(err >= tau | B bits) = (1 - tau^(L-1))^(2^B).
double rvq_tail(double tau, int bits, int L);

// Exact RVQ mean error 2^B * beta(2^B, L/(L-1)), evaluated through lgamma so
// it stays finite for bits up to 64.
double rvq_mean(int bits, int L);

enum class QuantizerKind { SphereCap, RvqAnalytic, RvqCodebook };

// An interference-CSI quantizer model. The analytic kinds sample the error
// law directly and synthesize a direction at the sampled chordal distance;
// RvqCodebook draws an actual random codebook and picks the best codeword.
struct QuantizerModel {
  QuantizerKind kind = QuantizerKind::SphereCap;
  int L = 4;
  std::uint64_t seed = 0; // folded into RvqCodebook draws by callers

  // E[err | bits] under this model. Defined for bits >= 0; bits = 0 is the
  // error of a single random codeword, (L-1)/L for every kind.
  double mean_error(int bits) const;

  // Pr(err <= tau | bits).
  double error_cdf(double tau, int bits) const;

  // Draws an error at the given resolution via inverse-CDF sampling.
  double sample_error(int bits, RngStream& rng) const;
};

struct QuantizationOutcome {
  cvec direction;     // unit-norm quantized direction (empty if no feedback)
  double error = 1.0; // 1 - |dir^H s|^2
  int bits_used = 0;
  bool no_feedback = false;
};

// Quantizes a unit direction with the given bit budget. bits = 0 returns a
// no-feedback sentinel; the CSIT-keeps-old-value rule lives in the channel
// module. For RvqCodebook the 2^bits codewords are drawn from `rng`.
QuantizationOutcome quantize(std::span<const cxd> direction, int bits,
                             const QuantizerModel& model, RngStream& rng);

// The raw quantizer without the no-feedback sentinel: bits = 0 means a
// single-codeword codebook. Used by fidelity tests and diagnostics.
QuantizationOutcome quantize_raw(std::span<const cxd> direction, int bits,
                                 const QuantizerModel& model, RngStream& rng);

} // namespace fbctl::quant
