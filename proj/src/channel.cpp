// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "fbctl/mathutil.hpp"

namespace fbctl::chan {

double clarke_rho(double doppler) {
  if (doppler < 0.0) throw std::domain_error("clarke_rho: doppler must be >= 0");
  const double r = mathutil::bessel_j0(2.0 * std::numbers::pi * doppler);
  return r < 0.0 ? 0.0 : r;
}

FadingProcess::FadingProcess(FadingMode mode, double rho_c, int L,
                             std::uint64_t seed)
    : mode_(mode), rho_(rho_c), L_(L), rng_(seed), state_(L), scratch_(L) {
  if (L < 1) throw std::domain_error("FadingProcess: L must be >= 1");
  if (mode == FadingMode::Ar1 && !(rho_c >= 0.0 && rho_c < 1.0))
    throw std::domain_error("FadingProcess: rho_c must be in [0,1)");
  rng_.fill_cgaussian(state_.data(), L_); // stationary start
}

void FadingProcess::set_state(const cvec& h) {
  if (static_cast<int>(h.size()) != L_)
    throw std::invalid_argument("FadingProcess::set_state: length mismatch");
  state_ = h;
}

ChannelVector FadingProcess::advance() {
  if (mode_ == FadingMode::BlockIid) {
    rng_.fill_cgaussian(state_.data(), L_);
  } else {
    rng_.fill_cgaussian(scratch_.data(), L_);
    kern::axpby(rho_, state_.data(), std::sqrt(1.0 - rho_ * rho_),
                scratch_.data(), state_.data(), L_);
  }
  ChannelVector out;
  out.h = state_;
  out.gain = kern::norm2(state_.data(), L_);
  out.dir.resize(L_);
  const double inv = 1.0 / std::sqrt(out.gain);
  for (int i = 0; i < L_; ++i) out.dir[i] = state_[i] * inv;
  return out;
}

CsitState make_initial_csit(int L, RngStream& rng) {
  CsitState s;
  s.belief = rng.unit_vector(L);
  s.error = 1.0;
  return s;
}

CsitState update_csit(const CsitState& state,
                      const quant::QuantizationOutcome& outcome,
                      std::span<const cxd> new_dir) {
  CsitState next;
  next.belief = outcome.no_feedback ? state.belief : outcome.direction;
  next.error = csit_error(new_dir, next.belief);
  return next;
}

OrthoDecomposition decompose(std::span<const cxd> true_dir,
                             std::span<const cxd> belief,
                             std::span<const cxd> beamformer) {
  const std::size_t L = true_dir.size();
  if (belief.size() != L || beamformer.size() != L)
    throw std::invalid_argument("decompose: length mismatch");

  OrthoDecomposition out;
  const cxd proj = kern::cdot(belief.data(), true_dir.data(), L);
  cvec resid(L);
  for (std::size_t i = 0; i < L; ++i) resid[i] = true_dir[i] - proj * belief[i];
  const double n2 = kern::norm2(resid.data(), L);
  out.delta = n2 < 0.0 ? 0.0 : n2; // ||resid||^2 == 1 - |s^H u|^2

  if (out.delta <= 1e-24) {
    // Degenerate: belief exact, interference vanishes regardless of beta.
    out.delta = out.delta < 0.0 ? 0.0 : out.delta;
    out.beta = 0.0;
    return out;
  }

  const double inv = 1.0 / std::sqrt(n2);
  for (std::size_t i = 0; i < L; ++i) resid[i] *= inv;
  // s^H q = ||resid|| is real and nonnegative by construction, which fixes
  // the phase gauge of q.
  out.beta = kern::abs2_cdot(beamformer.data(), resid.data(), L);
  if (out.beta > 1.0) out.beta = 1.0;
  out.residual = std::move(resid);
  return out;
}

} // namespace fbctl::chan
