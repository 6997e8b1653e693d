// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <span>

#include "fbctl/quantizer.hpp"
#include "fbctl/rng.hpp"
#include "fbctl/types.hpp"

namespace fbctl::chan {

// One channel realization h with its gain/direction split.
struct ChannelVector {
  cvec h;      // length L, i.i.d. CN(0,1) entries
  double gain; // ||h||^2
  cvec dir;    // h / ||h||
};

enum class FadingMode { BlockIid, Ar1 };

// Lag-1 Gauss-Markov correlation matching Clarke's autocorrelation at the
// given normalized Doppler: rho_c = J0(2*pi*f_d).
double clarke_rho(double doppler);

// A temporally correlated Rayleigh-fading process for one link. BlockIid
// redraws every slot; Ar1 applies h' = rho*h + sqrt(1-rho^2)*w, which keeps
// the stationary CN(0,1) marginal per coefficient.
class FadingProcess {
 public:
  FadingProcess(FadingMode mode, double rho_c, int L, std::uint64_t seed);

  // Advances one slot and returns the new realization.
  ChannelVector advance();

  // Replaces the current state (used by kernel estimation to condition on a
  // chosen starting point).
  void set_state(const cvec& h);

  FadingMode mode() const { return mode_; }
  double rho() const { return rho_; }
  int antennas() const { return L_; }
  RngStream& rng() { return rng_; }

 private:
  FadingMode mode_;
  double rho_;
  int L_;
  RngStream rng_;
  cvec state_;
  cvec scratch_;
};

// Transmitter-side belief about one interference channel direction.
struct CsitState {
  cvec belief;        // unit vector u
  double error = 1.0; // 1 - |s^H u|^2 against the current true direction
};

// Draws an initial belief independent of the channel (error then follows the
// L-antenna isotropic law).
CsitState make_initial_csit(int L, RngStream& rng);

inline double csit_error(std::span<const cxd> true_dir,
                         std::span<const cxd> belief) {
  double e =
      1.0 - kern::abs2_cdot(belief.data(), true_dir.data(), true_dir.size());
  if (e < 0.0) e = 0.0;
  if (e > 1.0) e = 1.0;
  return e;
}

// Applies one feedback event to the CSIT: with feedback the belief becomes
// the quantized direction and the data-phase error equals the quantization
// error; without feedback both carry over. The next-slot error is then
// recomputed against new_dir.
CsitState update_csit(const CsitState& state,
                      const quant::QuantizationOutcome& outcome,
                      std::span<const cxd> new_dir);

struct OrthoDecomposition {
  double beta = 0.0;  // |f^H q|^2 for the residual direction q
  double delta = 0.0; // 1 - |s^H u|^2
  cvec residual;      // q (empty when delta == 0)
};

// Splits a true direction s into its belief-aligned and orthogonal parts and
// reports beta = |f^H q|^2. With delta == 0 the residual is undefined and
// beta is reported as 0 (the product beta*delta is what matters downstream).
OrthoDecomposition decompose(std::span<const cxd> true_dir,
                             std::span<const cxd> belief,
                             std::span<const cxd> beamformer);

} // namespace fbctl::chan
