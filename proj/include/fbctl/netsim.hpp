// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbctl/channel.hpp"
#include "fbctl/highmob.hpp"
#include "fbctl/mdp.hpp"
#include "fbctl/quantizer.hpp"

namespace fbctl::netsim {

// How CSI feedback is generated for each interference link.
struct Scheme {
  enum class Type {
    Controlled,           // table policy from the constrained-MDP solver
    WaterfillControlled,  // per-link water-filling policies, floor-rounded
    Simple,               // fixed bits, every slot
    Differential,         // rotation-codebook update, every slot
    PerfectCsit           // genie bound
  };
  Type type = Type::Simple;

  mdp::Policy policy;  // Controlled
  mdp::StateGrid grid; // Controlled
  std::vector<highmob::WaterfillPolicy> link_policies; // WaterfillControlled
  int fixed_bits = 8;     // Simple
  int codebook_bits = 8;  // Differential
  double nu = 0.3;        // Differential

  std::string name() const;
};

struct NetworkConfig {
  int K = 3;
  int L = 4;
  double snr_db = 13.0;   // per-user transmit SNR; noise = 10^(-snr/10)
  double doppler = 1e-2;  // normalized Doppler
  chan::FadingMode fading = chan::FadingMode::Ar1;
  std::vector<double> distances; // K-1 interferer distances per receiver
  double alpha = 3.0;            // path-loss exponent (cross links only)
  quant::QuantizerModel quantizer;
  Scheme scheme;
  int slots = 2000;
  int trials = 8;
  int warmup = 100;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SimResult {
  double avg_interference = 0.0;   // per receiver, path loss applied
  double throughput_per_user = 0.0;
  double avg_feedback_rate = 0.0;  // bits/slot per receiver incl. overhead
  double avg_feedback_bits = 0.0;  // bits/slot per receiver, CSI payload only
  double overhead_bits = 0.0;      // decision-signaling bits/slot per link
  double confidence_halfwidth = 0.0;     // ~95% halfwidth on throughput
  double interference_halfwidth = 0.0;

  // Cross-link diagnostics (no path loss): the interference identity and the
  // residual-direction statistics used by the metric decomposition.
  double mean_gain_beta_err = 0.0; // E[g * beta * err]
  double mean_gain_err = 0.0;      // E[g * err]
  double max_identity_residual = 0.0;
};

// Zero-forcing beamformer: a unit vector orthogonal to all fed-back CSIT
// directions. Within the null space it points along the projection of the
// direct-link direction when one is supplied, otherwise along a random
// isotropic direction.
cvec zf_beamformer(const std::vector<cvec>& interference_csit, int L,
                   RngStream& rng, const cvec* direct_dir = nullptr);

// Differential CSIT update: applies the best rotation from a random
// codebook of 2^codebook_bits matrices to the previous belief and
// renormalizes. The rotation minimizing the resulting CSI error is chosen.
cvec differential_update(const cvec& prev, const cvec& true_dir, double nu,
                         int codebook_bits, RngStream& rng);

SimResult run_simulation(const NetworkConfig& config);

// Grid search for the differential-feedback mixing weight maximizing
// throughput at the given operating point.
double tune_differential_nu(const NetworkConfig& base,
                            const std::vector<double>& candidates,
                            int slots, int trials);

} // namespace fbctl::netsim
