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
#include <stdexcept>
#include <string>
#include <vector>

#include "fbctl/channel.hpp"
#include "fbctl/quantizer.hpp"

namespace fbctl::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemeSpec {
  std::string type = "controlled"; // controlled | waterfill | simple |
                                   // differential | perfect
  int bits = 8;          // simple
  int codebook_bits = 8; // differential
  double nu = 0.0;       // differential; <= 0 requests auto-tuning
};

// Experiment description. Defaults reproduce the reference setup: L=4, K=3,
// even bit decisions up to 30, 16x16 state grid, SNR 13 dB.
struct ExperimentConfig {
  int L = 4;
  int K = 3;
  std::vector<int> b_set;
  double snr_db = 13.0;
  double f_d = 1e-2;
  std::string fading = "ar1"; // ar1 | block_iid
  std::string quantizer = "sphere_cap"; // sphere_cap | rvq_analytic | rvq_codebook
  std::uint64_t quantizer_seed = 0;
  double b_bar = 12.0;
  int grid_m = 16;
  int kernel_samples = 200000;
  double discount = 0.99;
  double vi_tol = 1e-9;
  int pi_max_iter = 100;
  double rate_tol = 0.05;
  double price_tol = 1e-6;
  int slots = 2000;
  int trials = 8;
  int warmup = 100;
  std::vector<double> distances;
  double alpha = 3.0;
  std::vector<SchemeSpec> schemes;
  std::string sweep_axis = "snr"; // snr | b_bar | f_d
  std::vector<double> sweep_values;
  std::uint64_t seed = 20260810;
  int threads = 0; // 0 = hardware count
  std::string out_dir = "out";
  int psi_grid = 64;
  int psi_restarts = 8;
};

ExperimentConfig default_config();

// Parses a JSON config file; unknown keys are rejected, diagnostics carry
// the offending key or parse position.
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Canonical serialization (sorted keys) and a provenance hash over it.
std::string canonical_text(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

quant::QuantizerModel make_quantizer(const ExperimentConfig& cfg);
chan::FadingMode fading_mode(const ExperimentConfig& cfg);

} // namespace fbctl::cli
