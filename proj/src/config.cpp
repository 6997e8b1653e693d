// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fbctl/mathutil.hpp"

namespace fbctl::cli {

using nlohmann::json;

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  for (int b = 0; b <= 30; b += 2) cfg.b_set.push_back(b);
  cfg.distances = {1.0, 1.0};
  cfg.schemes = {SchemeSpec{"controlled", 8, 8, 0.0},
                 SchemeSpec{"simple", 8, 8, 0.0},
                 SchemeSpec{"differential", 8, 8, 0.25},
                 SchemeSpec{"perfect", 8, 8, 0.0}};
  cfg.sweep_values = {0, 5, 10, 15, 20, 25, 30, 35};
  return cfg;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(std::string("config field '") + key + "': " + e.what());
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.K < 2) fail("K must be >= 2");
  if (cfg.L < cfg.K) fail("L must be >= K (zero-forcing needs L >= K)");
  if (cfg.b_set.empty() || cfg.b_set.front() != 0)
    fail("b_set must be nonempty and contain 0 first");
  if (!std::is_sorted(cfg.b_set.begin(), cfg.b_set.end()))
    fail("b_set must be ascending");
  for (int b : cfg.b_set)
    if (b < 0 || b > 64) fail("b_set entries must be in [0, 64]");
  if (cfg.b_bar < 0.0) fail("b_bar must be >= 0");
  if (cfg.grid_m < 2) fail("grid_m must be >= 2");
  if (cfg.kernel_samples < 1000) fail("kernel_samples must be >= 1000");
  if (!(cfg.discount > 0.0 && cfg.discount < 1.0))
    fail("discount must be in (0,1)");
  if (cfg.fading != "ar1" && cfg.fading != "block_iid")
    fail("fading must be 'ar1' or 'block_iid'");
  if (cfg.quantizer != "sphere_cap" && cfg.quantizer != "rvq_analytic" &&
      cfg.quantizer != "rvq_codebook")
    fail("quantizer must be sphere_cap, rvq_analytic or rvq_codebook");
  if (cfg.f_d < 0.0) fail("f_d must be >= 0");
  if (cfg.slots < 1 || cfg.trials < 1 || cfg.warmup < 0)
    fail("slots/trials/warmup out of range");
  if (!cfg.distances.empty() &&
      static_cast<int>(cfg.distances.size()) != cfg.K - 1)
    fail("distances must list K-1 interferer distances");
  for (double d : cfg.distances)
    if (!(d > 0.0)) fail("distances must be > 0");
  if (cfg.sweep_axis != "snr" && cfg.sweep_axis != "b_bar" &&
      cfg.sweep_axis != "f_d")
    fail("sweep_axis must be snr, b_bar or f_d");
  if (cfg.sweep_values.empty()) fail("sweep values must be nonempty");
  if (!std::is_sorted(cfg.sweep_values.begin(), cfg.sweep_values.end()))
    fail("sweep values must be sorted ascending");
  if (cfg.schemes.empty()) fail("at least one scheme required");
  for (const SchemeSpec& s : cfg.schemes) {
    if (s.type != "controlled" && s.type != "waterfill" && s.type != "simple" &&
        s.type != "differential" && s.type != "perfect")
      fail("unknown scheme type '" + s.type + "'");
    if (s.type == "simple" && (s.bits < 0 || s.bits > 64))
      fail("simple scheme bits out of range");
    if (s.type == "differential" &&
        (s.codebook_bits < 1 || s.codebook_bits > 20))
      fail("differential codebook_bits out of range");
    if (s.type == "differential" && s.nu >= 1.0)
      fail("differential nu must be < 1");
  }
  if (cfg.psi_grid < 4) fail("psi_grid must be >= 4");
  if (cfg.psi_restarts < 1) fail("psi_restarts must be >= 1");
  if (cfg.threads < 0) fail("threads must be >= 0");
}

const std::set<std::string> kKnownKeys = {
    "L", "K", "b_set", "snr_db", "f_d", "fading", "quantizer",
    "quantizer_seed", "b_bar", "grid_m", "grid_n", "kernel_samples",
    "discount", "vi_tol", "pi_max_iter", "rate_tol", "price_tol", "slots",
    "trials", "warmup", "distances", "alpha", "schemes", "sweep",
    "seed", "threads", "out_dir", "psi_grid", "psi_restarts"};

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) fail("config root must be a JSON object");

  for (const auto& item : j.items())
    if (!kKnownKeys.count(item.key()))
      fail("unknown config key '" + item.key() + "'");

  ExperimentConfig cfg = default_config();
  read_field(j, "L", cfg.L);
  read_field(j, "K", cfg.K);
  read_field(j, "b_set", cfg.b_set);
  read_field(j, "snr_db", cfg.snr_db);
  read_field(j, "f_d", cfg.f_d);
  read_field(j, "fading", cfg.fading);
  read_field(j, "quantizer", cfg.quantizer);
  read_field(j, "quantizer_seed", cfg.quantizer_seed);
  read_field(j, "b_bar", cfg.b_bar);
  read_field(j, "grid_m", cfg.grid_m);
  read_field(j, "kernel_samples", cfg.kernel_samples);
  read_field(j, "discount", cfg.discount);
  read_field(j, "vi_tol", cfg.vi_tol);
  read_field(j, "pi_max_iter", cfg.pi_max_iter);
  read_field(j, "rate_tol", cfg.rate_tol);
  read_field(j, "price_tol", cfg.price_tol);
  read_field(j, "slots", cfg.slots);
  read_field(j, "trials", cfg.trials);
  read_field(j, "warmup", cfg.warmup);
  read_field(j, "distances", cfg.distances);
  read_field(j, "alpha", cfg.alpha);
  read_field(j, "seed", cfg.seed);
  read_field(j, "threads", cfg.threads);
  read_field(j, "out_dir", cfg.out_dir);
  read_field(j, "psi_grid", cfg.psi_grid);
  read_field(j, "psi_restarts", cfg.psi_restarts);

  // The error-grid size is pinned to |b_set| by the grid construction; a
  // grid_n override must agree.
  if (j.contains("grid_n")) {
    int n = 0;
    read_field(j, "grid_n", n);
    if (n != static_cast<int>(cfg.b_set.size()))
      fail("grid_n must equal |b_set| (error grid points are the expected "
           "quantization errors)");
  }

  if (j.contains("schemes")) {
    cfg.schemes.clear();
    const json& arr = j.at("schemes");
    if (!arr.is_array()) fail("schemes must be an array");
    for (const json& sj : arr) {
      if (!sj.is_object()) fail("each scheme must be an object");
      SchemeSpec s;
      read_field(sj, "type", s.type);
      read_field(sj, "bits", s.bits);
      read_field(sj, "codebook_bits", s.codebook_bits);
      read_field(sj, "nu", s.nu);
      cfg.schemes.push_back(s);
    }
  }
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    if (!sw.is_object()) fail("sweep must be an object");
    read_field(sw, "axis", cfg.sweep_axis);
    read_field(sw, "values", cfg.sweep_values);
  }

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string canonical_text(const ExperimentConfig& cfg) {
  json j;
  j["L"] = cfg.L;
  j["K"] = cfg.K;
  j["b_set"] = cfg.b_set;
  j["snr_db"] = cfg.snr_db;
  j["f_d"] = cfg.f_d;
  j["fading"] = cfg.fading;
  j["quantizer"] = cfg.quantizer;
  j["quantizer_seed"] = cfg.quantizer_seed;
  j["b_bar"] = cfg.b_bar;
  j["grid_m"] = cfg.grid_m;
  j["kernel_samples"] = cfg.kernel_samples;
  j["discount"] = cfg.discount;
  j["vi_tol"] = cfg.vi_tol;
  j["pi_max_iter"] = cfg.pi_max_iter;
  j["rate_tol"] = cfg.rate_tol;
  j["price_tol"] = cfg.price_tol;
  j["slots"] = cfg.slots;
  j["trials"] = cfg.trials;
  j["warmup"] = cfg.warmup;
  j["distances"] = cfg.distances;
  j["alpha"] = cfg.alpha;
  json schemes = json::array();
  for (const SchemeSpec& s : cfg.schemes) {
    schemes.push_back({{"type", s.type},
                       {"bits", s.bits},
                       {"codebook_bits", s.codebook_bits},
                       {"nu", s.nu}});
  }
  j["schemes"] = schemes;
  j["sweep"] = {{"axis", cfg.sweep_axis}, {"values", cfg.sweep_values}};
  j["seed"] = cfg.seed;
  j["psi_grid"] = cfg.psi_grid;
  j["psi_restarts"] = cfg.psi_restarts;
  // threads and out_dir are execution details, not part of the provenance
  return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return mathutil::fnv1a64(canonical_text(cfg));
}

quant::QuantizerModel make_quantizer(const ExperimentConfig& cfg) {
  quant::QuantizerModel m;
  m.L = cfg.L;
  m.seed = cfg.quantizer_seed;
  if (cfg.quantizer == "sphere_cap")
    m.kind = quant::QuantizerKind::SphereCap;
  else if (cfg.quantizer == "rvq_analytic")
    m.kind = quant::QuantizerKind::RvqAnalytic;
  else
    m.kind = quant::QuantizerKind::RvqCodebook;
  return m;
}

chan::FadingMode fading_mode(const ExperimentConfig& cfg) {
  return cfg.fading == "ar1" ? chan::FadingMode::Ar1
                             : chan::FadingMode::BlockIid;
}

} // namespace fbctl::cli
