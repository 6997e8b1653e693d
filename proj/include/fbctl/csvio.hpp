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
#include <map>
#include <string>
#include <vector>

#include "fbctl/mdp.hpp"
#include "fbctl/structure.hpp"

namespace fbctl::csvio {

// Deterministic double formatting (round-trip exact).
std::string fmt(double v);

// Provenance comment placed as the first line of every artifact.
std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed,
                            const std::map<std::string, std::string>& extra = {});

struct Table {
  std::string provenance;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_table(const std::string& path, const Table& table);

void write_policy(const std::string& path, const mdp::Policy& policy,
                  const mdp::StateGrid& grid, const Eigen::MatrixXd& values,
                  std::uint64_t config_hash, std::uint64_t seed);

struct LoadedPolicy {
  mdp::Policy policy;
  std::vector<double> gain_points;
  std::vector<double> err_points;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

LoadedPolicy load_policy(const std::string& path);

void write_values(const std::string& path, const mdp::ValueFunction& vf,
                  const mdp::StateGrid& grid, std::uint64_t config_hash,
                  std::uint64_t seed);

void write_violations(const std::string& path,
                      const structure::StructureReport& report,
                      std::uint64_t config_hash, std::uint64_t seed);

} // namespace fbctl::csvio
