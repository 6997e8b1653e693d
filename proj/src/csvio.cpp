// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbctl::csvio {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string provenance_line(
    std::uint64_t config_hash, std::uint64_t seed,
    const std::map<std::string, std::string>& extra) {
  std::ostringstream os;
  char hash_buf[24];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(config_hash));
  os << "# fbctl config_hash=" << hash_buf << " seed=" << seed;
  for (const auto& [k, v] : extra) os << " " << k << "=" << v;
  return os.str();
}

void write_table(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << table.provenance << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << row[c];
    out << "\n";
  }
}

void write_policy(const std::string& path, const mdp::Policy& policy,
                  const mdp::StateGrid& grid, const Eigen::MatrixXd& values,
                  std::uint64_t config_hash, std::uint64_t seed) {
  Table t;
  t.provenance = provenance_line(
      config_hash, seed,
      {{"lambda", fmt(policy.bit_price)},
       {"avg_rate", fmt(policy.avg_rate)},
       {"M", std::to_string(grid.gains())},
       {"N", std::to_string(grid.errors())}});
  t.columns = {"g_index", "d_index", "g_point", "d_point", "B", "value"};
  for (int m = 0; m < grid.gains(); ++m) {
    for (int n = 0; n < grid.errors(); ++n) {
      t.rows.push_back({std::to_string(m), std::to_string(n),
                        fmt(grid.gain_points[m]), fmt(grid.err_points[n]),
                        std::to_string(policy.table(m, n)),
                        fmt(values(m, n))});
    }
  }
  write_table(path, t);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

LoadedPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# fbctl", 0) != 0)
    throw std::runtime_error("policy file missing provenance line");

  LoadedPolicy lp;
  int M = 0, N = 0;
  {
    std::istringstream os(line.substr(2));
    std::string tok;
    while (os >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "config_hash")
        lp.config_hash = std::stoull(val, nullptr, 16);
      else if (key == "seed")
        lp.seed = std::stoull(val);
      else if (key == "lambda")
        lp.policy.bit_price = std::stod(val);
      else if (key == "avg_rate")
        lp.policy.avg_rate = std::stod(val);
      else if (key == "M")
        M = std::stoi(val);
      else if (key == "N")
        N = std::stoi(val);
    }
  }
  if (M <= 0 || N <= 0)
    throw std::runtime_error("policy file missing M/N in provenance");
  if (!std::getline(in, line))
    throw std::runtime_error("policy file missing header");

  lp.policy.table.resize(M, N);
  lp.gain_points.assign(M, 0.0);
  lp.err_points.assign(N, 0.0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw std::runtime_error("malformed policy row");
    const int m = std::stoi(f[0]);
    const int n = std::stoi(f[1]);
    if (m < 0 || m >= M || n < 0 || n >= N)
      throw std::runtime_error("policy row index out of range");
    lp.gain_points[m] = std::stod(f[2]);
    lp.err_points[n] = std::stod(f[3]);
    lp.policy.table(m, n) = std::stoi(f[4]);
  }
  return lp;
}

void write_values(const std::string& path, const mdp::ValueFunction& vf,
                  const mdp::StateGrid& grid, std::uint64_t config_hash,
                  std::uint64_t seed) {
  Table t;
  t.provenance = provenance_line(
      config_hash, seed,
      {{"kind", vf.kind == mdp::ValueFunction::Kind::Discounted
                    ? "discounted"
                    : "differential"},
       {"discount", fmt(vf.discount)},
       {"avg_cost", fmt(vf.avg_cost)}});
  t.columns = {"g_index", "d_index", "g_point", "d_point", "value"};
  for (int m = 0; m < grid.gains(); ++m)
    for (int n = 0; n < grid.errors(); ++n)
      t.rows.push_back({std::to_string(m), std::to_string(n),
                        fmt(grid.gain_points[m]), fmt(grid.err_points[n]),
                        fmt(vf.values(m, n))});
  write_table(path, t);
}

void write_violations(const std::string& path,
                      const structure::StructureReport& report,
                      std::uint64_t config_hash, std::uint64_t seed) {
  Table t;
  t.provenance = provenance_line(config_hash, seed);
  t.columns = {"g_index", "d_index", "detail"};
  for (const auto& v : report.violations) {
    std::string detail = v.detail;
    for (char& c : detail)
      if (c == ',') c = ';';
    t.rows.push_back(
        {std::to_string(v.gain_idx), std::to_string(v.err_idx), detail});
  }
  write_table(path, t);
}

} // namespace fbctl::csvio
