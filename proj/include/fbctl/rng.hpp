// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "fbctl/kernels.hpp"
#include "fbctl/types.hpp"

namespace fbctl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a list of tags
// (trial index, link ids, purpose, ...). Streams with distinct tag lists are
// decorrelated for all practical purposes.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(master ^ 0x51cf3a1ee2f0a7d3ull);
  for (std::uint64_t t : tags) h = splitmix64(h ^ t);
  return h;
}

// A self-contained random stream. All transforms (uniform, Gaussian,
// isotropic directions) are implemented here rather than via
// std::*_distribution so sequences are stable across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // (0, 1)
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // N(0, 1)
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // CN(0, 1): unit-variance circularly-symmetric complex Gaussian.
  cxd cgaussian() {
    const double r = std::sqrt(-std::log(uniform_pos()));
    const double t = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(t), r * std::sin(t)};
  }

  void fill_cgaussian(cxd* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = cgaussian();
  }

  // Isotropic unit-norm direction in C^n.
  void unit_vector(cxd* out, std::size_t n) {
    double nrm2;
    do {
      fill_cgaussian(out, n);
      nrm2 = kern::norm2(out, n);
    } while (nrm2 <= 0.0);
    const double inv = 1.0 / std::sqrt(nrm2);
    for (std::size_t i = 0; i < n; ++i) out[i] *= inv;
  }

  cvec unit_vector(std::size_t n) {
    cvec v(n);
    unit_vector(v.data(), n);
    return v;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace fbctl
