// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>
#include <vector>

#include "fbctl/mdp.hpp"

// Machine checks of the structural properties the optimal feedback policy
// must exhibit: per gain row, the no-feedback region is a down-set in the
// error coordinate and the positive decision is constant above it; per error
// column, positive decisions are nondecreasing in the gain. The same module
// evaluates the supporting value-function statistics (mixed differences and
// Q-value convexity/independence).
namespace fbctl::structure {

struct Violation {
  int gain_idx = 0;
  int err_idx = 0;
  std::string detail;
};

struct StructureReport {
  bool zeros_down_set_ok = true;        // property 1
  bool positive_const_in_err_ok = true; // property 2
  bool bits_monotone_in_gain_ok = true; // property 3
  std::vector<Violation> violations;

  // Value statistics; populated by analyze().
  double f_min = 0.0;             // min mixed second difference of V
  double z_convexity_min = 0.0;   // min 2nd difference of Q over bits > 0
  double z_err_spread_max = 0.0;  // max Q spread across error states, bits>0
  bool threshold_nonincreasing = true; // reported, not asserted

  bool policy_ok() const {
    return zeros_down_set_ok && positive_const_in_err_ok &&
           bits_monotone_in_gain_ok;
  }
  std::string text() const;
};

StructureReport verify_theorem_properties(const mdp::Policy& policy,
                                          const mdp::StateGrid& grid);

// Mixed second differences of a value table with the convention that values
// vanish outside the grid (index -1 in either coordinate).
Eigen::MatrixXd mixed_differences(const Eigen::MatrixXd& values);

// Q-value of one state/decision pair under a converged discounted value
// function.
double compute_q(int gain_idx, int err_idx, int bits,
                 const Eigen::MatrixXd& values,
                 const mdp::TransitionKernel& kernel,
                 const mdp::StateGrid& grid, double bit_price,
                 const quant::QuantizerModel& model, double discount);

// Full report: policy structure plus the value-function statistics computed
// from a converged discounted solve.
StructureReport analyze(const mdp::Policy& policy,
                        const mdp::ValueFunction& discounted,
                        const mdp::TransitionKernel& kernel,
                        const mdp::StateGrid& grid, double bit_price,
                        const quant::QuantizerModel& model);

} // namespace fbctl::structure
