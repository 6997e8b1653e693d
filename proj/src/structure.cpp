// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/structure.hpp"

#include <cmath>
#include <sstream>

namespace fbctl::structure {

StructureReport verify_theorem_properties(const mdp::Policy& policy,
                                          const mdp::StateGrid& grid) {
  StructureReport rep;
  const Eigen::MatrixXi& t = policy.table;
  const int M = grid.gains();
  const int N = grid.errors();

  // Property 1: within a gain row, a zero decision at some error level
  // forces zero at every smaller error level.
  for (int m = 0; m < M; ++m) {
    int top_zero = -1;
    for (int n = 0; n < N; ++n)
      if (t(m, n) == 0) top_zero = n;
    for (int n = 0; n < top_zero; ++n) {
      if (t(m, n) > 0) {
        rep.zeros_down_set_ok = false;
        rep.violations.push_back(
            {m, n,
             "positive decision below a no-feedback state in the same gain row"});
      }
    }
  }

  // Property 2: within a gain row, every positive decision is the same.
  for (int m = 0; m < M; ++m) {
    int ref = -1, ref_n = -1;
    for (int n = 0; n < N; ++n) {
      if (t(m, n) <= 0) continue;
      if (ref < 0) {
        ref = t(m, n);
        ref_n = n;
      } else if (t(m, n) != ref) {
        rep.positive_const_in_err_ok = false;
        rep.violations.push_back(
            {m, n,
             "positive decision differs from the one at error index " +
                 std::to_string(ref_n)});
      }
    }
  }

  // Property 3: within an error column, positive decisions are nondecreasing
  // in the gain.
  for (int n = 0; n < N; ++n) {
    int prev = -1, prev_m = -1;
    for (int m = 0; m < M; ++m) {
      if (t(m, n) <= 0) continue;
      if (prev > 0 && t(m, n) < prev) {
        rep.bits_monotone_in_gain_ok = false;
        rep.violations.push_back(
            {m, n,
             "bits drop from " + std::to_string(prev) + " (gain index " +
                 std::to_string(prev_m) + ") to " + std::to_string(t(m, n))});
      }
      prev = t(m, n);
      prev_m = m;
    }
  }

  // Informational: is the feedback/no-feedback boundary nonincreasing in the
  // gain? (Conjectured, not part of the checked properties.)
  int prev_boundary = N;
  for (int m = 0; m < M; ++m) {
    int first_pos = N;
    for (int n = 0; n < N; ++n)
      if (t(m, n) > 0) {
        first_pos = n;
        break;
      }
    if (first_pos > prev_boundary) rep.threshold_nonincreasing = false;
    if (first_pos < N) prev_boundary = first_pos;
  }
  return rep;
}

Eigen::MatrixXd mixed_differences(const Eigen::MatrixXd& values) {
  const Eigen::Index M = values.rows();
  const Eigen::Index N = values.cols();
  Eigen::MatrixXd f(M, N);
  const auto at = [&](Eigen::Index m, Eigen::Index n) {
    return (m < 0 || n < 0) ? 0.0 : values(m, n);
  };
  for (Eigen::Index m = 0; m < M; ++m)
    for (Eigen::Index n = 0; n < N; ++n)
      f(m, n) = at(m, n) - at(m, n - 1) - at(m - 1, n) + at(m - 1, n - 1);
  return f;
}

double compute_q(int gain_idx, int err_idx, int bits,
                 const Eigen::MatrixXd& values,
                 const mdp::TransitionKernel& kernel,
                 const mdp::StateGrid& grid, double bit_price,
                 const quant::QuantizerModel& model, double discount) {
  return mdp::cost_per_stage(gain_idx, err_idx, bits, bit_price, grid, model) +
         discount * mdp::expected_next_value(values, kernel, grid, gain_idx,
                                             err_idx, bits);
}

StructureReport analyze(const mdp::Policy& policy,
                        const mdp::ValueFunction& discounted,
                        const mdp::TransitionKernel& kernel,
                        const mdp::StateGrid& grid, double bit_price,
                        const quant::QuantizerModel& model) {
  StructureReport rep = verify_theorem_properties(policy, grid);
  const double rho = discounted.discount;
  const Eigen::MatrixXd& v = discounted.values;
  rep.f_min = mixed_differences(v).minCoeff();

  const int M = grid.gains();
  const int N = grid.errors();
  const auto& bs = grid.b_set;
  double conv_min = std::numeric_limits<double>::infinity();
  double spread_max = 0.0;
  for (int m = 0; m < M; ++m) {
    std::vector<double> q0(bs.size()); // Q at err index 0, bits > 0
    for (std::size_t a = 0; a < bs.size(); ++a) {
      if (bs[a] == 0) continue;
      q0[a] = compute_q(m, 0, bs[a], v, kernel, grid, bit_price, model, rho);
      // spread across error states must vanish for positive decisions
      for (int n = 1; n < N; ++n) {
        const double q =
            compute_q(m, n, bs[a], v, kernel, grid, bit_price, model, rho);
        spread_max = std::max(spread_max, std::abs(q - q0[a]));
      }
    }
    // second differences over the positive decisions
    for (std::size_t a = 1; a + 1 < bs.size(); ++a) {
      if (bs[a - 1] == 0) continue;
      conv_min =
          std::min(conv_min, q0[a + 1] - 2.0 * q0[a] + q0[a - 1]);
    }
  }
  rep.z_convexity_min = conv_min;
  rep.z_err_spread_max = spread_max;
  return rep;
}

std::string StructureReport::text() const {
  std::ostringstream os;
  os << "policy structure report\n";
  os << "  no-feedback region is a down-set per gain row: "
     << (zeros_down_set_ok ? "ok" : "VIOLATED") << "\n";
  os << "  positive decision constant across error states: "
     << (positive_const_in_err_ok ? "ok" : "VIOLATED") << "\n";
  os << "  positive decision nondecreasing in gain:        "
     << (bits_monotone_in_gain_ok ? "ok" : "VIOLATED") << "\n";
  os << "  violations: " << violations.size() << "\n";
  os << "  min mixed difference of value table: " << f_min << "\n";
  os << "  min Q second difference over bits:   " << z_convexity_min << "\n";
  os << "  max Q spread across error states:    " << z_err_spread_max << "\n";
  os << "  feedback boundary nonincreasing in gain (informational): "
     << (threshold_nonincreasing ? "yes" : "no") << "\n";
  return os.str();
}

} // namespace fbctl::structure
