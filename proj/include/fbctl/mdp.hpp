// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fbctl/channel.hpp"
#include "fbctl/quantizer.hpp"

namespace fbctl::mdp {

// Law of the per-link channel gain, abstracted so grids can be built for any
// stationary gain distribution. quantile(p) inverts the CDF; segment_mean
// gives E[g | a <= g < b] (b may be +inf).
struct GainLaw {
  std::function<double(double)> quantile;
  std::function<double(double, double)> segment_mean;
};

// Gain law for L i.i.d. unit-variance complex Gaussian coefficients:
// Gamma(L, 1).
GainLaw gamma_gain_law(int L);

// Discretized controller-state space. Gains use M equal-probability
// segments represented by their conditional means; CSIT errors use the
// expected quantization errors of the available bit decisions as grid
// points.
struct StateGrid {
  std::vector<double> gain_points; // M, each inside its segment
  std::vector<double> gain_edges;  // M lower edges; edge[0] = 0, last open
  std::vector<double> err_points;  // N ascending
  std::vector<double> err_edges;   // N lower edges; edge[0] = 0
  std::vector<int> b_set;          // ascending, contains 0

  int gains() const { return static_cast<int>(gain_points.size()); }
  int errors() const { return static_cast<int>(err_points.size()); }
  int gain_index(double g) const;
  int err_index(double d) const;
  int bits_index(int bits) const; // position in b_set, -1 if absent
};

StateGrid build_grid(int L, const std::vector<int>& b_set, int segments,
                     const quant::QuantizerModel& model, const GainLaw& law);

// Product Markov kernel over the discretized state space: a gain chain, a
// no-feedback error chain, and for every positive bit decision the binned
// law of the fresh quantization error (independent of the current error).
struct TransitionKernel {
  Eigen::MatrixXd gain_kernel;              // M x M row-stochastic
  Eigen::MatrixXd err_kernel_nofb;          // N x N row-stochastic
  std::vector<Eigen::VectorXd> err_dist_fb; // indexed like b_set; [0] unused
  std::vector<std::string> warnings;
};

struct KernelOptions {
  double smoothing = 1e-6;       // uniform mass added to each row
  bool enforce_dominance = true; // repair sampling noise in the tail order
  int burn_in = 100;
  int min_row_samples = 100;
};

// Estimates the kernel by simulation: the gain chain from a long run of the
// fading process, the no-feedback error chain from one-step conditional
// rollouts per grid row, and the feedback rows by exact binning of the
// quantizer error law.
TransitionKernel estimate_kernel(const StateGrid& grid,
                                 chan::FadingProcess& process,
                                 const quant::QuantizerModel& model,
                                 int samples, RngStream& rng,
                                 const KernelOptions& opts = {});

struct Policy {
  Eigen::MatrixXi table; // M x N, entries are bit counts from b_set
  double bit_price = 0.0;
  double avg_rate = 0.0; // E[bits/slot] under the stationary closed loop
  bool saturated = false;
};

struct ValueFunction {
  enum class Kind { Differential, Discounted };
  Eigen::MatrixXd values; // M x N
  Kind kind = Kind::Discounted;
  double discount = 0.0; // Discounted only
  double avg_cost = 0.0; // Differential only
  bool converged = true;
};

// Expected instantaneous cost of deciding `bits` in state (gain_idx,
// err_idx): g * E[err | bits] + price * bits when feeding back, g * err when
// not.
double cost_per_stage(int gain_idx, int err_idx, int bits, double bit_price,
                      const StateGrid& grid, const quant::QuantizerModel& model);

// E[V(next state) | state (m, n), decision bits].
double expected_next_value(const Eigen::MatrixXd& values,
                           const TransitionKernel& kernel,
                           const StateGrid& grid, int m, int n, int bits);

struct BackupResult {
  Eigen::MatrixXd values;
  Eigen::MatrixXi decisions;
};

// One application of the discounted DP operator to every state. Ties go to
// the smallest bit count.
BackupResult bellman_backup(const Eigen::MatrixXd& values,
                            const TransitionKernel& kernel,
                            const StateGrid& grid, double bit_price,
                            const quant::QuantizerModel& model,
                            double discount);

struct ViResult {
  ValueFunction value;
  Policy policy;
  int iterations = 0;
};

ViResult value_iteration(const TransitionKernel& kernel, const StateGrid& grid,
                         double bit_price, const quant::QuantizerModel& model,
                         double discount, double tol, int max_iter);

struct Evaluation {
  Eigen::MatrixXd differential; // normalized to 0 at state (0, 0)
  double avg_cost = 0.0;
};

// Solves the average-cost evaluation equations for a fixed policy table.
Evaluation evaluate_policy(const TransitionKernel& kernel,
                           const StateGrid& grid,
                           const Eigen::MatrixXi& table, double bit_price,
                           const quant::QuantizerModel& model);

struct PiResult {
  Policy policy;
  ValueFunction value; // differential rewards of the final policy
  int iterations = 0;
  std::vector<double> cost_history;
};

PiResult policy_iteration(const TransitionKernel& kernel,
                          const StateGrid& grid, double bit_price,
                          const quant::QuantizerModel& model,
                          int max_iter = 100);

// Stationary distribution of the closed-loop chain induced by a policy
// table, accurate to 1e-12 in L1 residual.
Eigen::MatrixXd stationary_distribution(const TransitionKernel& kernel,
                                        const StateGrid& grid,
                                        const Eigen::MatrixXi& table);

double average_bits(const Eigen::MatrixXi& table,
                    const Eigen::MatrixXd& stationary);

// Outer Lagrangian search: bisects the bit price until the stationary
// average feedback rate meets the per-link budget from below. The achieved
// rate is nonincreasing in the price, which is the bisection contract.
Policy solve_budgeted(const TransitionKernel& kernel, const StateGrid& grid,
                      const quant::QuantizerModel& model,
                      double budget_per_link, double rate_tol = 0.05,
                      double price_tol = 1e-6);

} // namespace fbctl::mdp
