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
#include <functional>
#include <vector>

#include "fbctl/rng.hpp"

// Closed-form and semi-numerical optimal feedback control for independent
// block fading: per-slot water-filling over the channel gain, a numerical
// search for the feedback threshold, and water-filling of average rates
// across links with heterogeneous path losses.
namespace fbctl::highmob {

// Quantile discretization of the stationary gain law (weights sum to 1).
struct GainTable {
  std::vector<double> points;
  std::vector<double> weights;
};

// Gamma(L, 1) gain table with n equal-probability cells represented by
// their conditional means.
GainTable gamma_gain_table(int L, int cells);

// Law of the pre-feedback CSIT error.
struct ErrorLaw {
  std::function<double(double)> cdf;          // Pr(err <= t)
  std::function<double(double)> partial_mean; // E[err ; err < t]
};

// Under block fading any stale belief is independent of the fresh channel
// direction, so the observed error is Beta(L-1, 1): cdf t^(L-1).
ErrorLaw isotropic_error_law(int L);

// Water-filling feedback policy: above the threshold, bits grow
// logarithmically with the gain from a common water level; below it the
// link stays silent. The threshold is a nonincreasing step function on a
// log-spaced gain grid.
struct WaterfillPolicy {
  std::vector<double> gain_grid; // ascending
  std::vector<double> threshold; // same length, nonincreasing, in [0, 1]
  double water_level = 0.0;
  double budget_per_link = 0.0;
  int L = 4;

  double threshold_at(double gain) const;
};

// Continuous feedback bits for one state: water_level - (L-1)*log2(1/g)
// above the threshold (floored at zero), 0 below. Throws for gain <= 0.
double waterfill_bits(double gain, double err, const WaterfillPolicy& policy,
                      int L);

struct ThresholdSearch {
  WaterfillPolicy policy;
  double interference = 0.0;   // analytic objective at the optimum
  double fb_probability = 0.0; // Pr(err >= threshold(gain))
  bool feasible = false;
};

// Minimizes the average interference over monotone nonincreasing step
// thresholds by coordinate descent with random restarts. The water level is
// recomputed from the budget at every candidate; candidates violating the
// nonnegativity/usefulness constraint on the feedback bits are rejected.
// `warm`, when given, seeds one restart (useful for budget sweeps).
ThresholdSearch search_threshold(int L, int K, double budget_sum,
                                 const GainTable& gains, const ErrorLaw& errs,
                                 int grid_resolution = 64, int restarts = 8,
                                 std::uint64_t seed = 1,
                                 const std::vector<double>* warm = nullptr);

struct InterferenceEstimate {
  double mc = 0.0;
  double analytic = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of the average interference under a water-filling
// policy (per link, isotropic laws), together with the analytic two-term
// evaluation. floor_bits applies the integer rounding used when executing
// the policy.
InterferenceEstimate min_interference(const WaterfillPolicy& policy, int L,
                                      int samples, RngStream& rng,
                                      bool floor_bits = false);

struct RateAllocation {
  std::vector<double> rates; // per link, >= 0
  double water_level = 0.0;
  std::vector<double> distances;
  double alpha = 0.0;
};

// Closed-form average-rate split across links under the exponential
// interference approximation: eta - alpha*(L-1)*log2(d), clamped at zero
// with the water level recomputed over the active set.
RateAllocation allocate_rates_closed_form(const std::vector<double>& distances,
                                          double alpha, int L,
                                          double budget_sum);

// General master-problem solver for arbitrary convex nonincreasing per-link
// interference curves (link index, allocated rate) -> interference. Solves
// the one-dimensional dual by bisection; convexity of the supplied curves is
// checked numerically.
RateAllocation allocate_rates_general(
    const std::vector<double>& distances, double alpha, int L,
    double budget_sum,
    const std::function<double(int, double)>& per_link_interference);

// Two-tier water-filling: rate allocation across links composed with
// per-slot water-filling, up to the calibration constant eta_prime.
double two_tier_bits(double gain, double distance, double alpha, int L,
                     double eta_prime);

// Jensen bound on the per-link throughput loss caused by residual
// interference.
double throughput_loss_bound(double avg_interference, double noise_power);

} // namespace fbctl::highmob
