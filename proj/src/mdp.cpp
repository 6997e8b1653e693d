// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fbctl/mathutil.hpp"

namespace fbctl::mdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void normalize_rows(Eigen::MatrixXd& mat, double smoothing) {
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    mat.row(r).array() += smoothing;
    const double s = mat.row(r).sum();
    if (s <= 0.0) throw std::runtime_error("kernel row with zero mass");
    mat.row(r) /= s;
  }
}

// Repairs first-order dominance between adjacent rows: row r+1 (larger grid
// point) must have pointwise larger tails than row r. Sampling noise breaks
// this at nearly indistinguishable rows; the underlying continuous process
// satisfies it, so we restore it by a sequential tail max.
void enforce_row_dominance(Eigen::MatrixXd& mat) {
  const Eigen::Index n = mat.rows();
  const Eigen::Index c = mat.cols();
  Eigen::MatrixXd tails(n, c);
  for (Eigen::Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Eigen::Index j = c - 1; j >= 0; --j) {
      acc += mat(r, j);
      tails(r, j) = acc;
    }
    tails(r, 0) = 1.0;
  }
  for (Eigen::Index r = 1; r < n; ++r)
    for (Eigen::Index j = 0; j < c; ++j)
      tails(r, j) = std::max(tails(r, j), tails(r - 1, j));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const double next = (j + 1 < c) ? tails(r, j + 1) : 0.0;
      mat(r, j) = std::max(0.0, tails(r, j) - next);
    }
  }
}

// Dense closed-loop transition matrix, state index s = m * N + n.
Eigen::MatrixXd closed_loop_matrix(const TransitionKernel& kernel,
                                   const StateGrid& grid,
                                   const Eigen::MatrixXi& table) {
  const int M = grid.gains();
  const int N = grid.errors();
  Eigen::MatrixXd T(M * N, M * N);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      const int bits = table(m, n);
      const int bi = grid.bits_index(bits);
      for (int k = 0; k < M; ++k) {
        const double pg = kernel.gain_kernel(m, k);
        for (int l = 0; l < N; ++l) {
          const double pd = bits > 0 ? kernel.err_dist_fb[bi](l)
                                     : kernel.err_kernel_nofb(n, l);
          T(m * N + n, k * N + l) = pg * pd;
        }
      }
    }
  }
  return T;
}

struct QTables {
  // exp_fb[a] is an M-vector: E[V | gain row m, decision b_set[a] > 0].
  std::vector<Eigen::VectorXd> exp_fb;
  // exp_nofb(m, n) = E[V | state (m, n), no feedback].
  Eigen::MatrixXd exp_nofb;
};

QTables expected_values(const Eigen::MatrixXd& values,
                        const TransitionKernel& kernel,
                        const StateGrid& grid) {
  QTables q;
  const int A = static_cast<int>(grid.b_set.size());
  q.exp_fb.resize(A);
  for (int a = 0; a < A; ++a) {
    if (grid.b_set[a] == 0) continue;
    const Eigen::VectorXd w = values * kernel.err_dist_fb[a];
    q.exp_fb[a] = kernel.gain_kernel * w;
  }
  q.exp_nofb =
      kernel.gain_kernel * (values * kernel.err_kernel_nofb.transpose());
  return q;
}

} // namespace

GainLaw gamma_gain_law(int L) {
  if (L < 1) throw std::domain_error("gamma_gain_law: L must be >= 1");
  GainLaw law;
  law.quantile = [L](double p) { return mathutil::gamma_quantile_int(L, p); };
  law.segment_mean = [L](double a, double b) {
    return mathutil::gamma_conditional_mean_int(L, a, b);
  };
  return law;
}

int StateGrid::gain_index(double g) const {
  const auto it =
      std::upper_bound(gain_edges.begin(), gain_edges.end(), g);
  const int idx = static_cast<int>(it - gain_edges.begin()) - 1;
  return std::clamp(idx, 0, gains() - 1);
}

int StateGrid::err_index(double d) const {
  const auto it = std::upper_bound(err_edges.begin(), err_edges.end(), d);
  const int idx = static_cast<int>(it - err_edges.begin()) - 1;
  return std::clamp(idx, 0, errors() - 1);
}

int StateGrid::bits_index(int bits) const {
  const auto it = std::lower_bound(b_set.begin(), b_set.end(), bits);
  if (it == b_set.end() || *it != bits) return -1;
  return static_cast<int>(it - b_set.begin());
}

StateGrid build_grid(int L, const std::vector<int>& b_set, int segments,
                     const quant::QuantizerModel& model, const GainLaw& law) {
  if (segments < 2) throw std::domain_error("build_grid: need >= 2 segments");
  if (b_set.empty() || b_set.front() != 0)
    throw std::domain_error("build_grid: b_set must start with 0");
  if (!std::is_sorted(b_set.begin(), b_set.end()))
    throw std::domain_error("build_grid: b_set must be ascending");
  (void)L;

  StateGrid grid;
  grid.b_set = b_set;

  // Equal-probability gain segments, each represented by its conditional
  // mean.
  grid.gain_edges.resize(segments);
  grid.gain_points.resize(segments);
  for (int m = 0; m < segments; ++m)
    grid.gain_edges[m] = law.quantile(static_cast<double>(m) / segments);
  for (int m = 0; m < segments; ++m) {
    const double lo = grid.gain_edges[m];
    const double hi = (m + 1 < segments) ? grid.gain_edges[m + 1] : kInf;
    grid.gain_points[m] = law.segment_mean(lo, hi);
  }

  // Error grid points are the expected quantization errors of the available
  // decisions, ascending; edges sit at the geometric midpoints.
  std::vector<double> pts;
  pts.reserve(b_set.size());
  for (int b : b_set) pts.push_back(model.mean_error(b));
  std::sort(pts.begin(), pts.end());
  grid.err_points = pts;
  const int N = static_cast<int>(pts.size());
  grid.err_edges.resize(N);
  grid.err_edges[0] = 0.0;
  for (int n = 1; n < N; ++n)
    grid.err_edges[n] = std::sqrt(pts[n - 1] * pts[n]);
  return grid;
}

TransitionKernel estimate_kernel(const StateGrid& grid,
                                 chan::FadingProcess& process,
                                 const quant::QuantizerModel& model,
                                 int samples, RngStream& rng,
                                 const KernelOptions& opts) {
  if (samples < 1) throw std::domain_error("estimate_kernel: samples >= 1");
  const int M = grid.gains();
  const int N = grid.errors();
  const int L = process.antennas();
  TransitionKernel kernel;
  kernel.gain_kernel = Eigen::MatrixXd::Zero(M, M);
  kernel.err_kernel_nofb = Eigen::MatrixXd::Zero(N, N);

  // Gain chain from a long stationary run.
  for (int t = 0; t < opts.burn_in; ++t) process.advance();
  int prev = grid.gain_index(process.advance().gain);
  std::vector<int> gain_row_counts(M, 0);
  for (int t = 0; t < samples; ++t) {
    const int cur = grid.gain_index(process.advance().gain);
    kernel.gain_kernel(prev, cur) += 1.0;
    gain_row_counts[prev] += 1;
    prev = cur;
  }

  // No-feedback error chain: episode rollouts. Each episode plants the
  // belief as it occurs in operation (right after a feedback event at some
  // resolution, or stale against an independent channel), then lets the
  // error age without feedback while every bin transition along the
  // trajectory is counted. Trajectory visits carry the within-bin occupancy
  // the closed loop actually sees, which one-step restarts from the grid
  // points would miss.
  const int episode_len = 48;
  const int episodes = std::max(1, samples / episode_len);
  const int starts = static_cast<int>(grid.b_set.size()); // index 0: stale
  std::vector<int> err_row_counts(N, 0);
  cvec h(L), q(L), belief(L);
  for (int e = 0; e < episodes; ++e) {
    rng.fill_cgaussian(h.data(), L);
    const double g2 = kern::norm2(h.data(), L);
    cvec s(L);
    const double inv = 1.0 / std::sqrt(g2);
    for (int i = 0; i < L; ++i) s[i] = h[i] * inv;
    const int start = e % starts;
    if (start == 0) {
      rng.unit_vector(belief.data(), L); // stale belief, isotropic error
    } else {
      const double err = model.sample_error(grid.b_set[start], rng);
      double n2;
      do {
        rng.fill_cgaussian(q.data(), L);
        const cxd proj = kern::cdot(s.data(), q.data(), L);
        for (int i = 0; i < L; ++i) q[i] -= proj * s[i];
        n2 = kern::norm2(q.data(), L);
      } while (n2 <= 1e-30);
      kern::axpby(std::sqrt(1.0 - err), s.data(), std::sqrt(err / n2),
                  q.data(), belief.data(), L);
    }
    process.set_state(h);
    int cur = grid.err_index(chan::csit_error(s, belief));
    for (int t = 1; t < episode_len; ++t) {
      const chan::ChannelVector next = process.advance();
      const int nxt = grid.err_index(chan::csit_error(next.dir, belief));
      kernel.err_kernel_nofb(cur, nxt) += 1.0;
      err_row_counts[cur] += 1;
      cur = nxt;
    }
  }

  for (int m = 0; m < M; ++m)
    if (gain_row_counts[m] < opts.min_row_samples)
      kernel.warnings.push_back("gain row " + std::to_string(m) + " has " +
                                std::to_string(gain_row_counts[m]) +
                                " samples");
  for (int n = 0; n < N; ++n)
    if (err_row_counts[n] < opts.min_row_samples)
      kernel.warnings.push_back("error row " + std::to_string(n) + " has " +
                                std::to_string(err_row_counts[n]) +
                                " samples");

  normalize_rows(kernel.gain_kernel, opts.smoothing);
  normalize_rows(kernel.err_kernel_nofb, opts.smoothing);
  if (opts.enforce_dominance) {
    enforce_row_dominance(kernel.gain_kernel);
    enforce_row_dominance(kernel.err_kernel_nofb);
  }

  // Feedback rows: exact binning of the quantizer error law.
  kernel.err_dist_fb.resize(grid.b_set.size());
  for (std::size_t a = 0; a < grid.b_set.size(); ++a) {
    const int bits = grid.b_set[a];
    if (bits == 0) continue;
    Eigen::VectorXd row(N);
    for (int l = 0; l < N; ++l) {
      const double lo = grid.err_edges[l];
      const double hi = (l + 1 < N) ? grid.err_edges[l + 1] : 1.0;
      row(l) = model.error_cdf(hi, bits) - model.error_cdf(lo, bits);
    }
    row.array() += opts.smoothing;
    row /= row.sum();
    kernel.err_dist_fb[a] = row;
  }
  return kernel;
}

double cost_per_stage(int gain_idx, int err_idx, int bits, double bit_price,
                      const StateGrid& grid,
                      const quant::QuantizerModel& model) {
  const double g = grid.gain_points[gain_idx];
  if (bits == 0) return g * grid.err_points[err_idx];
  return g * model.mean_error(bits) + bit_price * bits;
}

double expected_next_value(const Eigen::MatrixXd& values,
                           const TransitionKernel& kernel,
                           const StateGrid& grid, int m, int n, int bits) {
  const int M = grid.gains();
  const int N = grid.errors();
  const int bi = grid.bits_index(bits);
  if (bi < 0) throw std::domain_error("expected_next_value: bits not in b_set");
  double acc = 0.0;
  for (int k = 0; k < M; ++k) {
    double inner = 0.0;
    for (int l = 0; l < N; ++l) {
      const double pd = bits > 0 ? kernel.err_dist_fb[bi](l)
                                 : kernel.err_kernel_nofb(n, l);
      inner += pd * values(k, l);
    }
    acc += kernel.gain_kernel(m, k) * inner;
  }
  return acc;
}

BackupResult bellman_backup(const Eigen::MatrixXd& values,
                            const TransitionKernel& kernel,
                            const StateGrid& grid, double bit_price,
                            const quant::QuantizerModel& model,
                            double discount) {
  const int M = grid.gains();
  const int N = grid.errors();
  const int A = static_cast<int>(grid.b_set.size());
  const QTables q = expected_values(values, kernel, grid);

  BackupResult out;
  out.values.resize(M, N);
  out.decisions.resize(M, N);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      double best = kInf;
      int best_bits = 0;
      for (int a = 0; a < A; ++a) {
        const int bits = grid.b_set[a];
        const double expv =
            bits > 0 ? q.exp_fb[a](m) : q.exp_nofb(m, n);
        const double qv = cost_per_stage(m, n, bits, bit_price, grid, model) +
                          discount * expv;
        if (qv < best) { // strict: ties keep the smaller bit count
          best = qv;
          best_bits = bits;
        }
      }
      out.values(m, n) = best;
      out.decisions(m, n) = best_bits;
    }
  }
  return out;
}

ViResult value_iteration(const TransitionKernel& kernel, const StateGrid& grid,
                         double bit_price, const quant::QuantizerModel& model,
                         double discount, double tol, int max_iter) {
  if (!(discount > 0.0 && discount < 1.0))
    throw std::domain_error("value_iteration: discount must be in (0,1)");
  if (!(tol > 0.0)) throw std::domain_error("value_iteration: tol must be > 0");
  ViResult res;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(grid.gains(), grid.errors());
  BackupResult b;
  bool converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    b = bellman_backup(v, kernel, grid, bit_price, model, discount);
    const double resid = (b.values - v).cwiseAbs().maxCoeff();
    v = b.values;
    if (resid < tol) {
      converged = true;
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.value.values = v;
  res.value.kind = ValueFunction::Kind::Discounted;
  res.value.discount = discount;
  res.value.converged = converged;
  res.policy.table = b.decisions;
  res.policy.bit_price = bit_price;
  const Eigen::MatrixXd pi = stationary_distribution(kernel, grid, b.decisions);
  res.policy.avg_rate = average_bits(b.decisions, pi);
  return res;
}

Evaluation evaluate_policy(const TransitionKernel& kernel,
                           const StateGrid& grid,
                           const Eigen::MatrixXi& table, double bit_price,
                           const quant::QuantizerModel& model) {
  const int M = grid.gains();
  const int N = grid.errors();
  const int S = M * N;
  const Eigen::MatrixXd T = closed_loop_matrix(kernel, grid, table);

  // Unknowns z = [avg_cost, u_1, ..., u_{S-1}] with u_0 pinned to zero.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(S, S);
  Eigen::VectorXd rhs(S);
  for (int s = 0; s < S; ++s) {
    A(s, 0) = 1.0;
    for (int j = 1; j < S; ++j) A(s, j) = (s == j ? 1.0 : 0.0) - T(s, j);
    const int m = s / N;
    const int n = s % N;
    rhs(s) = cost_per_stage(m, n, table(m, n), bit_price, grid, model);
  }
  const Eigen::VectorXd z = A.partialPivLu().solve(rhs);

  Evaluation ev;
  ev.avg_cost = z(0);
  ev.differential.resize(M, N);
  ev.differential(0, 0) = 0.0;
  for (int s = 1; s < S; ++s) ev.differential(s / N, s % N) = z(s);
  return ev;
}

PiResult policy_iteration(const TransitionKernel& kernel,
                          const StateGrid& grid, double bit_price,
                          const quant::QuantizerModel& model, int max_iter) {
  const int M = grid.gains();
  const int N = grid.errors();
  const int A = static_cast<int>(grid.b_set.size());

  PiResult res;
  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(M, N); // zero policy start
  Evaluation ev;
  int it = 0;
  for (; it < max_iter; ++it) {
    ev = evaluate_policy(kernel, grid, table, bit_price, model);
    res.cost_history.push_back(ev.avg_cost);

    const QTables q = expected_values(ev.differential, kernel, grid);
    Eigen::MatrixXi next(M, N);
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) {
        double best = kInf;
        int best_bits = 0;
        for (int a = 0; a < A; ++a) {
          const int bits = grid.b_set[a];
          const double expv = bits > 0 ? q.exp_fb[a](m) : q.exp_nofb(m, n);
          const double qv =
              cost_per_stage(m, n, bits, bit_price, grid, model) + expv;
          if (qv < best) {
            best = qv;
            best_bits = bits;
          }
        }
        next(m, n) = best_bits;
      }
    }
    if (next == table) {
      ++it;
      break;
    }
    // Distinct tables can share the optimal average cost; stop on a cost
    // plateau to avoid cycling among ties.
    const std::size_t h = res.cost_history.size();
    if (h >= 2 && std::abs(res.cost_history[h - 1] - res.cost_history[h - 2]) <=
                      1e-12 * std::max(1.0, std::abs(ev.avg_cost))) {
      ++it;
      break;
    }
    table = next;
  }

  res.iterations = it;
  res.policy.table = table;
  res.policy.bit_price = bit_price;
  const Eigen::MatrixXd pi = stationary_distribution(kernel, grid, table);
  res.policy.avg_rate = average_bits(table, pi);
  res.value.values = ev.differential;
  res.value.kind = ValueFunction::Kind::Differential;
  res.value.avg_cost = ev.avg_cost;
  return res;
}

Eigen::MatrixXd stationary_distribution(const TransitionKernel& kernel,
                                        const StateGrid& grid,
                                        const Eigen::MatrixXi& table) {
  const int M = grid.gains();
  const int N = grid.errors();
  const int S = M * N;
  const Eigen::MatrixXd T = closed_loop_matrix(kernel, grid, table);

  // Solve pi^T (T - I) = 0 with the normalization sum(pi) = 1, then verify
  // the fixed point to power-iteration accuracy and refine if needed.
  Eigen::MatrixXd A = T.transpose() - Eigen::MatrixXd::Identity(S, S);
  A.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
  rhs(0) = 1.0;
  Eigen::VectorXd pi = A.partialPivLu().solve(rhs);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();

  double resid = (T.transpose() * pi - pi).cwiseAbs().sum();
  int guard = 0;
  while (resid > 1e-12 && guard < 200000) {
    pi = T.transpose() * pi;
    pi /= pi.sum();
    resid = (T.transpose() * pi - pi).cwiseAbs().sum();
    ++guard;
  }

  Eigen::MatrixXd out(M, N);
  for (int s = 0; s < S; ++s) out(s / N, s % N) = pi(s);
  return out;
}

double average_bits(const Eigen::MatrixXi& table,
                    const Eigen::MatrixXd& stationary) {
  double acc = 0.0;
  for (Eigen::Index m = 0; m < table.rows(); ++m)
    for (Eigen::Index n = 0; n < table.cols(); ++n)
      acc += stationary(m, n) * table(m, n);
  return acc;
}

Policy solve_budgeted(const TransitionKernel& kernel, const StateGrid& grid,
                      const quant::QuantizerModel& model,
                      double budget_per_link, double rate_tol,
                      double price_tol) {
  if (budget_per_link < 0.0)
    throw std::domain_error("solve_budgeted: budget must be >= 0");

  const auto probe = [&](double price) {
    PiResult r = policy_iteration(kernel, grid, price, model);
    r.policy.bit_price = price;
    return r.policy;
  };

  Policy free_policy = probe(0.0);
  if (free_policy.avg_rate <= budget_per_link + rate_tol) {
    // Budget slack even with free feedback; can't push the rate higher.
    free_policy.saturated = free_policy.avg_rate < budget_per_link - rate_tol;
    return free_policy;
  }

  double lo = 0.0; // rate(lo) > budget
  double hi = 1.0;
  Policy hi_policy = probe(hi);
  int guard = 0;
  while (hi_policy.avg_rate > budget_per_link && guard++ < 60) {
    lo = hi;
    hi *= 2.0;
    hi_policy = probe(hi);
  }
  if (hi_policy.avg_rate > budget_per_link)
    throw std::runtime_error("solve_budgeted: could not bracket the price");

  Policy best = hi_policy; // feasible side
  while (hi - lo > price_tol &&
         std::abs(best.avg_rate - budget_per_link) > rate_tol) {
    const double mid = 0.5 * (lo + hi);
    Policy p = probe(mid);
    if (p.avg_rate > budget_per_link) {
      lo = mid;
    } else {
      hi = mid;
      if (p.avg_rate > best.avg_rate) best = p; // closer to budget from below
    }
  }
  return best;
}

} // namespace fbctl::mdp
