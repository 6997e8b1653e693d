// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/highmob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fbctl/mathutil.hpp"

namespace fbctl::highmob {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int step_index(const std::vector<double>& ascending, double x) {
  const auto it = std::upper_bound(ascending.begin(), ascending.end(), x);
  const int idx = static_cast<int>(it - ascending.begin()) - 1;
  return std::clamp(idx, 0, static_cast<int>(ascending.size()) - 1);
}

} // namespace

GainTable gamma_gain_table(int L, int cells) {
  if (cells < 2) throw std::domain_error("gamma_gain_table: cells >= 2");
  GainTable tab;
  tab.points.resize(cells);
  tab.weights.assign(cells, 1.0 / cells);
  double lo = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double hi = (i + 1 < cells)
                          ? mathutil::gamma_quantile_int(
                                L, static_cast<double>(i + 1) / cells)
                          : kInf;
    tab.points[i] = mathutil::gamma_conditional_mean_int(L, lo, hi);
    lo = hi;
  }
  return tab;
}

ErrorLaw isotropic_error_law(int L) {
  if (L < 2) throw std::domain_error("isotropic_error_law: L >= 2");
  ErrorLaw law;
  law.cdf = [L](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return std::pow(t, L - 1);
  };
  // E[err ; err < t] = ((L-1)/L) * t^L
  law.partial_mean = [L](double t) {
    const double tc = std::clamp(t, 0.0, 1.0);
    return (static_cast<double>(L - 1) / L) * std::pow(tc, L);
  };
  return law;
}

double WaterfillPolicy::threshold_at(double gain) const {
  return threshold[step_index(gain_grid, gain)];
}

double waterfill_bits(double gain, double err, const WaterfillPolicy& policy,
                      int L) {
  if (!(gain > 0.0)) throw std::domain_error("waterfill_bits: gain must be > 0");
  if (err < policy.threshold_at(gain)) return 0.0;
  const double bits = policy.water_level - (L - 1) * std::log2(1.0 / gain);
  return bits > 0.0 ? bits : 0.0;
}

namespace {

// Cell-aggregated objective evaluation. The threshold is constant on each
// grid cell, so the feedback probability, the conditional log-gain moment
// and the silent-region moment all reduce to per-cell sums.
struct SearchContext {
  int L = 4;
  double budget_link = 0.0;
  std::vector<double> cell_w;      // total gain mass per cell
  std::vector<double> cell_wlog;   // sum w * log2(1/g)
  std::vector<double> cell_wg;     // sum w * g
  std::vector<double> cell_gmin;   // smallest tabulated gain in the cell
  std::vector<double> cand_value;  // descending
  std::vector<double> cand_surv;   // Pr(err >= value)
  std::vector<double> cand_pm;     // E[err ; err < value]
  std::vector<double> cand_bound;  // usefulness lower bound on bits
};

struct PsiEval {
  double objective = kInf;
  double upsilon = 0.0;
  double p_fb = 0.0;
  bool feasible = false;
};

PsiEval evaluate(const SearchContext& ctx, const std::vector<int>& cand_idx) {
  const int R = static_cast<int>(cand_idx.size());
  double p_fb = 0.0, elog_sum = 0.0, pm_sum = 0.0;
  double min_margin = kInf;
  for (int i = 0; i < R; ++i) {
    const int c = cand_idx[i];
    const double s = ctx.cand_surv[c];
    p_fb += ctx.cell_w[i] * s;
    elog_sum += ctx.cell_wlog[i] * s;
    pm_sum += ctx.cell_wg[i] * ctx.cand_pm[c];
    if (s > 0.0) {
      const double margin =
          (ctx.L - 1) * std::log2(ctx.cell_gmin[i]) - ctx.cand_bound[c];
      min_margin = std::min(min_margin, margin);
    }
  }

  PsiEval ev;
  ev.p_fb = p_fb;
  if (p_fb < 1e-12) {
    ev.upsilon = 0.0;
    ev.feasible = true;
    ev.objective = pm_sum / (ctx.L - 1);
    return ev;
  }
  ev.upsilon = ctx.budget_link / p_fb + (ctx.L - 1) * (elog_sum / p_fb);
  ev.feasible = ev.upsilon + min_margin >= -1e-9;
  if (!ev.feasible) return ev;
  ev.objective = std::exp2(-ev.upsilon / (ctx.L - 1)) * p_fb / ctx.L +
                 pm_sum / (ctx.L - 1);
  return ev;
}

} // namespace

ThresholdSearch search_threshold(int L, int K, double budget_sum,
                                 const GainTable& gains, const ErrorLaw& errs,
                                 int grid_resolution, int restarts,
                                 std::uint64_t seed,
                                 const std::vector<double>* warm) {
  if (L < 2 || K < 2) throw std::domain_error("search_threshold: L,K >= 2");
  if (!(budget_sum > 0.0))
    throw std::domain_error("search_threshold: budget must be > 0");
  if (grid_resolution < 2 || gains.points.size() < 2)
    throw std::domain_error("search_threshold: degenerate grids");

  const int R = grid_resolution;
  std::vector<double> grid(R);
  const double glo = std::log(gains.points.front());
  const double ghi = std::log(gains.points.back());
  for (int i = 0; i < R; ++i)
    grid[i] = std::exp(glo + (ghi - glo) * i / (R - 1));

  SearchContext ctx;
  ctx.L = L;
  ctx.budget_link = budget_sum / (K - 1);
  ctx.cell_w.assign(R, 0.0);
  ctx.cell_wlog.assign(R, 0.0);
  ctx.cell_wg.assign(R, 0.0);
  ctx.cell_gmin.assign(R, kInf);
  for (std::size_t j = 0; j < gains.points.size(); ++j) {
    const double g = gains.points[j];
    const double w = gains.weights[j];
    const int i = step_index(grid, g);
    ctx.cell_w[i] += w;
    ctx.cell_wlog[i] += w * std::log2(1.0 / g);
    ctx.cell_wg[i] += w * g;
    ctx.cell_gmin[i] = std::min(ctx.cell_gmin[i], g);
  }
  for (int i = 0; i < R; ++i)
    if (!std::isfinite(ctx.cell_gmin[i])) ctx.cell_gmin[i] = grid[i];

  // Candidate threshold levels: "off" (1.0) plus a fine geometric ladder.
  ctx.cand_value.push_back(1.0);
  for (int j = 1; j <= 106; ++j)
    ctx.cand_value.push_back(std::exp2(-j / 4.0));
  const int C = static_cast<int>(ctx.cand_value.size());
  ctx.cand_surv.resize(C);
  ctx.cand_pm.resize(C);
  ctx.cand_bound.resize(C);
  for (int c = 0; c < C; ++c) {
    const double v = ctx.cand_value[c];
    ctx.cand_surv[c] = 1.0 - errs.cdf(v);
    ctx.cand_pm[c] = errs.partial_mean(v);
    ctx.cand_bound[c] =
        std::max(0.0, (L - 1) * std::log2((L - 1.0) / (L * v)));
  }

  RngStream rng(seed);
  std::vector<int> best_idx;
  PsiEval best;

  const auto consider = [&](const std::vector<int>& idx, const PsiEval& ev) {
    if (!ev.feasible) return;
    if (best_idx.empty() || ev.objective < best.objective) {
      best = ev;
      best_idx = idx;
    }
  };

  // Seed pool. Coordinate descent on the monotone lattice moves one
  // coordinate per sweep, so it needs starts in the right basin: scan the
  // two-parameter family "off below cutoff j, flat level c above" (which
  // contains never/always and every flat-threshold shape) and keep the best
  // few members as starting points.
  std::vector<std::vector<int>> seeds;
  {
    std::vector<std::pair<double, std::vector<int>>> family;
    for (int j = 0; j <= R; ++j) {
      for (int c = 1; c < C; ++c) {
        std::vector<int> idx(R);
        for (int i = 0; i < R; ++i) idx[i] = i < j ? 0 : c;
        const PsiEval ev = evaluate(ctx, idx);
        if (ev.feasible) family.emplace_back(ev.objective, std::move(idx));
      }
    }
    std::sort(family.begin(), family.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < family.size() && k < 4; ++k)
      seeds.push_back(family[k].second);
  }
  seeds.push_back(std::vector<int>(R, 0)); // never feed back
  if (warm && static_cast<int>(warm->size()) == R) {
    std::vector<int> idx(R);
    for (int i = 0; i < R; ++i) {
      const double v = (*warm)[i];
      int bi = 0;
      double bd = kInf;
      for (int c = 0; c < C; ++c) {
        const double d = std::abs(ctx.cand_value[c] - v);
        if (d < bd) {
          bd = d;
          bi = c;
        }
      }
      idx[i] = bi;
    }
    for (int i = 1; i < R; ++i) idx[i] = std::max(idx[i], idx[i - 1]);
    seeds.push_back(std::move(idx));
  }
  while (static_cast<int>(seeds.size()) < std::max(restarts, 2) + 5) {
    std::vector<int> idx(R);
    for (int i = 0; i < R; ++i)
      idx[i] = static_cast<int>(rng.uniform() * C) % C;
    std::sort(idx.begin(), idx.end());
    seeds.push_back(std::move(idx));
  }

  const int max_sweeps = std::max(2 * R, 120);
  for (std::vector<int>& idx : seeds) {
    PsiEval cur = evaluate(ctx, idx);
    consider(idx, cur);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      bool improved = false;
      for (int i = 0; i < R; ++i) {
        // candidate index must stay nondecreasing along the grid
        const int lo = (i == 0) ? 0 : idx[i - 1];
        const int hi = (i + 1 < R) ? idx[i + 1] : C - 1;
        const int orig = idx[i];
        int best_c = orig;
        PsiEval best_ev = cur;
        for (int c = lo; c <= hi; ++c) {
          if (c == orig) continue;
          idx[i] = c;
          const PsiEval ev = evaluate(ctx, idx);
          const bool better =
              ev.feasible && (!best_ev.feasible ||
                              ev.objective < best_ev.objective - 1e-15);
          if (better) {
            best_ev = ev;
            best_c = c;
          }
        }
        if (best_c != orig) improved = true;
        idx[i] = best_c;
        cur = best_ev;
      }
      consider(idx, cur);
      if (!improved) break;
    }
  }

  if (best_idx.empty())
    throw std::runtime_error("search_threshold: no feasible threshold found");

  ThresholdSearch out;
  out.policy.L = L;
  out.policy.gain_grid = grid;
  out.policy.budget_per_link = ctx.budget_link;
  out.policy.threshold.resize(R);
  for (int i = 0; i < R; ++i)
    out.policy.threshold[i] = ctx.cand_value[best_idx[i]];
  out.policy.water_level = best.upsilon;
  out.interference = best.objective;
  out.fb_probability = best.p_fb;
  out.feasible = true;
  return out;
}

InterferenceEstimate min_interference(const WaterfillPolicy& policy, int L,
                                      int samples, RngStream& rng,
                                      bool floor_bits) {
  if (samples < 1) throw std::domain_error("min_interference: samples >= 1");
  double acc = 0.0, acc2 = 0.0;
  for (int t = 0; t < samples; ++t) {
    double g = 0.0;
    for (int i = 0; i < L; ++i) {
      const cxd z = rng.cgaussian();
      g += z.real() * z.real() + z.imag() * z.imag();
    }
    const double err = std::pow(rng.uniform(), 1.0 / (L - 1));
    double cost;
    if (err >= policy.threshold_at(g)) {
      double bits = waterfill_bits(g, err, policy, L);
      if (floor_bits) bits = std::floor(bits);
      cost = g * ((L - 1.0) / L) * std::exp2(-bits / (L - 1));
    } else {
      cost = g * err;
    }
    const double v = cost / (L - 1);
    acc += v;
    acc2 += v * v;
  }
  InterferenceEstimate est;
  est.mc = acc / samples;
  const double var = std::max(0.0, acc2 / samples - est.mc * est.mc);
  est.std_error = std::sqrt(var / samples);

  // Analytic two-term evaluation at the stored water level (continuous
  // bits).
  const GainTable tab = gamma_gain_table(L, 512);
  const ErrorLaw law = isotropic_error_law(L);
  double p_fb = 0.0, pm_sum = 0.0;
  for (std::size_t j = 0; j < tab.points.size(); ++j) {
    const double psi = policy.threshold_at(tab.points[j]);
    p_fb += tab.weights[j] * (1.0 - law.cdf(psi));
    pm_sum += tab.weights[j] * tab.points[j] * law.partial_mean(psi);
  }
  est.analytic = std::exp2(-policy.water_level / (L - 1)) * p_fb / L +
                 pm_sum / (L - 1);
  return est;
}

RateAllocation allocate_rates_closed_form(const std::vector<double>& distances,
                                          double alpha, int L,
                                          double budget_sum) {
  if (distances.empty())
    throw std::domain_error("allocate_rates: need at least one link");
  for (double d : distances)
    if (!(d > 0.0)) throw std::domain_error("allocate_rates: distances > 0");
  if (budget_sum < 0.0)
    throw std::domain_error("allocate_rates: budget must be >= 0");

  const int n = static_cast<int>(distances.size());
  RateAllocation out;
  out.distances = distances;
  out.alpha = alpha;
  out.rates.assign(n, 0.0);

  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;
  double eta = 0.0;
  while (!active.empty()) {
    double logsum = 0.0;
    for (int i : active) logsum += std::log2(distances[i]);
    eta = (budget_sum + alpha * (L - 1) * logsum) / active.size();
    bool clamped = false;
    std::vector<int> next;
    for (int i : active) {
      const double r = eta - alpha * (L - 1) * std::log2(distances[i]);
      if (r < 0.0) {
        out.rates[i] = 0.0;
        clamped = true;
      } else {
        next.push_back(i);
      }
    }
    if (!clamped) {
      for (int i : active)
        out.rates[i] = eta - alpha * (L - 1) * std::log2(distances[i]);
      break;
    }
    active = std::move(next);
  }
  out.water_level = eta;
  return out;
}

namespace {

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

} // namespace

RateAllocation allocate_rates_general(
    const std::vector<double>& distances, double alpha, int L,
    double budget_sum,
    const std::function<double(int, double)>& per_link_interference) {
  if (distances.empty())
    throw std::domain_error("allocate_rates: need at least one link");
  if (budget_sum < 0.0)
    throw std::domain_error("allocate_rates: budget must be >= 0");
  const int n = static_cast<int>(distances.size());

  // The decomposition is only valid for convex nonincreasing per-link
  // curves; verify on a sample grid before solving.
  const int probes = 65;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(probes);
    double scale = 0.0;
    for (int k = 0; k < probes; ++k) {
      v[k] = per_link_interference(i, budget_sum * k / (probes - 1));
      scale = std::max(scale, std::abs(v[k]));
    }
    const double tol = 1e-9 * std::max(1.0, scale);
    for (int k = 0; k + 1 < probes; ++k)
      if (v[k + 1] > v[k] + tol)
        throw std::invalid_argument(
            "allocate_rates_general: per-link interference curve must be "
            "nonincreasing in the allocated rate");
    for (int k = 1; k + 1 < probes; ++k)
      if (v[k + 1] - 2.0 * v[k] + v[k - 1] < -tol)
        throw std::invalid_argument(
            "allocate_rates_general: per-link interference curve must be "
            "convex in the allocated rate");
  }

  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = std::pow(distances[i], -alpha);

  const auto rates_at = [&](double price) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
      r[i] = golden_min(
          [&](double b) { return w[i] * per_link_interference(i, b) + price * b; },
          0.0, budget_sum, 1e-9 * std::max(1.0, budget_sum));
    }
    return r;
  };
  const auto total = [&](const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x;
    return s;
  };

  RateAllocation out;
  out.distances = distances;
  out.alpha = alpha;

  std::vector<double> rates = rates_at(0.0);
  if (total(rates) > budget_sum + 1e-9) {
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (total(rates_at(hi)) > budget_sum && guard++ < 200) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (total(rates_at(mid)) > budget_sum)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    rates = rates_at(hi);
    const double t = total(rates);
    if (t > budget_sum && t > 0.0)
      for (double& r : rates) r *= budget_sum / t;
  }
  out.rates = rates;

  // Implied water level, averaged over links that received a positive rate.
  double eta = 0.0;
  int cnt = 0;
  for (int i = 0; i < n; ++i) {
    if (rates[i] > 1e-9) {
      eta += rates[i] + alpha * (L - 1) * std::log2(distances[i]);
      ++cnt;
    }
  }
  out.water_level = cnt > 0 ? eta / cnt : 0.0;
  return out;
}

double two_tier_bits(double gain, double distance, double alpha, int L,
                     double eta_prime) {
  if (!(gain > 0.0) || !(distance > 0.0))
    throw std::domain_error("two_tier_bits: gain and distance must be > 0");
  const double bits = eta_prime - alpha * (L - 1) * std::log2(distance) -
                      (L - 1) * std::log2(1.0 / gain);
  return bits > 0.0 ? bits : 0.0;
}

double throughput_loss_bound(double avg_interference, double noise_power) {
  if (avg_interference < 0.0 || noise_power < 0.0)
    throw std::domain_error("throughput_loss_bound: inputs must be >= 0");
  if (avg_interference == 0.0) return 0.0;
  if (noise_power == 0.0) return kInf;
  return std::log2(1.0 + avg_interference / noise_power);
}

} // namespace fbctl::highmob
