// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "fbctl/netsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

namespace fbctl::netsim {

namespace {

// Stream purposes for per-(trial, link) seed derivation.
enum : std::uint64_t {
  kFadingStream = 1,
  kQuantStream = 2,
  kZfStream = 3,
  kDiffStream = 4
};

// Modified Gram-Schmidt basis of the span of the given vectors; directions
// that are numerically dependent are dropped.
std::vector<cvec> orthonormal_basis(const std::vector<cvec>& vs, int L) {
  std::vector<cvec> basis;
  for (const cvec& v : vs) {
    cvec r = v;
    for (const cvec& b : basis) {
      const cxd proj = kern::cdot(b.data(), r.data(), L);
      for (int i = 0; i < L; ++i) r[i] -= proj * b[i];
    }
    const double n2 = kern::norm2(r.data(), L);
    if (n2 > 1e-20) {
      const double inv = 1.0 / std::sqrt(n2);
      for (int i = 0; i < L; ++i) r[i] *= inv;
      basis.push_back(std::move(r));
    }
  }
  return basis;
}

int distinct_decisions(const Eigen::MatrixXi& table) {
  std::set<int> vals;
  for (Eigen::Index m = 0; m < table.rows(); ++m)
    for (Eigen::Index n = 0; n < table.cols(); ++n) vals.insert(table(m, n));
  return static_cast<int>(vals.size());
}

struct TrialStats {
  double interference = 0.0;
  double throughput = 0.0;
  double bits = 0.0;
  double gain_beta_err = 0.0;
  double gain_err = 0.0;
  double identity_residual = 0.0;
};

} // namespace

std::string Scheme::name() const {
  switch (type) {
    case Type::Controlled:
      return "controlled";
    case Type::WaterfillControlled:
      return "waterfill";
    case Type::Simple:
      return "simple";
    case Type::Differential:
      return "differential";
    case Type::PerfectCsit:
      return "perfect";
  }
  return "?";
}

cvec zf_beamformer(const std::vector<cvec>& interference_csit, int L,
                   RngStream& rng, const cvec* direct_dir) {
  if (static_cast<int>(interference_csit.size()) > L - 1)
    throw std::invalid_argument("zf_beamformer: too many constraints for L");
  const std::vector<cvec> basis = orthonormal_basis(interference_csit, L);

  const auto project_out = [&](cvec v) {
    for (const cvec& b : basis) {
      const cxd proj = kern::cdot(b.data(), v.data(), L);
      for (int i = 0; i < L; ++i) v[i] -= proj * b[i];
    }
    return v;
  };

  if (direct_dir) {
    cvec f = project_out(*direct_dir);
    const double n2 = kern::norm2(f.data(), L);
    if (n2 > 1e-20) {
      const double inv = 1.0 / std::sqrt(n2);
      for (int i = 0; i < L; ++i) f[i] *= inv;
      return f;
    }
  }
  // Random isotropic direction in the null space.
  for (;;) {
    cvec f = project_out(rng.unit_vector(L));
    const double n2 = kern::norm2(f.data(), L);
    if (n2 > 1e-12) {
      const double inv = 1.0 / std::sqrt(n2);
      for (int i = 0; i < L; ++i) f[i] *= inv;
      return f;
    }
  }
}

cvec differential_update(const cvec& prev, const cvec& true_dir, double nu,
                         int codebook_bits, RngStream& rng) {
  const int L = static_cast<int>(prev.size());
  if (!(nu > 0.0 && nu < 1.0))
    throw std::domain_error("differential_update: nu must be in (0,1)");
  if (codebook_bits < 0 || codebook_bits > 20)
    throw std::domain_error("differential_update: codebook_bits out of range");
  const std::size_t count = std::size_t{1} << codebook_bits;
  const double a = std::sqrt(1.0 - nu * nu);
  const double entry_scale = std::sqrt(1.0 / L); // E||M s||^2 = 1

  // For each candidate rotation M the updated belief is a*prev + nu*(M prev).
  // Score = |v^H s|^2 / ||v||^2, evaluated from three reductions per
  // candidate.
  const cxd ps = kern::cdot(prev.data(), true_dir.data(), L);
  cvec m_row(L), w(L);
  cvec best_dir = prev;
  double best_score = -1.0;
  for (std::size_t c = 0; c < count; ++c) {
    std::fill(w.begin(), w.end(), cxd(0.0, 0.0));
    for (int r = 0; r < L; ++r) {
      rng.fill_cgaussian(m_row.data(), L);
      cxd acc(0.0, 0.0);
      for (int i = 0; i < L; ++i) acc += m_row[i] * prev[i];
      w[r] = entry_scale * acc;
    }
    const cxd ws = kern::cdot(w.data(), true_dir.data(), L);
    const cxd wp = kern::cdot(w.data(), prev.data(), L);
    const double wn = kern::norm2(w.data(), L);
    const cxd num = a * ps + nu * ws;
    const double den =
        a * a + nu * nu * wn + 2.0 * a * nu * wp.real();
    if (den <= 1e-30) continue;
    const double score = (num.real() * num.real() + num.imag() * num.imag()) / den;
    if (score > best_score) {
      best_score = score;
      kern::axpby(a, prev.data(), nu, w.data(), best_dir.data(), L);
      const double inv = 1.0 / std::sqrt(den);
      for (int i = 0; i < L; ++i) best_dir[i] *= inv;
    }
  }
  return best_dir;
}

namespace {

TrialStats run_trial(const NetworkConfig& cfg, int trial, int overhead_bits) {
  const int K = cfg.K;
  const int L = cfg.L;
  const double noise = std::pow(10.0, -cfg.snr_db / 10.0);
  const double rho = cfg.fading == chan::FadingMode::Ar1
                         ? chan::clarke_rho(cfg.doppler)
                         : 0.0;

  // Channel processes for every (rx m, tx n) pair, CSIT per cross pair.
  std::vector<std::vector<chan::FadingProcess>> fading;
  std::vector<std::vector<cvec>> belief(K, std::vector<cvec>(K));
  std::vector<std::vector<RngStream>> qrng;
  fading.reserve(K);
  qrng.reserve(K);
  for (int m = 0; m < K; ++m) {
    std::vector<chan::FadingProcess> row;
    std::vector<RngStream> qrow;
    for (int n = 0; n < K; ++n) {
      row.emplace_back(cfg.fading, rho, L,
                       derive_seed(cfg.seed, {kFadingStream,
                                              static_cast<std::uint64_t>(trial),
                                              static_cast<std::uint64_t>(m),
                                              static_cast<std::uint64_t>(n)}));
      qrow.emplace_back(derive_seed(
          cfg.seed ^ cfg.quantizer.seed,
          {kQuantStream, static_cast<std::uint64_t>(trial),
           static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n)}));
      if (m != n) belief[m][n] = qrow.back().unit_vector(L);
    }
    fading.push_back(std::move(row));
    qrng.push_back(std::move(qrow));
  }
  std::vector<RngStream> zfrng;
  for (int n = 0; n < K; ++n)
    zfrng.emplace_back(derive_seed(
        cfg.seed, {kZfStream, static_cast<std::uint64_t>(trial),
                   static_cast<std::uint64_t>(n)}));

  const auto distance_of = [&](int m, int n) {
    if (cfg.distances.empty()) return 1.0;
    const int j = ((n - m) % K + K) % K; // 1 .. K-1
    return cfg.distances[(j - 1) % cfg.distances.size()];
  };

  std::vector<std::vector<chan::ChannelVector>> ch(
      K, std::vector<chan::ChannelVector>(K));
  std::vector<std::vector<double>> data_err(K, std::vector<double>(K, 0.0));

  TrialStats st;
  long samples = 0;
  long cross_samples = 0;
  const int total_slots = cfg.warmup + cfg.slots;
  for (int t = 0; t < total_slots; ++t) {
    for (int m = 0; m < K; ++m)
      for (int n = 0; n < K; ++n) ch[m][n] = fading[m][n].advance();

    // Feedback phase: per cross link decide bits and update the belief.
    double slot_bits = 0.0; // per receiver on average
    for (int m = 0; m < K; ++m) {
      for (int n = 0; n < K; ++n) {
        if (m == n) continue;
        const double g = ch[m][n].gain;
        const cvec& s = ch[m][n].dir;
        const double derr = chan::csit_error(s, belief[m][n]);

        if (cfg.scheme.type == Scheme::Type::PerfectCsit) {
          belief[m][n] = s;
          data_err[m][n] = 0.0;
          continue;
        }
        if (cfg.scheme.type == Scheme::Type::Differential) {
          belief[m][n] =
              differential_update(belief[m][n], s, cfg.scheme.nu,
                                  cfg.scheme.codebook_bits, qrng[m][n]);
          data_err[m][n] = chan::csit_error(s, belief[m][n]);
          slot_bits += cfg.scheme.codebook_bits;
          continue;
        }

        int bits = 0;
        switch (cfg.scheme.type) {
          case Scheme::Type::Controlled: {
            const auto& grid = cfg.scheme.grid;
            bits = cfg.scheme.policy.table(grid.gain_index(g),
                                           grid.err_index(derr));
            break;
          }
          case Scheme::Type::WaterfillControlled: {
            const int j = (((n - m) % K + K) % K) - 1;
            const auto& pol =
                cfg.scheme.link_policies[j % cfg.scheme.link_policies.size()];
            bits = static_cast<int>(
                std::floor(waterfill_bits(g, derr, pol, L)));
            break;
          }
          case Scheme::Type::Simple:
            bits = cfg.scheme.fixed_bits;
            break;
          default:
            break;
        }

        const quant::QuantizationOutcome out =
            quant::quantize(s, bits, cfg.quantizer, qrng[m][n]);
        if (!out.no_feedback) belief[m][n] = out.direction;
        data_err[m][n] = out.no_feedback ? derr : out.error;
        slot_bits += bits;
      }
    }

    // Data phase: ZF beamformers from the post-feedback CSIT, perfect
    // direct-link CSIT.
    std::vector<cvec> beam(K);
    for (int n = 0; n < K; ++n) {
      std::vector<cvec> constraints;
      constraints.reserve(K - 1);
      for (int m = 0; m < K; ++m)
        if (m != n) constraints.push_back(belief[m][n]);
      beam[n] = zf_beamformer(constraints, L, zfrng[n], &ch[n][n].dir);
    }

    if (t < cfg.warmup) continue;

    double slot_interf = 0.0;
    double slot_thr = 0.0;
    for (int m = 0; m < K; ++m) {
      double interf = 0.0;
      for (int n = 0; n < K; ++n) {
        if (n == m) continue;
        const double raw = ch[m][n].gain *
                           kern::abs2_cdot(beam[n].data(), ch[m][n].dir.data(),
                                           L);
        interf += std::pow(distance_of(m, n), -cfg.alpha) * raw;

        const chan::OrthoDecomposition dec =
            chan::decompose(ch[m][n].dir, belief[m][n], beam[n]);
        const double gbd = ch[m][n].gain * dec.beta * data_err[m][n];
        st.gain_beta_err += gbd;
        st.gain_err += ch[m][n].gain * data_err[m][n];
        st.identity_residual =
            std::max(st.identity_residual, std::abs(raw - gbd));
        ++cross_samples;
      }
      const double sig =
          ch[m][m].gain *
          kern::abs2_cdot(beam[m].data(), ch[m][m].dir.data(), L);
      slot_interf += interf;
      slot_thr += std::log2(1.0 + sig / (noise + interf));
    }
    st.interference += slot_interf / K;
    st.throughput += slot_thr / K;
    st.bits += slot_bits / K + (K - 1) * overhead_bits;
    ++samples;
  }

  st.interference /= samples;
  st.throughput /= samples;
  st.bits /= samples;
  st.gain_beta_err /= cross_samples;
  st.gain_err /= cross_samples;
  return st;
}

} // namespace

SimResult run_simulation(const NetworkConfig& cfg) {
  if (cfg.K < 2) throw std::domain_error("run_simulation: K must be >= 2");
  if (cfg.L < cfg.K)
    throw std::domain_error("run_simulation: zero-forcing requires L >= K");
  if (!cfg.distances.empty() &&
      static_cast<int>(cfg.distances.size()) != cfg.K - 1)
    throw std::domain_error("run_simulation: need K-1 interferer distances");
  for (double d : cfg.distances)
    if (!(d > 0.0)) throw std::domain_error("run_simulation: distances > 0");
  if (cfg.scheme.type == Scheme::Type::Controlled &&
      cfg.scheme.policy.table.size() == 0)
    throw std::domain_error("run_simulation: controlled scheme needs a policy");
  if (cfg.scheme.type == Scheme::Type::WaterfillControlled &&
      cfg.scheme.link_policies.empty())
    throw std::domain_error(
        "run_simulation: waterfill scheme needs link policies");

  // Decision-signaling overhead per link per slot; only a policy-controlled
  // scheme has a varying decision to announce.
  int overhead = 0;
  if (cfg.scheme.type == Scheme::Type::Controlled) {
    const int d = distinct_decisions(cfg.scheme.policy.table);
    overhead = static_cast<int>(std::ceil(std::log2(std::max(1, d))));
  }

  std::vector<TrialStats> stats(cfg.trials);
  const int threads = std::max(1, cfg.threads);
  if (threads == 1 || cfg.trials == 1) {
    for (int t = 0; t < cfg.trials; ++t) stats[t] = run_trial(cfg, t, overhead);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(threads, cfg.trials); ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= cfg.trials) return;
          stats[t] = run_trial(cfg, t, overhead);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SimResult res;
  res.overhead_bits = overhead;
  double thr2 = 0.0, int2 = 0.0;
  for (const TrialStats& s : stats) {
    res.avg_interference += s.interference;
    res.throughput_per_user += s.throughput;
    res.avg_feedback_rate += s.bits;
    res.mean_gain_beta_err += s.gain_beta_err;
    res.mean_gain_err += s.gain_err;
    res.max_identity_residual =
        std::max(res.max_identity_residual, s.identity_residual);
    thr2 += s.throughput * s.throughput;
    int2 += s.interference * s.interference;
  }
  const int T = cfg.trials;
  res.avg_interference /= T;
  res.throughput_per_user /= T;
  res.avg_feedback_rate /= T;
  res.mean_gain_beta_err /= T;
  res.mean_gain_err /= T;
  res.avg_feedback_bits = res.avg_feedback_rate - (cfg.K - 1) * overhead;
  if (T > 1) {
    const double vt =
        std::max(0.0, (thr2 / T - res.throughput_per_user *
                                      res.throughput_per_user) *
                          T / (T - 1.0));
    const double vi = std::max(
        0.0,
        (int2 / T - res.avg_interference * res.avg_interference) * T /
            (T - 1.0));
    res.confidence_halfwidth = 1.96 * std::sqrt(vt / T);
    res.interference_halfwidth = 1.96 * std::sqrt(vi / T);
  }
  return res;
}

double tune_differential_nu(const NetworkConfig& base,
                            const std::vector<double>& candidates,
                            int slots, int trials) {
  if (candidates.empty())
    throw std::domain_error("tune_differential_nu: no candidates");
  NetworkConfig cfg = base;
  cfg.slots = slots;
  cfg.trials = trials;
  double best_nu = candidates.front();
  double best_thr = -1.0;
  for (double nu : candidates) {
    cfg.scheme.nu = nu;
    const SimResult r = run_simulation(cfg);
    if (r.throughput_per_user > best_thr) {
      best_thr = r.throughput_per_user;
      best_nu = nu;
    }
  }
  return best_nu;
}

} // namespace fbctl::netsim
