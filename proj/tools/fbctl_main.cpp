// SPDX-License-Identifier: Apache-2.0
//
// fbctl: stochastic control of CSI feedback in MISO interference channels
// Copyright (c) 2026 the fbctl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Experiment runner. Subcommands:
//   solve-policy    constrained-MDP policy + structure report
//   simulate        Monte Carlo sweeps over SNR / feedback budget / Doppler
//   waterfill       high-mobility threshold search
//   allocate-rates  average-rate split across asymmetric links
//   verify-structure  re-check a policy CSV
//
// Exit codes: 0 ok, 1 structure verification failed, 2 config error.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "fbctl/config.hpp"
#include "fbctl/csvio.hpp"
#include "fbctl/highmob.hpp"
#include "fbctl/netsim.hpp"
#include "fbctl/structure.hpp"

namespace fs = std::filesystem;
using namespace fbctl;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool allow_violations = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment config");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master RNG seed")
      ->check(CLI::NonNegativeNumber)
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
  cmd->add_flag("--allow-violations", args.allow_violations,
                "exit 0 even if structure checks fail");
}

cli::ExperimentConfig effective_config(const CommonArgs& args) {
  cli::ExperimentConfig cfg = args.config_path.empty()
                                  ? cli::default_config()
                                  : cli::load_config_file(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.threads > 0) cfg.threads = args.threads;
  if (cfg.threads == 0)
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  return cfg;
}

fs::path ensure_out_dir(const cli::ExperimentConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

struct SolvedPolicy {
  mdp::StateGrid grid;
  mdp::TransitionKernel kernel;
  mdp::Policy policy;
  Eigen::MatrixXd differential;
};

SolvedPolicy solve_controlled(const cli::ExperimentConfig& cfg, double f_d,
                              double b_bar) {
  SolvedPolicy out;
  const quant::QuantizerModel model = cli::make_quantizer(cfg);
  out.grid = mdp::build_grid(cfg.L, cfg.b_set, cfg.grid_m, model,
                             mdp::gamma_gain_law(cfg.L));
  const double rho = cfg.fading == "ar1" ? chan::clarke_rho(f_d) : 0.0;
  chan::FadingProcess process(cli::fading_mode(cfg), rho, cfg.L,
                              derive_seed(cfg.seed, {101}));
  RngStream krng(derive_seed(cfg.seed, {102}));
  out.kernel = mdp::estimate_kernel(out.grid, process, model,
                                    cfg.kernel_samples, krng);
  out.policy = mdp::solve_budgeted(out.kernel, out.grid, model,
                                   b_bar / (cfg.K - 1), cfg.rate_tol,
                                   cfg.price_tol);
  out.differential = mdp::evaluate_policy(out.kernel, out.grid,
                                          out.policy.table,
                                          out.policy.bit_price, model)
                         .differential;
  return out;
}

std::vector<highmob::WaterfillPolicy> waterfill_link_policies(
    const cli::ExperimentConfig& cfg, double b_bar) {
  const highmob::GainTable tab = highmob::gamma_gain_table(cfg.L, 512);
  const highmob::ErrorLaw law = highmob::isotropic_error_law(cfg.L);
  std::vector<highmob::WaterfillPolicy> pols;
  const bool symmetric =
      cfg.distances.empty() ||
      std::all_of(cfg.distances.begin(), cfg.distances.end(),
                  [&](double d) { return d == cfg.distances.front(); });
  if (symmetric) {
    const auto res = highmob::search_threshold(
        cfg.L, cfg.K, b_bar, tab, law, cfg.psi_grid, cfg.psi_restarts,
        derive_seed(cfg.seed, {103}));
    pols.assign(cfg.K - 1, res.policy);
  } else {
    const highmob::RateAllocation alloc = highmob::allocate_rates_closed_form(
        cfg.distances, cfg.alpha, cfg.L, b_bar);
    for (int j = 0; j < cfg.K - 1; ++j) {
      const double rate = alloc.rates[j];
      if (rate <= 1e-9) {
        highmob::WaterfillPolicy off;
        off.L = cfg.L;
        off.gain_grid = {1.0};
        off.threshold = {1.0};
        off.budget_per_link = 0.0;
        pols.push_back(off);
        continue;
      }
      const auto res = highmob::search_threshold(
          cfg.L, 2, rate, tab, law, cfg.psi_grid, cfg.psi_restarts,
          derive_seed(cfg.seed, {104, static_cast<std::uint64_t>(j)}));
      pols.push_back(res.policy);
    }
  }
  return pols;
}

netsim::NetworkConfig base_network(const cli::ExperimentConfig& cfg) {
  netsim::NetworkConfig net;
  net.K = cfg.K;
  net.L = cfg.L;
  net.snr_db = cfg.snr_db;
  net.doppler = cfg.f_d;
  net.fading = cli::fading_mode(cfg);
  net.distances = cfg.distances;
  net.alpha = cfg.alpha;
  net.quantizer = cli::make_quantizer(cfg);
  net.slots = cfg.slots;
  net.trials = cfg.trials;
  net.warmup = cfg.warmup;
  net.seed = cfg.seed;
  net.threads = 1;
  return net;
}

int cmd_solve_policy(const CommonArgs& args) {
  const cli::ExperimentConfig cfg = effective_config(args);
  const fs::path dir = ensure_out_dir(cfg);
  const std::uint64_t hash = cli::config_hash(cfg);
  const quant::QuantizerModel model = cli::make_quantizer(cfg);

  const SolvedPolicy sol = solve_controlled(cfg, cfg.f_d, cfg.b_bar);
  for (const std::string& w : sol.kernel.warnings)
    std::cerr << "warning: " << w << "\n";

  const mdp::ViResult vi =
      mdp::value_iteration(sol.kernel, sol.grid, sol.policy.bit_price, model,
                           cfg.discount, cfg.vi_tol, 500000);
  const structure::StructureReport report =
      structure::analyze(sol.policy, vi.value, sol.kernel, sol.grid,
                         sol.policy.bit_price, model);

  csvio::write_policy((dir / "policy.csv").string(), sol.policy, sol.grid,
                      sol.differential, hash, cfg.seed);
  csvio::write_values((dir / "value.csv").string(), vi.value, sol.grid, hash,
                      cfg.seed);
  csvio::write_violations((dir / "violations.csv").string(), report, hash,
                          cfg.seed);
  std::ofstream rep(dir / "structure_report.txt");
  rep << report.text();

  std::cout << "solved policy: lambda=" << sol.policy.bit_price
            << " avg_rate=" << sol.policy.avg_rate << " bits/slot/link"
            << (sol.policy.saturated ? " (budget saturated)" : "") << "\n"
            << report.text();
  if (!report.policy_ok() && !args.allow_violations) return 1;
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  cli::ExperimentConfig cfg = effective_config(args);
  const fs::path dir = ensure_out_dir(cfg);
  const std::uint64_t hash = cli::config_hash(cfg);

  // Pre-solve every policy the sweep needs (deterministic, sequential);
  // simulations then run on a worker pool.
  std::map<double, SolvedPolicy> controlled; // keyed by sweep value
  std::map<double, std::vector<highmob::WaterfillPolicy>> waterfill;
  const bool has_controlled =
      std::any_of(cfg.schemes.begin(), cfg.schemes.end(),
                  [](const auto& s) { return s.type == "controlled"; });
  const bool has_waterfill =
      std::any_of(cfg.schemes.begin(), cfg.schemes.end(),
                  [](const auto& s) { return s.type == "waterfill"; });
  for (double v : cfg.sweep_values) {
    const double f_d = cfg.sweep_axis == "f_d" ? v : cfg.f_d;
    const double b_bar = cfg.sweep_axis == "b_bar" ? v : cfg.b_bar;
    if (has_controlled) {
      const bool reuse = cfg.sweep_axis == "snr" && !controlled.empty();
      if (reuse)
        controlled.emplace(v, controlled.begin()->second);
      else
        controlled.emplace(v, solve_controlled(cfg, f_d, b_bar));
    }
    if (has_waterfill) {
      const bool reuse = cfg.sweep_axis == "snr" && !waterfill.empty();
      if (reuse)
        waterfill.emplace(v, waterfill.begin()->second);
      else
        waterfill.emplace(v, waterfill_link_policies(cfg, b_bar));
    }
  }

  struct Job {
    double value;
    std::size_t scheme_idx;
  };
  std::vector<Job> jobs;
  for (double v : cfg.sweep_values)
    for (std::size_t s = 0; s < cfg.schemes.size(); ++s)
      jobs.push_back({v, s});

  std::vector<netsim::SimResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      const cli::SchemeSpec& spec = cfg.schemes[job.scheme_idx];
      netsim::NetworkConfig net = base_network(cfg);
      if (cfg.sweep_axis == "snr") net.snr_db = job.value;
      if (cfg.sweep_axis == "f_d") net.doppler = job.value;
      net.seed = derive_seed(cfg.seed, {200, static_cast<std::uint64_t>(j)});

      if (spec.type == "controlled") {
        const SolvedPolicy& sol = controlled.at(job.value);
        net.scheme.type = netsim::Scheme::Type::Controlled;
        net.scheme.policy = sol.policy;
        net.scheme.grid = sol.grid;
      } else if (spec.type == "waterfill") {
        net.scheme.type = netsim::Scheme::Type::WaterfillControlled;
        net.scheme.link_policies = waterfill.at(job.value);
      } else if (spec.type == "simple") {
        net.scheme.type = netsim::Scheme::Type::Simple;
        net.scheme.fixed_bits = spec.bits;
      } else if (spec.type == "differential") {
        net.scheme.type = netsim::Scheme::Type::Differential;
        net.scheme.codebook_bits = spec.codebook_bits;
        double nu = spec.nu;
        if (nu <= 0.0) {
          netsim::NetworkConfig tune = net;
          tune.scheme.nu = 0.25;
          nu = netsim::tune_differential_nu(
              tune, {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7},
              std::min(cfg.slots, 600), std::min(cfg.trials, 3));
        }
        net.scheme.nu = nu;
      } else {
        net.scheme.type = netsim::Scheme::Type::PerfectCsit;
      }
      results[j] = netsim::run_simulation(net);
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::max(1, cfg.threads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  csvio::Table table;
  table.provenance = csvio::provenance_line(hash, cfg.seed);
  table.columns = {"axis",       "value",      "scheme",
                   "throughput", "thr_hw",     "interference",
                   "int_hw",     "fb_rate",    "fb_bits",
                   "overhead"};
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = results[j];
    const auto& spec = cfg.schemes[jobs[j].scheme_idx];
    table.rows.push_back({cfg.sweep_axis, csvio::fmt(jobs[j].value), spec.type,
                          csvio::fmt(r.throughput_per_user),
                          csvio::fmt(r.confidence_halfwidth),
                          csvio::fmt(r.avg_interference),
                          csvio::fmt(r.interference_halfwidth),
                          csvio::fmt(r.avg_feedback_rate),
                          csvio::fmt(r.avg_feedback_bits),
                          csvio::fmt(r.overhead_bits)});
  }
  csvio::write_table((dir / "sweep.csv").string(), table);
  std::cout << "wrote " << (dir / "sweep.csv").string() << " ("
            << table.rows.size() << " rows)\n";
  return 0;
}

int cmd_waterfill(const CommonArgs& args) {
  const cli::ExperimentConfig cfg = effective_config(args);
  if (!(cfg.b_bar > 0.0))
    throw cli::ConfigError("waterfill: b_bar must be > 0");
  const fs::path dir = ensure_out_dir(cfg);
  const std::uint64_t hash = cli::config_hash(cfg);

  const highmob::GainTable tab = highmob::gamma_gain_table(cfg.L, 512);
  const highmob::ErrorLaw law = highmob::isotropic_error_law(cfg.L);
  const auto res = highmob::search_threshold(
      cfg.L, cfg.K, cfg.b_bar, tab, law, cfg.psi_grid, cfg.psi_restarts,
      derive_seed(cfg.seed, {103}));

  csvio::Table table;
  table.provenance = csvio::provenance_line(
      hash, cfg.seed,
      {{"water_level", csvio::fmt(res.policy.water_level)},
       {"fb_probability", csvio::fmt(res.fb_probability)},
       {"interference", csvio::fmt(res.interference)}});
  table.columns = {"g", "psi", "bits"};
  for (std::size_t i = 0; i < res.policy.gain_grid.size(); ++i) {
    const double g = res.policy.gain_grid[i];
    const double bits =
        std::max(0.0, res.policy.water_level -
                          (cfg.L - 1) * std::log2(1.0 / g));
    table.rows.push_back({csvio::fmt(g), csvio::fmt(res.policy.threshold[i]),
                          csvio::fmt(bits)});
  }
  csvio::write_table((dir / "waterfill.csv").string(), table);
  std::cout << "threshold search: interference=" << res.interference
            << " fb_probability=" << res.fb_probability
            << " water_level=" << res.policy.water_level << "\n";
  return 0;
}

int cmd_allocate_rates(const CommonArgs& args) {
  const cli::ExperimentConfig cfg = effective_config(args);
  if (!(cfg.b_bar > 0.0))
    throw cli::ConfigError(
        "allocate-rates: b_bar must be > 0 (the sum-rate constraint is "
        "infeasible otherwise)");
  if (cfg.distances.empty())
    throw cli::ConfigError("allocate-rates: distances required");
  const fs::path dir = ensure_out_dir(cfg);
  const std::uint64_t hash = cli::config_hash(cfg);

  const highmob::RateAllocation alloc = highmob::allocate_rates_closed_form(
      cfg.distances, cfg.alpha, cfg.L, cfg.b_bar);

  csvio::Table table;
  table.provenance = csvio::provenance_line(
      hash, cfg.seed, {{"eta", csvio::fmt(alloc.water_level)}});
  table.columns = {"link", "distance", "rate"};
  for (std::size_t i = 0; i < alloc.rates.size(); ++i)
    table.rows.push_back({std::to_string(i), csvio::fmt(cfg.distances[i]),
                          csvio::fmt(alloc.rates[i])});
  csvio::write_table((dir / "rates.csv").string(), table);
  std::cout << "rate split:";
  for (double r : alloc.rates) std::cout << " " << r;
  std::cout << " (eta=" << alloc.water_level << ")\n";
  return 0;
}

int cmd_verify_structure(const CommonArgs& args, const std::string& policy_path) {
  const cli::ExperimentConfig cfg = effective_config(args);
  const fs::path dir = ensure_out_dir(cfg);
  const csvio::LoadedPolicy lp = csvio::load_policy(policy_path);

  mdp::StateGrid grid;
  grid.gain_points = lp.gain_points;
  grid.gain_edges = lp.gain_points;
  grid.err_points = lp.err_points;
  grid.err_edges = lp.err_points;
  grid.b_set = {0};
  for (int m = 0; m < lp.policy.table.rows(); ++m)
    for (int n = 0; n < lp.policy.table.cols(); ++n)
      if (lp.policy.table(m, n) > 0) grid.b_set.push_back(lp.policy.table(m, n));
  std::sort(grid.b_set.begin(), grid.b_set.end());
  grid.b_set.erase(std::unique(grid.b_set.begin(), grid.b_set.end()),
                   grid.b_set.end());

  const structure::StructureReport report =
      structure::verify_theorem_properties(lp.policy, grid);
  csvio::write_violations((dir / "violations.csv").string(), report,
                          lp.config_hash, lp.seed);
  std::ofstream rep(dir / "structure_report.txt");
  rep << report.text();
  std::cout << report.text();
  if (!report.policy_ok() && !args.allow_violations) return 1;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic CSI-feedback control: solver and simulator"};
  app.require_subcommand(1);

  CommonArgs solve_args, sim_args, wf_args, ar_args, vs_args;
  std::string policy_path;

  CLI::App* solve = app.add_subcommand("solve-policy",
                                       "solve the budgeted feedback policy");
  add_common(solve, solve_args);
  CLI::App* sim = app.add_subcommand("simulate", "run Monte Carlo sweeps");
  add_common(sim, sim_args);
  CLI::App* wf = app.add_subcommand("waterfill",
                                    "high-mobility threshold search");
  add_common(wf, wf_args);
  CLI::App* ar = app.add_subcommand("allocate-rates",
                                    "split average rate across links");
  add_common(ar, ar_args);
  CLI::App* vs = app.add_subcommand("verify-structure",
                                    "re-check a policy CSV");
  add_common(vs, vs_args);
  vs->add_option("--policy", policy_path, "policy CSV to verify")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve_policy(solve_args);
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (wf->parsed()) return cmd_waterfill(wf_args);
    if (ar->parsed()) return cmd_allocate_rates(ar_args);
    if (vs->parsed()) return cmd_verify_structure(vs_args, policy_path);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
