// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration, deterministic multi-seed execution, sweeps, and
// metric files. Config files are flat TOML-style key = value text (see
// README for the exact grammar); metrics are JSONL plus a summary CSV.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/federation.hpp"

namespace fedsim {

struct ExperimentConfig {
  // Task: either a generator name with knobs, or a dataset directory.
  std::string task;      // least_squares | logistic | mlp1 | sent140_shape
  std::string task_dir;  // dataset directory path (mutually exclusive with task)
  int dim = 10;
  int n_clients = 10;
  int samples_per_client = 20;
  int n_classes = 2;
  int hidden = 8;
  int nnz_per_sample = 25;
  double dirichlet_alpha = 1.0;
  double center_spread = 0.0;
  double noise_sigma = 0.0;
  std::uint64_t task_seed = 1234;

  Algorithm algorithm = Algorithm::FedAvg;
  OptimKind optimiser = OptimKind::SGD;
  double eta = 0.0;
  double beta = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double epsilon = 1e-3;
  std::optional<double> eta_server;
  int k_steps = 0;
  int batch_size = 0;
  int clients_per_round = 0;
  int rounds = 0;
  int eval_every = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  bool weighted_aggregation = false;
  bool track_unsquared_v = false;

  void validate() const;
};

// Flat key = value parser ('#' comments, quoted or bare strings,
// [v1, v2, ...] lists). Duplicate keys are rejected.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Builds a validated config; unknown keys are rejected with their names.
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);
ExperimentConfig load_config(const std::string& path);

FederatedTask build_task(const ExperimentConfig& cfg);
RoundConfig build_round_config(const ExperimentConfig& cfg, std::uint64_t seed);
GlobalState build_initial_state(const ExperimentConfig& cfg, const FederatedTask& task);

struct MetricRecord {
  std::uint64_t seed = 0;
  int round = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  long long cum_download_floats = 0;
  long long cum_upload_floats = 0;
  long long cum_client_flops = 0;
  double wall_ms = 0.0;  // written to the timing sidecar, never to metrics
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<MetricRecord> records;
  bool diverged = false;
  int diverged_round = 0;
  std::string failure;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  std::string out_dir;
  // Mean final test accuracy over healthy seeds; empty when any seed failed
  // or produced no evaluation rows.
  std::optional<double> final_mean_accuracy;
};

// Runs every seed, writing metrics_seed<seed>.jsonl, timing.jsonl, and
// summary.csv under out_dir (cfg.output_dir when out_dir is empty).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir = "");

struct SweepGrid {
  // Axes ordered by key name; keys restricted to
  // eta/beta/beta1/beta2/epsilon/eta_server.
  std::vector<std::pair<std::string, std::vector<double>>> axes;
};

SweepGrid parse_grid_file(const std::string& path);

struct SweepCell {
  int index = 0;
  std::map<std::string, double> overrides;
  bool failed = false;
  std::optional<double> final_mean_accuracy;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::optional<int> winner;  // index into cells; empty if all failed
};

// Cartesian product of the grid over the base config. Winner = highest
// final mean test accuracy; ties break to lower eta, then lower beta.
SweepResult run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                      const std::string& out_dir);

}  // namespace fedsim
