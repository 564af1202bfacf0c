// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Round state machines: FedGBO, FedAvg, MFL, Mimelite, AdaptiveFedOpt.
// One round = sample clients -> download -> K local steps -> upload ->
// aggregate. Client randomness comes from counter-based streams keyed by
// (seed, round, client_id), so results are independent of scheduling, and
// aggregation always sums in ascending client-id order.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/accounting.hpp"
#include "fedsim/optim.hpp"
#include "fedsim/tasks.hpp"

namespace fedsim {

struct GlobalState {
  int round = 0;
  ParamVector model;                         // x_t
  OptimiserState opt;                        // s_t, frozen during local steps
  std::optional<OptimiserState> server_opt;  // AdaptiveFedOpt only
};

// Builds the round-0 state with the optimiser placed where the algorithm
// needs it (client side, server side, or nowhere).
GlobalState make_initial_state(Algorithm algorithm, OptimKind kind, const ParamVector& x0,
                               double beta, double beta1, double beta2, double epsilon);

struct RoundConfig {
  Algorithm algorithm = Algorithm::FedAvg;
  int k_steps = 1;
  int batch_size = 1;
  int clients_per_round = 1;
  double eta = 0.0;         // client learning rate; 0 freezes local models
  double eta_server = 0.0;  // AdaptiveFedOpt server rate
  std::uint64_t seed = 0;
  bool weighted_aggregation = false;  // n_i-weighted client mean (default: unweighted)
  bool record_perturbation = false;   // retain per-step batches and gradients

  void validate(const FederatedTask& task) const;
};

struct StepRecord {
  std::vector<int> batch_indices;  // shard-relative sample indices
  ParamVector gradient;            // gradient at the pre-step local model
};

struct ClientTrace {
  int client_id = 0;
  std::vector<StepRecord> steps;
};

struct ClientUpdate {
  int client_id = 0;
  ParamVector local_model;                        // y_K
  std::optional<OptimiserState> local_opt;        // MFL
  std::optional<ParamVector> fullbatch_gradient;  // Mimelite
  long long upload_floats = 0;
};

struct RoundTrace {
  GlobalState new_state;
  std::optional<ParamVector> g_tilde;  // FedGBO's recovered biased gradient
  std::vector<ClientTrace> perturbation_inputs;
  std::vector<int> sampled_clients;
  long long download_floats = 0;  // round totals over sampled clients
  long long upload_floats = 0;
  long long flops_per_client = 0;  // closed-form cost of one client's round
};

std::vector<int> select_clients(int pool_size, int m, Rng& rng);

struct LocalResult {
  ParamVector y_k;
  ClientTrace trace;  // populated when recording is requested
};

// K local steps with frozen statistics s_t (FedGBO/Mimelite inner loop;
// FedAvg uses it with SGD state).
LocalResult local_train_fixed_stats(const ParamVector& x_t, const OptimiserState& s_t,
                                    const ClientShard& shard, const ModelSpec& spec,
                                    const RoundConfig& cfg, Rng& rng, bool record);

RoundTrace fedgbo_round(const GlobalState& state, const FederatedTask& task,
                        const RoundConfig& cfg);
RoundTrace fedavg_round(const GlobalState& state, const FederatedTask& task,
                        const RoundConfig& cfg);
RoundTrace mfl_round(const GlobalState& state, const FederatedTask& task, const RoundConfig& cfg);
RoundTrace mimelite_round(const GlobalState& state, const FederatedTask& task,
                          const RoundConfig& cfg);
RoundTrace adaptivefedopt_round(const GlobalState& state, const FederatedTask& task,
                                const RoundConfig& cfg);

// Dispatch on cfg.algorithm.
RoundTrace run_round(const GlobalState& state, const FederatedTask& task, const RoundConfig& cfg);

struct TrainRecord {
  int round = 0;  // 1-based index of the completed round
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  long long cum_download_floats = 0;
  long long cum_upload_floats = 0;
  long long cum_client_flops = 0;
};

struct TrainingResult {
  std::vector<TrainRecord> records;
  GlobalState final_state;
  bool diverged = false;
  int diverged_round = 0;   // round at which divergence was detected
  std::string failure;      // empty when healthy
};

using RoundObserver = std::function<void(const GlobalState& before, const RoundTrace& trace)>;

// Runs T rounds, evaluating every eval_every rounds. Divergence (nonfinite
// model/loss, or train loss above divergence_threshold) stops the run and is
// reported, not thrown.
TrainingResult run_training(const FederatedTask& task, const RoundConfig& cfg, GlobalState state,
                            int rounds, int eval_every, const RoundObserver& observer = {},
                            double divergence_threshold = 1e6);

}  // namespace fedsim
