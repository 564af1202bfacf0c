// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsim/federation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedsim {

namespace {

void require_adaptive(OptimKind kind, const char* who) {
  if (kind == OptimKind::SGD)
    throw std::invalid_argument(std::string(who) + ": requires an adaptive optimiser kind");
}

// Per-client aggregation weights: uniform by default, n_i-proportional when
// weighted aggregation is requested.
std::vector<double> aggregation_weights(const FederatedTask& task, const std::vector<int>& ids,
                                        bool weighted) {
  std::vector<double> w(ids.size(), 1.0 / static_cast<double>(ids.size()));
  if (!weighted) return w;
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    w[i] = static_cast<double>(task.clients[static_cast<std::size_t>(ids[i])].n());
    total += w[i];
  }
  for (auto& wi : w) wi /= total;
  return w;
}

const ClientShard& shard_by_id(const FederatedTask& task, int id) {
  const auto& shard = task.clients.at(static_cast<std::size_t>(id));
  if (shard.client_id != id)
    throw std::invalid_argument("federation: client ids must equal their position (got " +
                                std::to_string(shard.client_id) + " at index " +
                                std::to_string(id) + ")");
  return shard;
}

Rng client_stream(const RoundConfig& cfg, int round, int client_id) {
  return Rng::keyed(cfg.seed, Stream::kLocalBatch, static_cast<std::uint64_t>(round),
                    static_cast<std::uint64_t>(client_id));
}

// Accounting for the round: payload totals from the communication table,
// client FLOPs from the closed-form calculator.
void fill_costs(RoundTrace& trace, const GlobalState& state, const FederatedTask& task,
                const RoundConfig& cfg) {
  const OptimKind comm_kind = cfg.algorithm == Algorithm::AdaptiveFedOpt && state.server_opt
                                  ? state.server_opt->kind
                                  : state.opt.kind;
  const auto comm =
      comm_per_round(cfg.algorithm, comm_kind, static_cast<long long>(state.model.size()));
  const auto m = static_cast<long long>(trace.sampled_clients.size());
  trace.download_floats = m * comm.download_floats;
  trace.upload_floats = m * comm.upload_floats;

  CostInputs ci;
  ci.algorithm = cfg.algorithm;
  ci.optimiser =
      (cfg.algorithm == Algorithm::FedAvg || cfg.algorithm == Algorithm::AdaptiveFedOpt)
          ? OptimKind::SGD
          : state.opt.kind;
  ci.k_steps = cfg.k_steps;
  ci.batch_size = cfg.batch_size;
  ci.fwd = task.model.fwd_flops();
  ci.model_params = static_cast<long long>(state.model.size());
  double n_total = 0.0;
  for (int id : trace.sampled_clients) n_total += shard_by_id(task, id).n();
  ci.n_mean = n_total / static_cast<double>(trace.sampled_clients.size());
  trace.flops_per_client = flops_per_round(ci);
}

std::vector<int> round_clients(const GlobalState& state, const FederatedTask& task,
                               const RoundConfig& cfg) {
  Rng rng = Rng::keyed(cfg.seed, Stream::kClientSampling,
                       static_cast<std::uint64_t>(state.round));
  return select_clients(task.n_clients(), cfg.clients_per_round, rng);
}

void check_round(const GlobalState& state, const FederatedTask& task, const RoundConfig& cfg,
                 Algorithm expected) {
  if (cfg.algorithm != expected)
    throw std::invalid_argument("round: config algorithm does not match the round function");
  cfg.validate(task);
  if (state.model.size() != static_cast<std::size_t>(task.model.model_dim()))
    throw std::invalid_argument("round: model dim does not match task");
  if (cfg.algorithm == Algorithm::FedGBO && !(cfg.eta > 0.0))
    throw std::invalid_argument("round: fedgbo requires eta > 0 (inverse step)");
}

}  // namespace

GlobalState make_initial_state(Algorithm algorithm, OptimKind kind, const ParamVector& x0,
                               double beta, double beta1, double beta2, double epsilon) {
  vec::require_finite(x0, "make_initial_state");
  if (x0.empty()) throw std::invalid_argument("make_initial_state: empty model");
  GlobalState state;
  state.model = x0;
  switch (algorithm) {
    case Algorithm::FedAvg:
      if (kind != OptimKind::SGD)
        throw std::invalid_argument("make_initial_state: fedavg carries no optimiser state");
      state.opt = OptimiserState::sgd();
      break;
    case Algorithm::FedGBO:
      state.opt = OptimiserState::make(kind, x0.size(), beta, beta1, beta2, epsilon);
      break;
    case Algorithm::MFL:
    case Algorithm::Mimelite:
      require_adaptive(kind, "make_initial_state");
      state.opt = OptimiserState::make(kind, x0.size(), beta, beta1, beta2, epsilon);
      break;
    case Algorithm::AdaptiveFedOpt:
      state.opt = OptimiserState::sgd();
      state.server_opt = OptimiserState::make(kind, x0.size(), beta, beta1, beta2, epsilon);
      break;
  }
  return state;
}

void RoundConfig::validate(const FederatedTask& task) const {
  if (k_steps < 1) throw std::invalid_argument("RoundConfig: k_steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("RoundConfig: batch_size must be >= 1");
  if (clients_per_round < 1)
    throw std::invalid_argument("RoundConfig: clients_per_round must be >= 1");
  if (clients_per_round > task.n_clients())
    throw std::invalid_argument("RoundConfig: clients_per_round exceeds pool size " +
                                std::to_string(task.n_clients()));
  if (eta < 0.0) throw std::invalid_argument("RoundConfig: eta must be >= 0");
  if (eta_server < 0.0) throw std::invalid_argument("RoundConfig: eta_server must be >= 0");
}

std::vector<int> select_clients(int pool_size, int m, Rng& rng) {
  if (m < 1 || m > pool_size)
    throw std::invalid_argument("select_clients: need 1 <= m <= pool_size");
  return rng.sample_without_replacement(pool_size, m);
}

LocalResult local_train_fixed_stats(const ParamVector& x_t, const OptimiserState& s_t,
                                    const ClientShard& shard, const ModelSpec& spec,
                                    const RoundConfig& cfg, Rng& rng, bool record) {
  if (shard.samples.empty())
    throw std::invalid_argument("client " + std::to_string(shard.client_id) + " has zero samples");
  LocalResult out;
  out.y_k = x_t;
  out.trace.client_id = shard.client_id;
  for (int k = 0; k < cfg.k_steps; ++k) {
    std::vector<int> batch;
    const ParamVector g = minibatch_grad(out.y_k, spec, shard, cfg.batch_size, rng, &batch);
    if (cfg.eta > 0.0) {
      const ParamVector delta = update_step(g, s_t, cfg.eta);
      vec::add_inplace(out.y_k, delta);
    }
    if (record) out.trace.steps.push_back({std::move(batch), g});
  }
  vec::require_finite(out.y_k, "local_train_fixed_stats output");
  return out;
}

namespace {

// Shared skeleton for the frozen-statistics algorithms (FedGBO, FedAvg,
// Mimelite): run clients, aggregate the model mean, then apply the
// algorithm-specific server step.
struct FrozenRoundData {
  std::vector<int> ids;
  ParamVector x_next;
  std::vector<ClientTrace> traces;
  std::vector<ParamVector> fullbatch_grads;  // Mimelite only
};

FrozenRoundData run_frozen_clients(const GlobalState& state, const FederatedTask& task,
                                   const RoundConfig& cfg, bool want_fullbatch) {
  FrozenRoundData data;
  data.ids = round_clients(state, task, cfg);
  const auto weights = aggregation_weights(task, data.ids, cfg.weighted_aggregation);
  data.x_next = vec::zeros(state.model.size());
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    const auto& shard = shard_by_id(task, data.ids[i]);
    Rng rng = client_stream(cfg, state.round, data.ids[i]);
    LocalResult local = local_train_fixed_stats(state.model, state.opt, shard, task.model, cfg,
                                                rng, cfg.record_perturbation);
    vec::axpy(data.x_next, weights[i], local.y_k);
    if (cfg.record_perturbation) data.traces.push_back(std::move(local.trace));
    if (want_fullbatch)
      data.fullbatch_grads.push_back(fullbatch_grad(state.model, task.model, shard));
  }
  return data;
}

RoundTrace finish_round(const GlobalState& state, const FederatedTask& task,
                        const RoundConfig& cfg, FrozenRoundData&& data, GlobalState&& next) {
  RoundTrace trace;
  trace.new_state = std::move(next);
  trace.sampled_clients = std::move(data.ids);
  trace.perturbation_inputs = std::move(data.traces);
  fill_costs(trace, state, task, cfg);
  return trace;
}

}  // namespace

RoundTrace fedgbo_round(const GlobalState& state, const FederatedTask& task,
                        const RoundConfig& cfg) {
  check_round(state, task, cfg, Algorithm::FedGBO);
  FrozenRoundData data = run_frozen_clients(state, task, cfg, false);
  const StepSize step(cfg.eta, cfg.k_steps);
  const ParamVector g_tilde = inverse_step(state.model, data.x_next, state.opt, step);

  GlobalState next;
  next.round = state.round + 1;
  next.model = data.x_next;
  next.opt = tracking_step(g_tilde, state.opt);
  next.server_opt = state.server_opt;

  RoundTrace trace = finish_round(state, task, cfg, std::move(data), std::move(next));
  trace.g_tilde = g_tilde;
  return trace;
}

RoundTrace fedavg_round(const GlobalState& state, const FederatedTask& task,
                        const RoundConfig& cfg) {
  check_round(state, task, cfg, Algorithm::FedAvg);
  if (state.opt.kind != OptimKind::SGD)
    throw std::invalid_argument("fedavg_round: optimiser state must be SGD");
  FrozenRoundData data = run_frozen_clients(state, task, cfg, false);
  GlobalState next;
  next.round = state.round + 1;
  next.model = data.x_next;
  next.opt = state.opt;
  next.server_opt = state.server_opt;
  return finish_round(state, task, cfg, std::move(data), std::move(next));
}

RoundTrace mimelite_round(const GlobalState& state, const FederatedTask& task,
                          const RoundConfig& cfg) {
  check_round(state, task, cfg, Algorithm::Mimelite);
  require_adaptive(state.opt.kind, "mimelite_round");
  FrozenRoundData data = run_frozen_clients(state, task, cfg, true);

  // Tracking input: mean over sampled clients of full-batch gradients at x_t.
  ParamVector mean_grad = vec::zeros(state.model.size());
  const auto weights = aggregation_weights(task, data.ids, cfg.weighted_aggregation);
  for (std::size_t i = 0; i < data.fullbatch_grads.size(); ++i)
    vec::axpy(mean_grad, weights[i], data.fullbatch_grads[i]);

  GlobalState next;
  next.round = state.round + 1;
  next.model = data.x_next;
  next.opt = tracking_step(mean_grad, state.opt);
  next.server_opt = state.server_opt;
  return finish_round(state, task, cfg, std::move(data), std::move(next));
}

RoundTrace mfl_round(const GlobalState& state, const FederatedTask& task,
                     const RoundConfig& cfg) {
  check_round(state, task, cfg, Algorithm::MFL);
  require_adaptive(state.opt.kind, "mfl_round");

  RoundTrace trace;
  trace.sampled_clients = round_clients(state, task, cfg);
  const auto weights = aggregation_weights(task, trace.sampled_clients, cfg.weighted_aggregation);

  ParamVector x_next = vec::zeros(state.model.size());
  ParamVector m_mean, v_mean;
  if (state.opt.m) m_mean = vec::zeros(state.model.size());
  if (state.opt.v) v_mean = vec::zeros(state.model.size());

  for (std::size_t i = 0; i < trace.sampled_clients.size(); ++i) {
    const int id = trace.sampled_clients[i];
    const auto& shard = shard_by_id(task, id);
    Rng rng = client_stream(cfg, state.round, id);
    ParamVector y = state.model;
    OptimiserState local = state.opt;
    ClientTrace ct;
    ct.client_id = id;
    for (int k = 0; k < cfg.k_steps; ++k) {
      std::vector<int> batch;
      const ParamVector g = minibatch_grad(y, task.model, shard, cfg.batch_size, rng, &batch);
      // Update with pre-track statistics, then track: each local step moves
      // the model and the local statistics.
      if (cfg.eta > 0.0) vec::add_inplace(y, update_step(g, local, cfg.eta));
      local = tracking_step(g, local);
      if (cfg.record_perturbation) ct.steps.push_back({std::move(batch), g});
    }
    vec::axpy(x_next, weights[i], y);
    if (local.m) vec::axpy(m_mean, weights[i], *local.m);
    if (local.v) vec::axpy(v_mean, weights[i], *local.v);
    if (cfg.record_perturbation) trace.perturbation_inputs.push_back(std::move(ct));
  }

  GlobalState next;
  next.round = state.round + 1;
  next.model = std::move(x_next);
  next.opt = state.opt;
  if (next.opt.m) *next.opt.m = std::move(m_mean);
  if (next.opt.v) *next.opt.v = std::move(v_mean);
  next.server_opt = state.server_opt;
  trace.new_state = std::move(next);
  fill_costs(trace, state, task, cfg);
  return trace;
}

RoundTrace adaptivefedopt_round(const GlobalState& state, const FederatedTask& task,
                                const RoundConfig& cfg) {
  check_round(state, task, cfg, Algorithm::AdaptiveFedOpt);
  if (!state.server_opt)
    throw std::invalid_argument("adaptivefedopt_round: missing server optimiser state");
  if (state.opt.kind != OptimKind::SGD)
    throw std::invalid_argument("adaptivefedopt_round: clients must run plain SGD");

  FrozenRoundData data = run_frozen_clients(state, task, cfg, false);

  // Pseudo-gradient of the round; the server treats it as a gradient.
  const ParamVector delta = vec::sub(state.model, data.x_next);

  GlobalState next;
  next.round = state.round + 1;
  next.model = state.model;
  if (cfg.eta_server > 0.0)
    vec::add_inplace(next.model, update_step(delta, *state.server_opt, cfg.eta_server));
  next.opt = state.opt;
  next.server_opt = tracking_step(delta, *state.server_opt);
  return finish_round(state, task, cfg, std::move(data), std::move(next));
}

RoundTrace run_round(const GlobalState& state, const FederatedTask& task, const RoundConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::FedGBO: return fedgbo_round(state, task, cfg);
    case Algorithm::FedAvg: return fedavg_round(state, task, cfg);
    case Algorithm::MFL: return mfl_round(state, task, cfg);
    case Algorithm::Mimelite: return mimelite_round(state, task, cfg);
    case Algorithm::AdaptiveFedOpt: return adaptivefedopt_round(state, task, cfg);
  }
  throw std::invalid_argument("run_round: bad algorithm");
}

TrainingResult run_training(const FederatedTask& task, const RoundConfig& cfg, GlobalState state,
                            int rounds, int eval_every, const RoundObserver& observer,
                            double divergence_threshold) {
  if (rounds < 1) throw std::invalid_argument("run_training: rounds must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("run_training: eval_every must be >= 1");
  task.validate();
  cfg.validate(task);

  TrainingResult result;
  long long cum_down = 0, cum_up = 0, cum_flops = 0;
  for (int t = 0; t < rounds; ++t) {
    try {
      RoundTrace trace = run_round(state, task, cfg);
      if (observer) observer(state, trace);
      cum_down += trace.download_floats;
      cum_up += trace.upload_floats;
      cum_flops += trace.flops_per_client;
      state = std::move(trace.new_state);
    } catch (const std::exception& e) {
      // Config errors were rejected above; exceptions here are numeric
      // blow-ups, reported as divergence rather than thrown.
      result.diverged = true;
      result.diverged_round = t + 1;
      result.failure = e.what();
      break;
    }
    if (!vec::all_finite(state.model)) {
      result.diverged = true;
      result.diverged_round = t + 1;
      result.failure = "nonfinite model parameters";
      break;
    }
    if ((t + 1) % eval_every == 0) {
      TrainRecord rec;
      rec.round = t + 1;
      rec.train_loss = train_loss(state.model, task);
      const EvalResult ev = eval_model(state.model, task.model, task.test_set);
      rec.test_loss = ev.loss;
      rec.test_accuracy = ev.accuracy;
      rec.cum_download_floats = cum_down;
      rec.cum_upload_floats = cum_up;
      rec.cum_client_flops = cum_flops;
      result.records.push_back(rec);
      if (!std::isfinite(rec.train_loss) || rec.train_loss > divergence_threshold) {
        result.diverged = true;
        result.diverged_round = t + 1;
        result.failure = "train loss diverged";
        break;
      }
    }
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace fedsim
