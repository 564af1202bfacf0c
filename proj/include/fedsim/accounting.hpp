// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Symbolic per-client cost calculator. FLOPs per round:
//   FedGBO    K (B (fwd+bwd) + C_fixed  |x|)
//   Mimelite  K (B (fwd+bwd) + C_fixed  |x|) + n (fwd+bwd)
//   MFL       K (B (fwd+bwd) + C_moving |x|)
//   FedAvg / AdaptiveFedOpt  K (B (fwd+bwd) + 2 |x|)
// with fwd+bwd = 3 fwd. Communication per client per round (floats):
//   FedAvg (|x|, |x|); AdaptiveFedOpt (|x|, |x|); FedGBO (|x|+|s|, |x|);
//   MFL (|x|+|s|, |x|+|s|); Mimelite (|x|+|s|, 2|x|)
// where |s| = 0 (SGD), |x| (RMSProp, SGDm), 2|x| (Adam).

#pragma once

#include <cstdint>
#include <string>

#include "fedsim/optim.hpp"

namespace fedsim {

enum class Algorithm { FedGBO, FedAvg, MFL, Mimelite, AdaptiveFedOpt };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct CostInputs {
  Algorithm algorithm = Algorithm::FedAvg;
  OptimKind optimiser = OptimKind::SGD;
  int k_steps = 1;
  int batch_size = 1;
  long long fwd = 0;           // forward-pass FLOPs for one sample
  long long model_params = 0;  // |x|
  double n_mean = 0.0;         // mean samples per client (full-batch term)
};

// Per-parameter local-step operation counts.
struct OpCountTable {
  static int c_fixed(OptimKind kind);   // frozen statistics
  static int c_moving(OptimKind kind);  // locally tracked statistics
};

// Total client FLOPs for one round. MFL and Mimelite reject SGD (they
// require an adaptive optimiser); FedAvg/AdaptiveFedOpt clients run SGD
// regardless of the optimiser argument.
long long flops_per_round(const CostInputs& inputs);

struct CommCost {
  long long download_floats = 0;
  long long upload_floats = 0;
};

// Per-client float counts; valid for all algorithm/optimiser pairs.
CommCost comm_per_round(Algorithm algorithm, OptimKind optimiser, long long model_params);

// One multiply-accumulate per weight; biases excluded.
long long linear_fwd_flops(long long in_dim, long long out_dim);

// Decimal rounding to 3 significant figures (the printed-table convention).
double round_3sig(double v);

}  // namespace fedsim
