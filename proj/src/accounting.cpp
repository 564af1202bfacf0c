// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsim/accounting.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace fedsim {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::FedGBO: return "fedgbo";
    case Algorithm::FedAvg: return "fedavg";
    case Algorithm::MFL: return "mfl";
    case Algorithm::Mimelite: return "mimelite";
    case Algorithm::AdaptiveFedOpt: return "adaptivefedopt";
  }
  throw std::invalid_argument("to_string: bad Algorithm");
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "fedgbo") return Algorithm::FedGBO;
  if (name == "fedavg") return Algorithm::FedAvg;
  if (name == "mfl") return Algorithm::MFL;
  if (name == "mimelite") return Algorithm::Mimelite;
  if (name == "adaptivefedopt") return Algorithm::AdaptiveFedOpt;
  throw std::invalid_argument("unknown algorithm: " + name);
}

int OpCountTable::c_fixed(OptimKind kind) {
  switch (kind) {
    case OptimKind::SGD: return 2;
    case OptimKind::RMSProp: return 5;
    case OptimKind::SGDm: return 5;
    case OptimKind::Adam: return 8;
  }
  throw std::invalid_argument("c_fixed: bad OptimKind");
}

int OpCountTable::c_moving(OptimKind kind) {
  switch (kind) {
    case OptimKind::SGD: return 2;
    case OptimKind::RMSProp: return 5;
    case OptimKind::SGDm: return 8;
    case OptimKind::Adam: return 11;
  }
  throw std::invalid_argument("c_moving: bad OptimKind");
}

long long flops_per_round(const CostInputs& in) {
  if (in.k_steps < 1) throw std::invalid_argument("flops_per_round: k_steps must be >= 1");
  if (in.batch_size < 1) throw std::invalid_argument("flops_per_round: batch_size must be >= 1");
  if (in.fwd < 1) throw std::invalid_argument("flops_per_round: fwd must be positive");
  if (in.model_params < 1)
    throw std::invalid_argument("flops_per_round: model_params must be positive");
  const long long fwd_bwd = 3 * in.fwd;
  const long long batch_term = static_cast<long long>(in.batch_size) * fwd_bwd;

  int per_param = 0;
  switch (in.algorithm) {
    case Algorithm::FedAvg:
    case Algorithm::AdaptiveFedOpt:
      per_param = 2;  // client side is plain SGD, optimiser-independent
      break;
    case Algorithm::FedGBO:
      per_param = OpCountTable::c_fixed(in.optimiser);
      break;
    case Algorithm::Mimelite:
      if (in.optimiser == OptimKind::SGD)
        throw std::invalid_argument("flops_per_round: mimelite requires an adaptive optimiser");
      per_param = OpCountTable::c_fixed(in.optimiser);
      break;
    case Algorithm::MFL:
      if (in.optimiser == OptimKind::SGD)
        throw std::invalid_argument("flops_per_round: mfl requires an adaptive optimiser");
      per_param = OpCountTable::c_moving(in.optimiser);
      break;
  }

  long long total = static_cast<long long>(in.k_steps) *
                    (batch_term + static_cast<long long>(per_param) * in.model_params);
  if (in.algorithm == Algorithm::Mimelite) {
    if (!(in.n_mean > 0.0)) throw std::invalid_argument("flops_per_round: n_mean must be positive");
    total += std::llround(in.n_mean * static_cast<double>(fwd_bwd));
  }
  return total;
}

CommCost comm_per_round(Algorithm algorithm, OptimKind optimiser, long long model_params) {
  if (model_params < 1)
    throw std::invalid_argument("comm_per_round: model_params must be positive");
  long long s = 0;
  switch (optimiser) {
    case OptimKind::SGD: s = 0; break;
    case OptimKind::RMSProp:
    case OptimKind::SGDm: s = model_params; break;
    case OptimKind::Adam: s = 2 * model_params; break;
  }
  switch (algorithm) {
    case Algorithm::FedAvg:
    case Algorithm::AdaptiveFedOpt:
      return {model_params, model_params};
    case Algorithm::FedGBO:
      return {model_params + s, model_params};
    case Algorithm::MFL:
      return {model_params + s, model_params + s};
    case Algorithm::Mimelite:
      return {model_params + s, 2 * model_params};
  }
  throw std::invalid_argument("comm_per_round: bad Algorithm");
}

long long linear_fwd_flops(long long in_dim, long long out_dim) {
  if (in_dim < 1 || out_dim < 1)
    throw std::invalid_argument("linear_fwd_flops: dims must be positive");
  return in_dim * out_dim;
}

double round_3sig(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  // Decimal semantics via the printf round-trip: 0.149505 -> "1.50e-01".
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return std::strtod(buf, nullptr);
}

}  // namespace fedsim
