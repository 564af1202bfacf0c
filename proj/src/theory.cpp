// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedsim {

void TheoryConstants::validate() const {
  if (!(L > 0.0)) throw std::invalid_argument("TheoryConstants: L must be positive");
  if (G2 < 0.0 || R2 < 0.0 || sigma2 < 0.0 || B_lip < 0.0)
    throw std::invalid_argument("TheoryConstants: negative constant");
}

double BoundInputs::t_tilde() const {
  return static_cast<double>(T) - beta / (1.0 - beta);
}

double theory_eta_tilde(double beta, double eta, int k_steps) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("theory_eta_tilde: beta");
  if (!(eta > 0.0) || k_steps < 1) throw std::invalid_argument("theory_eta_tilde: step size");
  return (1.0 - beta) * static_cast<double>(k_steps) * eta;
}

double y_constant(const TheoryConstants& tc, int k_steps) {
  if (k_steps < 1) throw std::invalid_argument("y_constant: k_steps must be >= 1");
  return 18.0 * tc.B_lip * tc.B_lip * tc.L * tc.L *
         (tc.R2 + tc.G2 + tc.sigma2 / static_cast<double>(k_steps));
}

double z_constant(const TheoryConstants& tc, const BoundInputs& bi) {
  const double one_minus_beta = 1.0 - bi.beta;
  return 4.0 * bi.C * bi.C * one_minus_beta * one_minus_beta * y_constant(tc, bi.k_steps);
}

ParamVector measure_perturbation(const RoundTrace& trace, const FederatedTask& task,
                                 const ParamVector& x_t) {
  if (trace.perturbation_inputs.empty())
    throw std::invalid_argument("measure_perturbation: tracing absent from round trace");
  const std::size_t S = trace.perturbation_inputs.size();
  ParamVector e = vec::zeros(x_t.size());
  std::size_t total_steps = 0;
  for (const auto& ct : trace.perturbation_inputs) {
    const auto& shard = task.clients.at(static_cast<std::size_t>(ct.client_id));
    for (const auto& step : ct.steps) {
      vec::add_inplace(e, step.gradient);
      const ParamVector at_start = batch_grad(x_t, task.model, shard, step.batch_indices);
      vec::axpy(e, -1.0, at_start);
      ++total_steps;
    }
  }
  if (total_steps == 0) throw std::invalid_argument("measure_perturbation: empty traces");
  if (total_steps % S != 0)
    throw std::invalid_argument("measure_perturbation: ragged traces");
  vec::scale_inplace(e, 1.0 / static_cast<double>(total_steps));
  return e;
}

double perturbation_bound(const TheoryConstants& tc, double eta_tilde, int k_steps,
                          double mean_g2) {
  tc.validate();
  if (k_steps < 1) throw std::invalid_argument("perturbation_bound: k_steps must be >= 1");
  if (eta_tilde < 0.0 || mean_g2 < 0.0)
    throw std::invalid_argument("perturbation_bound: negative input");
  return tc.B_lip * tc.B_lip * tc.L * tc.L * eta_tilde * eta_tilde *
         (mean_g2 + tc.G2 + tc.sigma2 / static_cast<double>(k_steps));
}

double lemma1_bound(const TheoryConstants& tc, const BoundInputs& bi) {
  tc.validate();
  if (!(bi.beta >= 0.0 && bi.beta < 1.0))
    throw std::invalid_argument("lemma1_bound: beta must lie in [0, 1)");
  const double one_minus_beta = 1.0 - bi.beta;
  const double y = y_constant(tc, bi.k_steps);
  return 2.0 * (tc.R2 + bi.eta_tilde * bi.eta_tilde * y) / (one_minus_beta * one_minus_beta);
}

Theorem1Result theorem1_rhs(const TheoryConstants& tc, const BoundInputs& bi) {
  tc.validate();
  if (!(bi.beta >= 0.0 && bi.beta < 1.0))
    throw std::invalid_argument("theorem1_rhs: beta must lie in [0, 1)");
  if (!(bi.eta_tilde > 0.0)) throw std::invalid_argument("theorem1_rhs: eta_tilde must be > 0");
  const double one_minus_beta = 1.0 - bi.beta;
  if (!(static_cast<double>(bi.T) > 1.0 / one_minus_beta))
    throw std::invalid_argument("theorem1_rhs: requires T > 1/(1-beta)");
  const double t_tilde = bi.t_tilde();
  const double y = y_constant(tc, bi.k_steps);
  const double gap = bi.F0 - tc.F_star;
  const double t = static_cast<double>(bi.T);

  Theorem1Result out;
  out.descent_term = 2.0 * one_minus_beta * gap / (bi.eta_tilde * t_tilde);
  out.drift_term = t * bi.eta_tilde * bi.eta_tilde * y / t_tilde;
  out.momentum_term = 2.0 * t * bi.eta_tilde * tc.L * (1.0 + bi.beta) *
                      (tc.R2 + bi.eta_tilde * bi.eta_tilde * y) /
                      (t_tilde * one_minus_beta * one_minus_beta);
  out.total = out.descent_term + out.drift_term + out.momentum_term;
  return out;
}

Corollary1Result corollary1_rhs(const TheoryConstants& tc, const BoundInputs& bi) {
  tc.validate();
  if (!(bi.beta >= 0.0 && bi.beta < 1.0))
    throw std::invalid_argument("corollary1_rhs: beta must lie in [0, 1)");
  if (!(bi.C > 0.0)) throw std::invalid_argument("corollary1_rhs: C must be positive");
  const double one_minus_beta = 1.0 - bi.beta;
  // Relative slack below absorbs only the rounding of 1-beta: T = 100/(1-beta)
  // held with real-arithmetic equality (e.g. T=1000, beta=0.9) must pass.
  if (static_cast<double>(bi.T) < (100.0 / one_minus_beta) * (1.0 - 1e-12))
    throw std::invalid_argument("corollary1_rhs: requires T >= 100/(1-beta)");
  const double t = static_cast<double>(bi.T);
  const double sqrt_t = std::sqrt(t);
  const double z = z_constant(tc, bi);
  const double gap = bi.F0 - tc.F_star;

  Corollary1Result out;
  out.term1 = gap / (bi.C * sqrt_t);
  out.term2 = 4.0 * bi.C * tc.L * (1.0 + bi.beta) * (tc.R2 + z / t) / (one_minus_beta * sqrt_t);
  out.term3 = z / t;
  out.total = out.term1 + out.term2 + out.term3;
  out.eta_tilde = one_minus_beta * 2.0 * bi.C / sqrt_t;
  return out;
}

std::vector<double> index_weights(double beta, long long T) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("index_weights: beta");
  if (T < 1) throw std::invalid_argument("index_weights: T must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(T));
  double total = 0.0;
  for (long long j = 0; j < T; ++j) {
    w[static_cast<std::size_t>(j)] = 1.0 - std::pow(beta, static_cast<double>(T - j));
    total += w[static_cast<std::size_t>(j)];
  }
  if (total <= 0.0) throw std::invalid_argument("index_weights: degenerate weights");
  for (auto& wi : w) wi /= total;
  return w;
}

double index_weighted_mean(const std::vector<double>& per_round, double beta) {
  if (per_round.empty()) throw std::invalid_argument("index_weighted_mean: empty trajectory");
  const auto w = index_weights(beta, static_cast<long long>(per_round.size()));
  double s = 0.0;
  for (std::size_t j = 0; j < per_round.size(); ++j) s += w[j] * per_round[j];
  return s;
}

namespace {

// Short centralised descent trajectory whose points serve as probes.
std::vector<ParamVector> reference_trajectory(const FederatedTask& task, double L, int points,
                                              std::uint64_t seed) {
  std::vector<ParamVector> probes;
  ParamVector x = init_model(task.model, seed);
  probes.push_back(x);
  const double step = 0.5 / L;
  for (int j = 1; j < points; ++j) {
    const ParamVector g = global_gradient(x, task);
    vec::axpy(x, -step, g);
    if (!vec::all_finite(x)) break;
    probes.push_back(x);
  }
  return probes;
}

double empirical_smoothness(const FederatedTask& task, int n_probe, std::uint64_t seed) {
  Rng rng = Rng::keyed(seed, Stream::kProbe, 17);
  const std::size_t dim = static_cast<std::size_t>(task.model.model_dim());
  const ParamVector x0 = init_model(task.model, seed);
  double sup = 0.0;
  for (int p = 0; p < n_probe; ++p) {
    ParamVector x = x0, y = x0;
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] += rng.normal();
      y[j] += rng.normal();
    }
    const ParamVector diff = vec::sub(x, y);
    const double dist = vec::norm2(diff);
    if (dist == 0.0) continue;
    for (const auto& shard : task.clients) {
      const ParamVector gx = fullbatch_grad(x, task.model, shard);
      const ParamVector gy = fullbatch_grad(y, task.model, shard);
      sup = std::max(sup, vec::norm2(vec::sub(gx, gy)) / dist);
    }
  }
  return sup;
}

}  // namespace

TheoryConstants estimate_constants(const FederatedTask& task, int n_probe, std::uint64_t seed) {
  if (n_probe < 1) throw std::invalid_argument("estimate_constants: n_probe must be >= 1");
  task.validate();
  constexpr double kMargin = 1.5;

  TheoryConstants tc;
  if (task.model.kind == ModelKind::LeastSquares) {
    tc.L = 0.0;
    for (const auto& shard : task.clients)
      tc.L = std::max(tc.L, client_hessian_lambda_max(shard, task.model.feature_dim));
  } else {
    tc.L = kMargin * empirical_smoothness(task, n_probe, seed);
  }
  if (!(tc.L > 0.0)) tc.L = 1e-12;

  const auto probes = reference_trajectory(task, tc.L, n_probe, seed);
  double g2 = 0.0, r2 = 0.0, s2 = 0.0;
  double f_min = std::numeric_limits<double>::infinity();
  for (const auto& x : probes) {
    f_min = std::min(f_min, train_loss(x, task));
    ParamVector grad_f = vec::zeros(x.size());
    std::vector<ParamVector> client_grads;
    client_grads.reserve(task.clients.size());
    for (const auto& shard : task.clients) {
      client_grads.push_back(fullbatch_grad(x, task.model, shard));
      vec::add_inplace(grad_f, client_grads.back());
    }
    vec::scale_inplace(grad_f, 1.0 / static_cast<double>(task.clients.size()));

    double inter = 0.0;
    for (const auto& gi : client_grads) inter += vec::norm2_sq(vec::sub(gi, grad_f));
    g2 = std::max(g2, inter / static_cast<double>(task.clients.size()));

    for (std::size_t i = 0; i < task.clients.size(); ++i) {
      const auto& shard = task.clients[i];
      double mean_sq = 0.0, var = 0.0;
      ParamVector gs = vec::zeros(x.size());
      for (const auto& sample : shard.samples) {
        std::fill(gs.begin(), gs.end(), 0.0);
        accumulate_sample_grad(x, task.model, sample, gs);
        mean_sq += vec::norm2_sq(gs);
        var += vec::norm2_sq(vec::sub(gs, client_grads[i]));
      }
      r2 = std::max(r2, mean_sq / static_cast<double>(shard.n()));
      s2 = std::max(s2, var / static_cast<double>(shard.n()));
    }
  }
  tc.G2 = kMargin * g2;
  tc.R2 = kMargin * r2;
  tc.sigma2 = kMargin * s2;
  tc.B_lip = 1.0;  // SGD local updates; adaptive kinds get a diagnostic ratio
  if (task.model.kind == ModelKind::LeastSquares) {
    tc.F_star = 0.0;
  } else {
    const double f0 = train_loss(probes.front(), task);
    tc.F_star = std::max(0.0, f_min - 0.25 * (f0 - f_min));
  }
  return tc;
}

double update_lipschitz_ratio(const OptimiserState& s,
                              const std::vector<ParamVector>& gradients) {
  double sup = 0.0;
  for (const auto& g : gradients) {
    const double norm = vec::norm2(g);
    if (norm == 0.0) continue;
    const ParamVector u = update_step(g, s, 1.0);
    sup = std::max(sup, vec::norm2(u) / norm);
  }
  return sup;
}

}  // namespace fedsim
