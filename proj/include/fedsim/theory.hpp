// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Client-drift perturbation measurement and numeric evaluation of the
// momentum convergence bounds.
//
// Convention note: the implementation tracks the scaled momentum
// m_t = beta m_{t-1} + (1-beta) g and moves the server model by K*eta per
// round. The analysis underlying these evaluators uses the unscaled
// recursion M_t = beta M_{t-1} + (g + e), x <- x - eta_tilde M_t. The two
// coincide under M = m/(1-beta) and eta_tilde = (1-beta)*K*eta; the helpers
// below apply that mapping and all bound formulas take the analysis-side
// eta_tilde.

#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/federation.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/tasks.hpp"

namespace fedsim {

struct TheoryConstants {
  double L = 0.0;       // client smoothness
  double G2 = 0.0;      // inter-client gradient variance bound
  double R2 = 0.0;      // stochastic gradient squared-norm bound
  double sigma2 = 0.0;  // intra-client gradient variance bound
  double B_lip = 1.0;   // update-Lipschitz bound ||U(g)|| <= B ||g||
  double F_star = 0.0;  // objective lower bound

  void validate() const;
};

struct BoundInputs {
  double eta_tilde = 0.0;  // analysis-side pseudo learning rate
  double beta = 0.0;
  int k_steps = 1;
  long long T = 1;  // total rounds
  double C = 1.0;   // free constant of the step-size schedule
  double F0 = 0.0;  // initial objective value

  double t_tilde() const;  // T - beta/(1-beta)
};

// Analysis-side eta_tilde for an implementation run: (1-beta) * K * eta.
double theory_eta_tilde(double beta, double eta, int k_steps);

// Y = 18 B^2 L^2 (R^2 + G^2 + sigma^2/K)
double y_constant(const TheoryConstants& tc, int k_steps);

// Z = 4 C^2 (1-beta)^2 Y
double z_constant(const TheoryConstants& tc, const BoundInputs& bi);

// e_t = (1/KS) sum_{i,k} [grad f_i(y_{i,k-1}; xi_{i,k}) - grad f_i(x_t; xi_{i,k})],
// the second term recomputed at x_t with the recorded minibatches.
ParamVector measure_perturbation(const RoundTrace& trace, const FederatedTask& task,
                                 const ParamVector& x_t);

// RHS of the perturbation norm bound: B^2 L^2 eta_tilde^2 (E||g||^2 + G^2 + sigma^2/K).
double perturbation_bound(const TheoryConstants& tc, double eta_tilde, int k_steps,
                          double mean_g2);

// Momentum norm bound: 2 (R^2 + eta_tilde^2 Y) / (1-beta)^2.
double lemma1_bound(const TheoryConstants& tc, const BoundInputs& bi);

struct Theorem1Result {
  double descent_term = 0.0;   // 2 (1-beta)(F0 - F*) / (eta_tilde T~)
  double drift_term = 0.0;     // T eta_tilde^2 Y / T~
  double momentum_term = 0.0;  // 2 T eta_tilde L (1+beta)(R^2 + eta_tilde^2 Y) / (T~ (1-beta)^2)
  double total = 0.0;
};

// Requires T > 1/(1-beta).
Theorem1Result theorem1_rhs(const TheoryConstants& tc, const BoundInputs& bi);

struct Corollary1Result {
  double term1 = 0.0;      // (F0 - F*) / (C sqrt(T))
  double term2 = 0.0;      // 4 C L (1+beta)(R^2 + Z/T) / ((1-beta) sqrt(T))
  double term3 = 0.0;      // Z / T
  double total = 0.0;
  double eta_tilde = 0.0;  // implied (1-beta) 2C / sqrt(T)
};

// Requires T >= 100/(1-beta).
Corollary1Result corollary1_rhs(const TheoryConstants& tc, const BoundInputs& bi);

// P[t = j] proportional to 1 - beta^(T-j) over j in {0, ..., T-1}, normalised.
std::vector<double> index_weights(double beta, long long T);

// Exact weighted average of a per-round trajectory under index_weights.
double index_weighted_mean(const std::vector<double>& per_round, double beta);

// Empirical constants: L exact for least-squares (max client Hessian
// eigenvalue), otherwise a sup of gradient-difference ratios; G2/R2/sigma2
// as empirical maxima over probe points along a short reference descent
// trajectory, with a 1.5x safety margin; F* = 0 for least-squares, else the
// best observed objective minus a margin (floored at 0, all losses here are
// nonnegative).
TheoryConstants estimate_constants(const FederatedTask& task, int n_probe, std::uint64_t seed);

// Diagnostic for adaptive updates: sup over probe gradients of
// ||U(g, s)|| / (eta ||g||) (independent of eta).
double update_lipschitz_ratio(const OptimiserState& s, const std::vector<ParamVector>& gradients);

}  // namespace fedsim
