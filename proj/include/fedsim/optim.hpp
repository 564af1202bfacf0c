// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generic optimiser abstraction: every optimiser is the triple
//   update   U(g, s)            -> signed displacement added to the model,
//   tracking T(g~, s)           -> next statistics,
//   inverse  I(x_t, x_t1, s, K) -> mean local gradient recovered from the
//                                  round's displacement under frozen s.
// The update carries the -eta factor, so local steps read y <- y + U(g, s).

#pragma once

#include <optional>
#include <string>

#include "fedsim/param_vector.hpp"

namespace fedsim {

enum class OptimKind { SGD, RMSProp, SGDm, Adam };

std::string to_string(OptimKind kind);
OptimKind optim_kind_from_string(const std::string& name);

// Global optimiser statistics s: the object a round downloads, freezes
// during local steps, and tracks once per round.
struct OptimiserState {
  OptimKind kind = OptimKind::SGD;
  std::optional<ParamVector> m;  // first moment (SGDm, Adam)
  std::optional<ParamVector> v;  // second moment (RMSProp, Adam), entries >= 0
  double beta = 0.0;             // SGDm / RMSProp decay
  double beta1 = 0.0;            // Adam first-moment decay
  double beta2 = 0.0;            // Adam second-moment decay
  double epsilon = 0.0;          // stability constant, applied as sqrt(v) + epsilon

  static OptimiserState sgd();
  static OptimiserState rmsprop(std::size_t dim, double beta, double epsilon);
  static OptimiserState sgdm(std::size_t dim, double beta);
  static OptimiserState adam(std::size_t dim, double beta1, double beta2, double epsilon);
  static OptimiserState make(OptimKind kind, std::size_t dim, double beta, double beta1,
                             double beta2, double epsilon);

  // Number of floats a client downloads alongside the model: |s|.
  std::size_t state_floats() const;
  std::size_t dim() const;

  // Switches second-moment tracking to the unsquared gradient (off by
  // default; see README on the tracking convention).
  bool track_unsquared_v = false;
};

// Client learning rate and local step count; eta_tilde() = K * eta exactly.
struct StepSize {
  double eta = 0.0;
  int k_steps = 0;

  StepSize(double eta_in, int k_steps_in);
  double eta_tilde() const { return eta * static_cast<double>(k_steps); }
};

// U: signed displacement. Statistics in s are never mutated.
ParamVector update_step(const ParamVector& g, const OptimiserState& s, double eta);

// T: next statistics from the biased gradient g~. Input state not mutated.
OptimiserState tracking_step(const ParamVector& g_tilde, const OptimiserState& s);

// I: biased gradient g~ from the endpoints of K frozen-statistics updates.
ParamVector inverse_step(const ParamVector& x_t, const ParamVector& x_t1, const OptimiserState& s,
                         const StepSize& step);

}  // namespace fedsim
