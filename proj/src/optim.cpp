// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsim/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

namespace {

void require_decay(double b, const char* name) {
  // beta = 1 would make the inverse step divide by zero; reject at
  // construction rather than deep inside a round.
  if (!(b >= 0.0 && b < 1.0))
    throw std::invalid_argument(std::string("OptimiserState: ") + name + " must lie in [0, 1)");
}

void require_dim(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("OptimiserState: dim must be positive");
}

void check_state_dims(const ParamVector& g, const OptimiserState& s, const char* what) {
  vec::require_finite(g, what);
  if (s.m) vec::require_same_dim(g, *s.m, what);
  if (s.v) vec::require_same_dim(g, *s.v, what);
}

}  // namespace

std::string to_string(OptimKind kind) {
  switch (kind) {
    case OptimKind::SGD: return "sgd";
    case OptimKind::RMSProp: return "rmsprop";
    case OptimKind::SGDm: return "sgdm";
    case OptimKind::Adam: return "adam";
  }
  throw std::invalid_argument("to_string: bad OptimKind");
}

OptimKind optim_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimKind::SGD;
  if (name == "rmsprop") return OptimKind::RMSProp;
  if (name == "sgdm") return OptimKind::SGDm;
  if (name == "adam") return OptimKind::Adam;
  throw std::invalid_argument("unknown optimiser kind: " + name);
}

OptimiserState OptimiserState::sgd() { return OptimiserState{}; }

OptimiserState OptimiserState::rmsprop(std::size_t dim, double beta, double epsilon) {
  require_dim(dim);
  require_decay(beta, "beta");
  if (epsilon < 0.0) throw std::invalid_argument("OptimiserState: epsilon must be >= 0");
  OptimiserState s;
  s.kind = OptimKind::RMSProp;
  s.v = vec::zeros(dim);
  s.beta = beta;
  s.epsilon = epsilon;
  return s;
}

OptimiserState OptimiserState::sgdm(std::size_t dim, double beta) {
  require_dim(dim);
  require_decay(beta, "beta");
  OptimiserState s;
  s.kind = OptimKind::SGDm;
  s.m = vec::zeros(dim);
  s.beta = beta;
  return s;
}

OptimiserState OptimiserState::adam(std::size_t dim, double beta1, double beta2, double epsilon) {
  require_dim(dim);
  require_decay(beta1, "beta1");
  require_decay(beta2, "beta2");
  if (epsilon < 0.0) throw std::invalid_argument("OptimiserState: epsilon must be >= 0");
  OptimiserState s;
  s.kind = OptimKind::Adam;
  s.m = vec::zeros(dim);
  s.v = vec::zeros(dim);
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

OptimiserState OptimiserState::make(OptimKind kind, std::size_t dim, double beta, double beta1,
                                    double beta2, double epsilon) {
  switch (kind) {
    case OptimKind::SGD: return sgd();
    case OptimKind::RMSProp: return rmsprop(dim, beta, epsilon);
    case OptimKind::SGDm: return sgdm(dim, beta);
    case OptimKind::Adam: return adam(dim, beta1, beta2, epsilon);
  }
  throw std::invalid_argument("OptimiserState::make: bad kind");
}

std::size_t OptimiserState::state_floats() const {
  return (m ? m->size() : 0) + (v ? v->size() : 0);
}

std::size_t OptimiserState::dim() const {
  if (m) return m->size();
  if (v) return v->size();
  return 0;
}

StepSize::StepSize(double eta_in, int k_steps_in) : eta(eta_in), k_steps(k_steps_in) {
  if (!(eta > 0.0)) throw std::invalid_argument("StepSize: eta must be positive");
  if (k_steps < 1) throw std::invalid_argument("StepSize: k_steps must be >= 1");
}

ParamVector update_step(const ParamVector& g, const OptimiserState& s, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("update_step: eta must be positive");
  check_state_dims(g, s, "update_step");
  ParamVector delta(g.size());
  switch (s.kind) {
    case OptimKind::SGD:
      for (std::size_t i = 0; i < g.size(); ++i) delta[i] = -eta * g[i];
      break;
    case OptimKind::RMSProp:
      for (std::size_t i = 0; i < g.size(); ++i)
        delta[i] = -eta * g[i] / (std::sqrt((*s.v)[i]) + s.epsilon);
      break;
    case OptimKind::SGDm:
      for (std::size_t i = 0; i < g.size(); ++i)
        delta[i] = -eta * (s.beta * (*s.m)[i] + (1.0 - s.beta) * g[i]);
      break;
    case OptimKind::Adam:
      for (std::size_t i = 0; i < g.size(); ++i)
        delta[i] = -eta * (s.beta1 * (*s.m)[i] + (1.0 - s.beta1) * g[i]) /
                   (std::sqrt((*s.v)[i]) + s.epsilon);
      break;
  }
  vec::require_finite(delta, "update_step output");
  return delta;
}

OptimiserState tracking_step(const ParamVector& g_tilde, const OptimiserState& s) {
  check_state_dims(g_tilde, s, "tracking_step");
  OptimiserState out = s;
  const auto track_v = [&](ParamVector& v, double decay) {
    for (std::size_t i = 0; i < g_tilde.size(); ++i) {
      const double target = s.track_unsquared_v ? g_tilde[i] : g_tilde[i] * g_tilde[i];
      v[i] = decay * v[i] + (1.0 - decay) * target;
    }
  };
  switch (s.kind) {
    case OptimKind::SGD:
      break;
    case OptimKind::RMSProp:
      track_v(*out.v, s.beta);
      break;
    case OptimKind::SGDm:
      for (std::size_t i = 0; i < g_tilde.size(); ++i)
        (*out.m)[i] = s.beta * (*s.m)[i] + (1.0 - s.beta) * g_tilde[i];
      break;
    case OptimKind::Adam:
      for (std::size_t i = 0; i < g_tilde.size(); ++i)
        (*out.m)[i] = s.beta1 * (*s.m)[i] + (1.0 - s.beta1) * g_tilde[i];
      track_v(*out.v, s.beta2);
      break;
  }
  return out;
}

ParamVector inverse_step(const ParamVector& x_t, const ParamVector& x_t1, const OptimiserState& s,
                         const StepSize& step) {
  vec::require_same_dim(x_t, x_t1, "inverse_step");
  check_state_dims(x_t, s, "inverse_step");
  const double scale = 1.0 / (step.eta * static_cast<double>(step.k_steps));
  ParamVector g(x_t.size());
  switch (s.kind) {
    case OptimKind::SGD:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = (x_t[i] - x_t1[i]) * scale;
      break;
    case OptimKind::RMSProp:
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = (x_t[i] - x_t1[i]) * (std::sqrt((*s.v)[i]) + s.epsilon) * scale;
      break;
    case OptimKind::SGDm:
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = ((x_t[i] - x_t1[i]) * scale - s.beta * (*s.m)[i]) / (1.0 - s.beta);
      break;
    case OptimKind::Adam:
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = ((x_t[i] - x_t1[i]) * (std::sqrt((*s.v)[i]) + s.epsilon) * scale -
                s.beta1 * (*s.m)[i]) /
               (1.0 - s.beta1);
      break;
  }
  vec::require_finite(g, "inverse_step output");
  return g;
}

}  // namespace fedsim
