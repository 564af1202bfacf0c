// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale differentiable tasks with exact hand-coded gradients, non-IID
// federated data synthesis, and the client-dataset directory format.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/param_vector.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

class Rng;

enum class ModelKind { LeastSquares, Logistic, MLP1 };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Feature storage: dense 64-bit arrays, or index-value pairs for the
// sparse high-dimensional task shape.
class FeatureVec {
 public:
  static FeatureVec dense(std::vector<double> values);
  static FeatureVec sparse(std::vector<std::int32_t> indices, std::vector<double> values);

  bool is_sparse() const { return sparse_; }
  const std::vector<double>& dense_values() const;
  const std::vector<std::int32_t>& sparse_indices() const { return indices_; }
  const std::vector<double>& sparse_values() const { return values_; }

  // Largest referenced feature index + 1 (dense: the array length).
  int min_feature_dim() const;

  // sum_j x_j * w[j] over a weight slice of length >= feature dim.
  double dot(const double* w) const;

  // out[j] += c * x_j
  void add_scaled(double* out, double c) const;

 private:
  bool sparse_ = false;
  std::vector<std::int32_t> indices_;  // ascending, unique (sparse only)
  std::vector<double> values_;         // dense values, or sparse nonzeros

  friend bool operator==(const FeatureVec&, const FeatureVec&);
};

bool operator==(const FeatureVec& a, const FeatureVec& b);

struct Sample {
  double label = 0.0;  // integer-valued for classification kinds
  FeatureVec features;
};

struct ClientShard {
  int client_id = 0;
  std::vector<Sample> samples;

  int n() const { return static_cast<int>(samples.size()); }
};

// Model layouts (flat, row-major):
//   LeastSquares: [w (d)], prediction a.w, loss 0.5*(a.w - b)^2
//   Logistic:     [W (C x d)][b (C)], softmax cross-entropy
//   MLP1:         [W1 (H x d)][b1 (H)][W2 (C x H)][b2 (C)], tanh hidden,
//                 softmax cross-entropy
struct ModelSpec {
  ModelKind kind = ModelKind::LeastSquares;
  int feature_dim = 0;
  int n_classes = 0;  // 0 for LeastSquares
  int hidden = 0;     // MLP1 only

  int model_dim() const;
  // Per-sample forward cost in multiply-accumulates; biases and activations
  // are excluded from the count (see accounting module).
  long long fwd_flops() const;
  void validate() const;
};

struct FederatedTask {
  ModelSpec model;
  std::vector<ClientShard> clients;
  std::vector<Sample> test_set;

  int n_clients() const { return static_cast<int>(clients.size()); }
  double mean_samples_per_client() const;
  void validate() const;
};

struct HeterogeneityKnobs {
  double dirichlet_alpha = 1.0;  // label-skew concentration (classification)
  double center_spread = 0.0;   // distance between client optima (least-squares)
  double noise_sigma = 0.0;     // per-sample label noise
};

// Generator internals exposed for exact theory constants.
struct LeastSquaresInfo {
  ParamVector global_center;
  std::vector<ParamVector> client_centers;
  double smoothness_L = 0.0;  // max over clients of lambda_max(client Hessian)
};

// Client i solves least squares against x*_i = x*_global + spread * u_i with
// u_i uniform on the unit sphere; rows a ~ N(0, I), b = a.x*_i + sigma * eps.
FederatedTask gen_least_squares_federation(int d, int n_clients, int samples_per_client,
                                           const HeterogeneityKnobs& knobs, std::uint64_t seed,
                                           LeastSquaresInfo* info = nullptr);

// Class-conditional Gaussian features; per-client label proportions drawn
// from Dirichlet(alpha).
FederatedTask gen_logistic_federation(int d, int n_classes, int n_clients, int samples_per_client,
                                      double dirichlet_alpha, std::uint64_t seed);

// Sparse 5000-feature 2-class linear task (the published sentiment-task
// shape: |x| = 10002); data synthetic, shape exact.
FederatedTask gen_sent140_shape_federation(int n_clients, int samples_per_client,
                                           int nnz_per_sample, std::uint64_t seed);

// Same-shape MLP1 task for the nonconvex setting.
FederatedTask gen_mlp_federation(int d, int hidden, int n_classes, int n_clients,
                                 int samples_per_client, double dirichlet_alpha,
                                 std::uint64_t seed);

double sample_loss(const ParamVector& x, const ModelSpec& spec, const Sample& s);
void accumulate_sample_grad(const ParamVector& x, const ModelSpec& spec, const Sample& s,
                            ParamVector& grad);

// Mean gradient over the given sample indices of a shard.
ParamVector batch_grad(const ParamVector& x, const ModelSpec& spec, const ClientShard& shard,
                       const std::vector<int>& indices);

// Mean gradient over a uniform without-replacement batch (B > n clamps to n).
// When indices_out is non-null the drawn indices are recorded for replay.
ParamVector minibatch_grad(const ParamVector& x, const ModelSpec& spec, const ClientShard& shard,
                           int batch_size, Rng& rng, std::vector<int>* indices_out = nullptr);

ParamVector fullbatch_grad(const ParamVector& x, const ModelSpec& spec, const ClientShard& shard);

// Exact backpropagated mean gradient for the one-hidden-layer net.
ParamVector mlp_grad(const ParamVector& x, const ModelSpec& spec,
                     const std::vector<Sample>& batch);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;  // argmax accuracy; 0 for regression kinds
};

EvalResult eval_model(const ParamVector& x, const ModelSpec& spec,
                      const std::vector<Sample>& test_set);

double mean_loss(const ParamVector& x, const ModelSpec& spec, const std::vector<Sample>& samples);

// Global objective F(x): unweighted mean over clients of the client mean
// loss, matching the round aggregation convention.
double train_loss(const ParamVector& x, const FederatedTask& task);

// Exact global gradient: mean over clients of full-batch client gradients.
ParamVector global_gradient(const ParamVector& x, const FederatedTask& task);

// lambda_max of one client's empirical Hessian (1/n) sum a a^T by power
// iteration; exact smoothness for least-squares clients.
double client_hessian_lambda_max(const ClientShard& shard, int feature_dim);

// Initial model: zeros for the convex kinds, small seeded Gaussian weights
// for MLP1 (symmetry breaking).
ParamVector init_model(const ModelSpec& spec, std::uint64_t seed);

void save_client_dir(const FederatedTask& task, const std::string& dir);
FederatedTask load_client_dir(const std::string& dir);

}  // namespace fedsim
