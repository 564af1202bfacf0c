// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsim/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedsim {

namespace {

// Stable log-sum-exp and softmax over logits z; p may alias nothing.
double log_sum_exp(const std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double zi : z) s += std::exp(zi - zmax);
  return zmax + std::log(s);
}

int label_class(const ModelSpec& spec, const Sample& s, const char* what) {
  const double lab = s.label;
  const int c = static_cast<int>(std::llround(lab));
  if (std::abs(lab - c) > 0.0 || c < 0 || c >= spec.n_classes)
    throw std::invalid_argument(std::string(what) + ": label " + std::to_string(lab) +
                                " is not a class index in [0, " +
                                std::to_string(spec.n_classes) + ")");
  return c;
}

// Forward pass logits for the classification kinds.
void logits_logistic(const ParamVector& x, const ModelSpec& spec, const FeatureVec& f,
                     std::vector<double>& z) {
  const int d = spec.feature_dim;
  const int C = spec.n_classes;
  z.resize(static_cast<std::size_t>(C));
  const double* bias = x.data() + static_cast<std::size_t>(C) * d;
  for (int c = 0; c < C; ++c) z[static_cast<std::size_t>(c)] = f.dot(x.data() + static_cast<std::size_t>(c) * d) + bias[c];
}

struct MlpForward {
  std::vector<double> h_pre, h, z;
};

void mlp_forward(const ParamVector& x, const ModelSpec& spec, const FeatureVec& f,
                 MlpForward& fw) {
  const int d = spec.feature_dim;
  const int H = spec.hidden;
  const int C = spec.n_classes;
  const double* w1 = x.data();
  const double* b1 = w1 + static_cast<std::size_t>(H) * d;
  const double* w2 = b1 + H;
  const double* b2 = w2 + static_cast<std::size_t>(C) * H;
  fw.h_pre.resize(static_cast<std::size_t>(H));
  fw.h.resize(static_cast<std::size_t>(H));
  fw.z.resize(static_cast<std::size_t>(C));
  for (int j = 0; j < H; ++j) {
    fw.h_pre[static_cast<std::size_t>(j)] = f.dot(w1 + static_cast<std::size_t>(j) * d) + b1[j];
    fw.h[static_cast<std::size_t>(j)] = std::tanh(fw.h_pre[static_cast<std::size_t>(j)]);
  }
  for (int c = 0; c < C; ++c) {
    double zc = b2[c];
    for (int j = 0; j < H; ++j) zc += w2[static_cast<std::size_t>(c) * H + j] * fw.h[static_cast<std::size_t>(j)];
    fw.z[static_cast<std::size_t>(c)] = zc;
  }
}

void check_model(const ParamVector& x, const ModelSpec& spec, const char* what) {
  spec.validate();
  if (static_cast<int>(x.size()) != spec.model_dim())
    throw std::invalid_argument(std::string(what) + ": model dim " + std::to_string(x.size()) +
                                " does not match spec dim " + std::to_string(spec.model_dim()));
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LeastSquares: return "least_squares";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::MLP1: return "mlp1";
  }
  throw std::invalid_argument("to_string: bad ModelKind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "least_squares") return ModelKind::LeastSquares;
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "mlp1") return ModelKind::MLP1;
  throw std::invalid_argument("unknown model kind: " + name);
}

FeatureVec FeatureVec::dense(std::vector<double> values) {
  FeatureVec f;
  f.sparse_ = false;
  f.values_ = std::move(values);
  return f;
}

FeatureVec FeatureVec::sparse(std::vector<std::int32_t> indices, std::vector<double> values) {
  if (indices.size() != values.size())
    throw std::invalid_argument("FeatureVec::sparse: index/value length mismatch");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0) throw std::invalid_argument("FeatureVec::sparse: negative index");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw std::invalid_argument("FeatureVec::sparse: indices must be ascending and unique");
  }
  FeatureVec f;
  f.sparse_ = true;
  f.indices_ = std::move(indices);
  f.values_ = std::move(values);
  return f;
}

const std::vector<double>& FeatureVec::dense_values() const {
  if (sparse_) throw std::logic_error("FeatureVec: dense_values on sparse vector");
  return values_;
}

int FeatureVec::min_feature_dim() const {
  if (!sparse_) return static_cast<int>(values_.size());
  return indices_.empty() ? 0 : indices_.back() + 1;
}

double FeatureVec::dot(const double* w) const {
  double s = 0.0;
  if (sparse_) {
    for (std::size_t i = 0; i < indices_.size(); ++i) s += values_[i] * w[indices_[i]];
  } else {
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * w[i];
  }
  return s;
}

void FeatureVec::add_scaled(double* out, double c) const {
  if (sparse_) {
    for (std::size_t i = 0; i < indices_.size(); ++i) out[indices_[i]] += c * values_[i];
  } else {
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] += c * values_[i];
  }
}

bool operator==(const FeatureVec& a, const FeatureVec& b) {
  return a.sparse_ == b.sparse_ && a.indices_ == b.indices_ && a.values_ == b.values_;
}

int ModelSpec::model_dim() const {
  switch (kind) {
    case ModelKind::LeastSquares: return feature_dim;
    case ModelKind::Logistic: return n_classes * feature_dim + n_classes;
    case ModelKind::MLP1: return hidden * feature_dim + hidden + n_classes * hidden + n_classes;
  }
  throw std::invalid_argument("ModelSpec: bad kind");
}

long long ModelSpec::fwd_flops() const {
  switch (kind) {
    case ModelKind::LeastSquares: return feature_dim;
    case ModelKind::Logistic:
      return static_cast<long long>(feature_dim) * n_classes;
    case ModelKind::MLP1:
      return static_cast<long long>(feature_dim) * hidden +
             static_cast<long long>(hidden) * n_classes;
  }
  throw std::invalid_argument("ModelSpec: bad kind");
}

void ModelSpec::validate() const {
  if (feature_dim < 1) throw std::invalid_argument("ModelSpec: feature_dim must be >= 1");
  switch (kind) {
    case ModelKind::LeastSquares:
      if (n_classes != 0) throw std::invalid_argument("ModelSpec: least_squares has no classes");
      break;
    case ModelKind::Logistic:
      if (n_classes < 2) throw std::invalid_argument("ModelSpec: logistic needs n_classes >= 2");
      break;
    case ModelKind::MLP1:
      if (n_classes < 2) throw std::invalid_argument("ModelSpec: mlp1 needs n_classes >= 2");
      if (hidden < 1) throw std::invalid_argument("ModelSpec: mlp1 needs hidden >= 1");
      break;
  }
}

double FederatedTask::mean_samples_per_client() const {
  if (clients.empty()) return 0.0;
  double total = 0.0;
  for (const auto& c : clients) total += c.n();
  return total / static_cast<double>(clients.size());
}

void FederatedTask::validate() const {
  model.validate();
  if (clients.empty()) throw std::invalid_argument("FederatedTask: no clients");
  for (const auto& c : clients) {
    if (c.samples.empty())
      throw std::invalid_argument("client " + std::to_string(c.client_id) + " has zero samples");
    for (const auto& s : c.samples)
      if (s.features.min_feature_dim() > model.feature_dim)
        throw std::invalid_argument("FederatedTask: client " + std::to_string(c.client_id) +
                                    " feature dim exceeds model feature_dim");
  }
}

double sample_loss(const ParamVector& x, const ModelSpec& spec, const Sample& s) {
  switch (spec.kind) {
    case ModelKind::LeastSquares: {
      const double r = s.features.dot(x.data()) - s.label;
      return 0.5 * r * r;
    }
    case ModelKind::Logistic: {
      std::vector<double> z;
      logits_logistic(x, spec, s.features, z);
      const int y = label_class(spec, s, "sample_loss");
      return log_sum_exp(z) - z[static_cast<std::size_t>(y)];
    }
    case ModelKind::MLP1: {
      MlpForward fw;
      mlp_forward(x, spec, s.features, fw);
      const int y = label_class(spec, s, "sample_loss");
      return log_sum_exp(fw.z) - fw.z[static_cast<std::size_t>(y)];
    }
  }
  throw std::invalid_argument("sample_loss: bad kind");
}

void accumulate_sample_grad(const ParamVector& x, const ModelSpec& spec, const Sample& s,
                            ParamVector& grad) {
  if (grad.size() != x.size()) throw std::invalid_argument("accumulate_sample_grad: grad dim");
  switch (spec.kind) {
    case ModelKind::LeastSquares: {
      const double r = s.features.dot(x.data()) - s.label;
      s.features.add_scaled(grad.data(), r);
      return;
    }
    case ModelKind::Logistic: {
      const int d = spec.feature_dim;
      const int C = spec.n_classes;
      std::vector<double> z;
      logits_logistic(x, spec, s.features, z);
      const double lse = log_sum_exp(z);
      const int y = label_class(spec, s, "accumulate_sample_grad");
      double* gbias = grad.data() + static_cast<std::size_t>(C) * d;
      for (int c = 0; c < C; ++c) {
        const double dz = std::exp(z[static_cast<std::size_t>(c)] - lse) - (c == y ? 1.0 : 0.0);
        s.features.add_scaled(grad.data() + static_cast<std::size_t>(c) * d, dz);
        gbias[c] += dz;
      }
      return;
    }
    case ModelKind::MLP1: {
      const int d = spec.feature_dim;
      const int H = spec.hidden;
      const int C = spec.n_classes;
      MlpForward fw;
      mlp_forward(x, spec, s.features, fw);
      const double lse = log_sum_exp(fw.z);
      const int y = label_class(spec, s, "accumulate_sample_grad");
      const double* w2 = x.data() + static_cast<std::size_t>(H) * d + H;
      double* gw1 = grad.data();
      double* gb1 = gw1 + static_cast<std::size_t>(H) * d;
      double* gw2 = gb1 + H;
      double* gb2 = gw2 + static_cast<std::size_t>(C) * H;
      std::vector<double> dz(static_cast<std::size_t>(C));
      for (int c = 0; c < C; ++c)
        dz[static_cast<std::size_t>(c)] =
            std::exp(fw.z[static_cast<std::size_t>(c)] - lse) - (c == y ? 1.0 : 0.0);
      for (int c = 0; c < C; ++c) {
        for (int j = 0; j < H; ++j)
          gw2[static_cast<std::size_t>(c) * H + j] +=
              dz[static_cast<std::size_t>(c)] * fw.h[static_cast<std::size_t>(j)];
        gb2[c] += dz[static_cast<std::size_t>(c)];
      }
      for (int j = 0; j < H; ++j) {
        double dh = 0.0;
        for (int c = 0; c < C; ++c)
          dh += dz[static_cast<std::size_t>(c)] * w2[static_cast<std::size_t>(c) * H + j];
        const double hj = fw.h[static_cast<std::size_t>(j)];
        const double dpre = dh * (1.0 - hj * hj);
        s.features.add_scaled(gw1 + static_cast<std::size_t>(j) * d, dpre);
        gb1[j] += dpre;
      }
      return;
    }
  }
  throw std::invalid_argument("accumulate_sample_grad: bad kind");
}

ParamVector batch_grad(const ParamVector& x, const ModelSpec& spec, const ClientShard& shard,
                       const std::vector<int>& indices) {
  check_model(x, spec, "batch_grad");
  if (indices.empty()) throw std::invalid_argument("batch_grad: empty index list");
  ParamVector grad = vec::zeros(x.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= shard.n())
      throw std::invalid_argument("batch_grad: sample index out of range");
    accumulate_sample_grad(x, spec, shard.samples[static_cast<std::size_t>(idx)], grad);
  }
  vec::scale_inplace(grad, 1.0 / static_cast<double>(indices.size()));
  vec::require_finite(grad, "batch_grad output");
  return grad;
}

ParamVector minibatch_grad(const ParamVector& x, const ModelSpec& spec, const ClientShard& shard,
                           int batch_size, Rng& rng, std::vector<int>* indices_out) {
  if (shard.samples.empty())
    throw std::invalid_argument("client " + std::to_string(shard.client_id) + " has zero samples");
  if (batch_size < 1) throw std::invalid_argument("minibatch_grad: batch_size must be >= 1");
  const int b = std::min(batch_size, shard.n());
  std::vector<int> indices = rng.sample_without_replacement(shard.n(), b);
  if (indices_out) *indices_out = indices;
  return batch_grad(x, spec, shard, indices);
}

ParamVector fullbatch_grad(const ParamVector& x, const ModelSpec& spec, const ClientShard& shard) {
  if (shard.samples.empty())
    throw std::invalid_argument("client " + std::to_string(shard.client_id) + " has zero samples");
  std::vector<int> all(static_cast<std::size_t>(shard.n()));
  for (int i = 0; i < shard.n(); ++i) all[static_cast<std::size_t>(i)] = i;
  return batch_grad(x, spec, shard, all);
}

ParamVector mlp_grad(const ParamVector& x, const ModelSpec& spec,
                     const std::vector<Sample>& batch) {
  if (spec.kind != ModelKind::MLP1) throw std::invalid_argument("mlp_grad: kind must be mlp1");
  check_model(x, spec, "mlp_grad");
  if (batch.empty()) throw std::invalid_argument("mlp_grad: empty batch");
  ParamVector grad = vec::zeros(x.size());
  for (const auto& s : batch) accumulate_sample_grad(x, spec, s, grad);
  vec::scale_inplace(grad, 1.0 / static_cast<double>(batch.size()));
  return grad;
}

EvalResult eval_model(const ParamVector& x, const ModelSpec& spec,
                      const std::vector<Sample>& test_set) {
  check_model(x, spec, "eval_model");
  if (test_set.empty()) throw std::invalid_argument("eval_model: empty test set");
  EvalResult out;
  long long correct = 0;
  std::vector<double> z;
  MlpForward fw;
  for (const auto& s : test_set) {
    out.loss += sample_loss(x, spec, s);
    if (spec.kind == ModelKind::LeastSquares) continue;
    if (spec.kind == ModelKind::Logistic) {
      logits_logistic(x, spec, s.features, z);
    } else {
      mlp_forward(x, spec, s.features, fw);
      z = fw.z;
    }
    const int pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (pred == label_class(spec, s, "eval_model")) ++correct;
  }
  out.loss /= static_cast<double>(test_set.size());
  out.accuracy = spec.kind == ModelKind::LeastSquares
                     ? 0.0
                     : static_cast<double>(correct) / static_cast<double>(test_set.size());
  return out;
}

double mean_loss(const ParamVector& x, const ModelSpec& spec,
                 const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean_loss: empty sample list");
  double total = 0.0;
  for (const auto& s : samples) total += sample_loss(x, spec, s);
  return total / static_cast<double>(samples.size());
}

double train_loss(const ParamVector& x, const FederatedTask& task) {
  if (task.clients.empty()) throw std::invalid_argument("train_loss: no clients");
  double total = 0.0;
  for (const auto& c : task.clients) total += mean_loss(x, task.model, c.samples);
  return total / static_cast<double>(task.clients.size());
}

ParamVector global_gradient(const ParamVector& x, const FederatedTask& task) {
  if (task.clients.empty()) throw std::invalid_argument("global_gradient: no clients");
  ParamVector grad = vec::zeros(x.size());
  for (const auto& c : task.clients) vec::add_inplace(grad, fullbatch_grad(x, task.model, c));
  vec::scale_inplace(grad, 1.0 / static_cast<double>(task.clients.size()));
  return grad;
}

double client_hessian_lambda_max(const ClientShard& shard, int feature_dim) {
  if (shard.samples.empty())
    throw std::invalid_argument("client " + std::to_string(shard.client_id) + " has zero samples");
  if (feature_dim < 1) throw std::invalid_argument("client_hessian_lambda_max: feature_dim");
  // Power iteration on H = (1/n) sum a a^T applied matrix-free.
  Rng rng(0x9e3779b9);
  ParamVector u(static_cast<std::size_t>(feature_dim));
  for (auto& ui : u) ui = rng.normal();
  vec::scale_inplace(u, 1.0 / vec::norm2(u));
  double lambda = 0.0;
  const double inv_n = 1.0 / static_cast<double>(shard.n());
  for (int it = 0; it < 20000; ++it) {
    ParamVector hu = vec::zeros(u.size());
    for (const auto& s : shard.samples) {
      const double proj = s.features.dot(u.data());
      s.features.add_scaled(hu.data(), proj * inv_n);
    }
    const double norm = vec::norm2(hu);
    if (norm == 0.0) return 0.0;
    const double next = vec::dot(u, hu);
    vec::scale_inplace(hu, 1.0 / norm);
    u = hu;
    if (it > 4 && std::abs(next - lambda) <= 1e-14 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

ParamVector init_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector x = vec::zeros(static_cast<std::size_t>(spec.model_dim()));
  if (spec.kind == ModelKind::MLP1) {
    Rng rng = Rng::keyed(seed, Stream::kModelInit);
    const int d = spec.feature_dim;
    const int H = spec.hidden;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(H));
    for (int i = 0; i < H * d; ++i) x[static_cast<std::size_t>(i)] = s1 * rng.normal();
    const std::size_t w2_off = static_cast<std::size_t>(H) * d + H;
    for (int i = 0; i < spec.n_classes * H; ++i) x[w2_off + static_cast<std::size_t>(i)] = s2 * rng.normal();
  }
  return x;
}

namespace {

ParamVector random_unit_vector(Rng& rng, int d) {
  ParamVector u(static_cast<std::size_t>(d));
  double norm = 0.0;
  do {
    for (auto& ui : u) ui = rng.normal();
    norm = vec::norm2(u);
  } while (norm == 0.0);
  vec::scale_inplace(u, 1.0 / norm);
  return u;
}

int test_set_size(int n_clients, int samples_per_client, int lo, int hi) {
  const long long pool = static_cast<long long>(n_clients) * samples_per_client / 5;
  return static_cast<int>(std::clamp<long long>(pool, lo, hi));
}

int draw_class(Rng& rng, const std::vector<double>& proportions) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t c = 0; c < proportions.size(); ++c) {
    acc += proportions[c];
    if (u < acc) return static_cast<int>(c);
  }
  return static_cast<int>(proportions.size()) - 1;
}

std::vector<ParamVector> gaussian_class_means(Rng& rng, int n_classes, int d) {
  // Separation scale keeps the Bayes error moderate independent of d.
  const double scale = 2.5 / std::sqrt(static_cast<double>(d));
  std::vector<ParamVector> means(static_cast<std::size_t>(n_classes));
  for (auto& mu : means) {
    mu.resize(static_cast<std::size_t>(d));
    for (auto& x : mu) x = scale * rng.normal();
  }
  return means;
}

Sample gaussian_class_sample(Rng& rng, const std::vector<ParamVector>& means, int cls) {
  const auto& mu = means[static_cast<std::size_t>(cls)];
  std::vector<double> f(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) f[j] = mu[j] + rng.normal();
  Sample s;
  s.label = static_cast<double>(cls);
  s.features = FeatureVec::dense(std::move(f));
  return s;
}

}  // namespace

FederatedTask gen_least_squares_federation(int d, int n_clients, int samples_per_client,
                                           const HeterogeneityKnobs& knobs, std::uint64_t seed,
                                           LeastSquaresInfo* info) {
  if (d < 1 || n_clients < 1 || samples_per_client < 1)
    throw std::invalid_argument("gen_least_squares_federation: invalid dims");
  if (knobs.center_spread < 0.0 || knobs.noise_sigma < 0.0)
    throw std::invalid_argument("gen_least_squares_federation: negative knobs");
  FederatedTask task;
  task.model.kind = ModelKind::LeastSquares;
  task.model.feature_dim = d;

  Rng rng = Rng::keyed(seed, Stream::kTaskGen);
  ParamVector center(static_cast<std::size_t>(d));
  for (auto& c : center) c = rng.normal();

  std::vector<ParamVector> client_centers;
  client_centers.reserve(static_cast<std::size_t>(n_clients));
  task.clients.resize(static_cast<std::size_t>(n_clients));
  for (int i = 0; i < n_clients; ++i) {
    ParamVector xi = center;
    if (knobs.center_spread > 0.0) {
      const ParamVector u = random_unit_vector(rng, d);
      vec::axpy(xi, knobs.center_spread, u);
    }
    auto& shard = task.clients[static_cast<std::size_t>(i)];
    shard.client_id = i;
    shard.samples.reserve(static_cast<std::size_t>(samples_per_client));
    for (int jj = 0; jj < samples_per_client; ++jj) {
      std::vector<double> a(static_cast<std::size_t>(d));
      for (auto& aj : a) aj = rng.normal();
      Sample s;
      s.features = FeatureVec::dense(std::move(a));
      s.label = s.features.dot(xi.data()) + knobs.noise_sigma * rng.normal();
      shard.samples.push_back(std::move(s));
    }
    client_centers.push_back(std::move(xi));
  }

  const int test_n = test_set_size(n_clients, samples_per_client, 50, 1000);
  task.test_set.reserve(static_cast<std::size_t>(test_n));
  for (int jj = 0; jj < test_n; ++jj) {
    std::vector<double> a(static_cast<std::size_t>(d));
    for (auto& aj : a) aj = rng.normal();
    Sample s;
    s.features = FeatureVec::dense(std::move(a));
    s.label = s.features.dot(center.data()) + knobs.noise_sigma * rng.normal();
    task.test_set.push_back(std::move(s));
  }

  if (info) {
    info->global_center = center;
    info->client_centers = client_centers;
    info->smoothness_L = 0.0;
    for (const auto& shard : task.clients)
      info->smoothness_L = std::max(info->smoothness_L, client_hessian_lambda_max(shard, d));
  }
  task.validate();
  return task;
}

FederatedTask gen_logistic_federation(int d, int n_classes, int n_clients, int samples_per_client,
                                      double dirichlet_alpha, std::uint64_t seed) {
  if (n_classes < 2) throw std::invalid_argument("gen_logistic_federation: n_classes must be >= 2");
  if (d < 1 || n_clients < 1 || samples_per_client < 1)
    throw std::invalid_argument("gen_logistic_federation: invalid dims");
  if (!(dirichlet_alpha > 0.0))
    throw std::invalid_argument("gen_logistic_federation: dirichlet_alpha must be positive");
  FederatedTask task;
  task.model.kind = ModelKind::Logistic;
  task.model.feature_dim = d;
  task.model.n_classes = n_classes;

  Rng rng = Rng::keyed(seed, Stream::kTaskGen);
  const auto means = gaussian_class_means(rng, n_classes, d);

  task.clients.resize(static_cast<std::size_t>(n_clients));
  for (int i = 0; i < n_clients; ++i) {
    auto& shard = task.clients[static_cast<std::size_t>(i)];
    shard.client_id = i;
    const auto proportions = rng.dirichlet(dirichlet_alpha, n_classes);
    shard.samples.reserve(static_cast<std::size_t>(samples_per_client));
    for (int jj = 0; jj < samples_per_client; ++jj)
      shard.samples.push_back(gaussian_class_sample(rng, means, draw_class(rng, proportions)));
  }

  const int test_n = test_set_size(n_clients, samples_per_client, 200, 2000);
  task.test_set.reserve(static_cast<std::size_t>(test_n));
  for (int jj = 0; jj < test_n; ++jj) {
    const int cls = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_classes)));
    task.test_set.push_back(gaussian_class_sample(rng, means, cls));
  }
  task.validate();
  return task;
}

FederatedTask gen_mlp_federation(int d, int hidden, int n_classes, int n_clients,
                                 int samples_per_client, double dirichlet_alpha,
                                 std::uint64_t seed) {
  FederatedTask task = gen_logistic_federation(d, n_classes, n_clients, samples_per_client,
                                               dirichlet_alpha, seed);
  task.model.kind = ModelKind::MLP1;
  task.model.hidden = hidden;
  task.validate();
  return task;
}

FederatedTask gen_sent140_shape_federation(int n_clients, int samples_per_client,
                                           int nnz_per_sample, std::uint64_t seed) {
  constexpr int kFeatureDim = 5000;
  constexpr int kClasses = 2;
  if (n_clients < 1 || samples_per_client < 1 || nnz_per_sample < 1 ||
      nnz_per_sample > kFeatureDim)
    throw std::invalid_argument("gen_sent140_shape_federation: invalid dims");
  FederatedTask task;
  task.model.kind = ModelKind::Logistic;
  task.model.feature_dim = kFeatureDim;
  task.model.n_classes = kClasses;

  Rng rng = Rng::keyed(seed, Stream::kTaskGen);
  // Hidden linear rule over the sparse features gives learnable labels.
  ParamVector rule(static_cast<std::size_t>(kFeatureDim));
  for (auto& r : rule) r = rng.normal();
  const double value = 1.0 / std::sqrt(static_cast<double>(nnz_per_sample));

  const auto draw_sample = [&]() {
    auto idx = rng.sample_without_replacement(kFeatureDim, nnz_per_sample);
    std::vector<std::int32_t> indices(idx.begin(), idx.end());
    std::vector<double> values(indices.size(), value);
    Sample s;
    s.features = FeatureVec::sparse(std::move(indices), std::move(values));
    const double score = s.features.dot(rule.data()) + 0.25 * rng.normal();
    s.label = score >= 0.0 ? 1.0 : 0.0;
    return s;
  };

  task.clients.resize(static_cast<std::size_t>(n_clients));
  for (int i = 0; i < n_clients; ++i) {
    auto& shard = task.clients[static_cast<std::size_t>(i)];
    shard.client_id = i;
    shard.samples.reserve(static_cast<std::size_t>(samples_per_client));
    for (int jj = 0; jj < samples_per_client; ++jj) shard.samples.push_back(draw_sample());
  }
  const int test_n = test_set_size(n_clients, samples_per_client, 100, 1000);
  task.test_set.reserve(static_cast<std::size_t>(test_n));
  for (int jj = 0; jj < test_n; ++jj) task.test_set.push_back(draw_sample());
  task.validate();
  return task;
}

}  // namespace fedsim
