// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "fedsim/tasks.hpp"

using namespace fedsim;
namespace fs = std::filesystem;

namespace {

ModelSpec ls_spec(int d) {
  ModelSpec spec;
  spec.kind = ModelKind::LeastSquares;
  spec.feature_dim = d;
  return spec;
}

ClientShard make_shard(int id, std::vector<Sample> samples) {
  ClientShard shard;
  shard.client_id = id;
  shard.samples = std::move(samples);
  return shard;
}

Sample dense_sample(double label, std::vector<double> features) {
  Sample s;
  s.label = label;
  s.features = FeatureVec::dense(std::move(features));
  return s;
}

// Cyclic Jacobi eigensolver for small symmetric matrices; independent check
// against the power-iteration path.
double jacobi_lambda_max(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  double lmax = a[0][0];
  for (std::size_t i = 1; i < n; ++i) lmax = std::max(lmax, a[i][i]);
  return lmax;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("tasks") {

TEST_CASE("least-squares single-sample gradient") {
  const ModelSpec spec = ls_spec(2);
  const ClientShard shard = make_shard(0, {dense_sample(1.0, {1.0, 0.0})});
  const ParamVector g = fullbatch_grad({3.0, 1.0}, spec, shard);
  // residual r = 3 - 1 = 2, gradient r * a
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("minibatch with B >= n equals the full batch bitwise") {
  const FederatedTask task =
      gen_least_squares_federation(4, 3, 6, {1.0, 0.5, 0.1}, 11);
  const ParamVector x(4, 0.25);
  for (const auto& shard : task.clients) {
    const ParamVector full = fullbatch_grad(x, task.model, shard);
    Rng rng(99);
    const ParamVector exact_b = minibatch_grad(x, task.model, shard, shard.n(), rng);
    Rng rng2(99);
    const ParamVector clamped = minibatch_grad(x, task.model, shard, 1000, rng2);
    for (std::size_t j = 0; j < x.size(); ++j) {
      CHECK(exact_b[j] == full[j]);
      CHECK(clamped[j] == full[j]);
    }
  }
}

TEST_CASE("minibatch gradient is unbiased for the full batch") {
  const FederatedTask task =
      gen_least_squares_federation(4, 1, 6, {0.0, 0.0, 0.3}, 12);
  const auto& shard = task.clients[0];
  ParamVector x(4);
  Rng init(5);
  for (auto& xi : x) xi = init.normal();
  const ParamVector full = fullbatch_grad(x, task.model, shard);

  const int draws = 20000;
  Rng rng(314159);
  ParamVector mean(4, 0.0), sq(4, 0.0);
  for (int t = 0; t < draws; ++t) {
    const ParamVector g = minibatch_grad(x, task.model, shard, 3, rng);
    for (int j = 0; j < 4; ++j) {
      mean[j] += g[j];
      sq[j] += g[j] * g[j];
    }
  }
  for (int j = 0; j < 4; ++j) {
    mean[j] /= draws;
    const double var = sq[j] / draws - mean[j] * mean[j];
    const double tol = 4.0 * std::sqrt(std::max(var, 0.0) / draws) + 1e-12;
    CHECK(std::abs(mean[j] - full[j]) <= tol);
  }
}

TEST_CASE("inter-client gradient variance matches the closed form at x = 0") {
  // g_i(0) = -(1/n) sum_j a_j b_j concentrates on -c_i; the variance across
  // clients decomposes into realized center scatter plus per-client
  // estimation noise ((d+1)||c_i||^2 + sigma^2 d)/n, up to sampling error.
  const int d = 10, clients = 20, n = 50;
  const double sigma = 0.1;
  LeastSquaresInfo info;
  const FederatedTask task =
      gen_least_squares_federation(d, clients, n, {0.0, 1.0, sigma}, 2025, &info);

  const ParamVector x(d, 0.0);
  std::vector<ParamVector> grads;
  ParamVector mean_g(d, 0.0);
  for (const auto& shard : task.clients) {
    grads.push_back(fullbatch_grad(x, task.model, shard));
    vec::add_inplace(mean_g, grads.back());
  }
  vec::scale_inplace(mean_g, 1.0 / clients);
  double measured = 0.0;
  for (const auto& g : grads) measured += vec::norm2_sq(vec::sub(g, mean_g));
  measured /= clients;

  ParamVector c_bar(d, 0.0);
  for (const auto& c : info.client_centers) vec::add_inplace(c_bar, c);
  vec::scale_inplace(c_bar, 1.0 / clients);
  double scatter = 0.0, noise = 0.0;
  for (const auto& c : info.client_centers) {
    scatter += vec::norm2_sq(vec::sub(c, c_bar));
    noise += ((d + 1) * vec::norm2_sq(c) + sigma * sigma * d) / n;
  }
  const double analytic = scatter / clients + (1.0 - 1.0 / clients) * noise / clients;
  CHECK(measured == doctest::Approx(analytic).epsilon(0.20));
}

TEST_CASE("dirichlet alpha controls label skew") {
  const int classes = 5, clients = 40, n = 200;
  // Multinomial noise alone gives TV of roughly 2.5/sqrt(n_unif) per client,
  // so the near-uniform half needs enough samples to sit under the threshold.
  const int n_unif = 2000;
  const FederatedTask uniform_task =
      gen_logistic_federation(6, classes, clients, n_unif, 1e6, 808);
  const FederatedTask skew_task =
      gen_logistic_federation(6, classes, clients, n, 0.1, 808);

  for (const auto& shard : uniform_task.clients) {
    std::vector<double> prop(classes, 0.0);
    for (const auto& s : shard.samples) prop[static_cast<int>(s.label)] += 1.0 / n_unif;
    double tv = 0.0;
    for (double p : prop) tv += std::abs(p - 1.0 / classes);
    CHECK(tv / 2.0 <= 0.05);
  }

  int skewed = 0;
  for (const auto& shard : skew_task.clients) {
    std::vector<double> prop(classes, 0.0);
    for (const auto& s : shard.samples) prop[static_cast<int>(s.label)] += 1.0 / n;
    std::sort(prop.begin(), prop.end(), std::greater<>());
    if (prop[0] + prop[1] >= 0.8) ++skewed;
  }
  CHECK(skewed >= clients / 2);
}

TEST_CASE("separable logistic task is driven below loss 0.01 by gradient descent") {
  ModelSpec spec;
  spec.kind = ModelKind::Logistic;
  spec.feature_dim = 2;
  spec.n_classes = 2;
  FederatedTask task;
  task.model = spec;
  std::vector<Sample> samples;
  for (int i = 0; i < 20; ++i) {
    samples.push_back(dense_sample(0.0, {-2.0, 0.3 * (i % 5)}));
    samples.push_back(dense_sample(1.0, {2.0, -0.3 * (i % 5)}));
  }
  task.clients.push_back(make_shard(0, samples));
  task.test_set = samples;

  ParamVector x = init_model(spec, 0);
  for (int t = 0; t < 3000; ++t) {
    const ParamVector g = global_gradient(x, task);
    vec::axpy(x, -0.5, g);
  }
  CHECK(train_loss(x, task) < 0.01);
  CHECK(eval_model(x, spec, task.test_set).accuracy == 1.0);
}

TEST_CASE("mlp gradient at zero weights touches only the output bias") {
  ModelSpec spec;
  spec.kind = ModelKind::MLP1;
  spec.feature_dim = 4;
  spec.n_classes = 3;
  spec.hidden = 5;
  const ClientShard shard =
      make_shard(0, {dense_sample(1.0, {0.4, -0.2, 0.9, 0.1}),
                     dense_sample(2.0, {-0.5, 0.8, 0.0, 0.3})});
  const ParamVector x(static_cast<std::size_t>(spec.model_dim()), 0.0);
  const ParamVector g = fullbatch_grad(x, spec, shard);
  const int b2_off = spec.hidden * spec.feature_dim + spec.hidden +
                     spec.n_classes * spec.hidden;
  for (int j = 0; j < b2_off; ++j) CHECK(g[static_cast<std::size_t>(j)] == 0.0);
  double b2_norm = 0.0;
  for (int j = b2_off; j < spec.model_dim(); ++j)
    b2_norm += std::abs(g[static_cast<std::size_t>(j)]);
  CHECK(b2_norm > 0.1);
}

TEST_CASE("one-unit mlp gradient matches the hand chain rule") {
  ModelSpec spec;
  spec.kind = ModelKind::MLP1;
  spec.feature_dim = 1;
  spec.n_classes = 2;
  spec.hidden = 1;
  // layout [w1, b1, w2_0, w2_1, b2_0, b2_1]
  const ParamVector x = {0.7, -0.2, 1.1, -0.4, 0.05, -0.3};
  const double a0 = 0.9;
  const int y = 1;
  const ClientShard shard = make_shard(0, {dense_sample(y, {a0})});
  const ParamVector g = fullbatch_grad(x, spec, shard);

  const double h = std::tanh(x[0] * a0 + x[1]);
  const double z0 = x[2] * h + x[4];
  const double z1 = x[3] * h + x[5];
  const double zmax = std::max(z0, z1);
  const double lse = zmax + std::log(std::exp(z0 - zmax) + std::exp(z1 - zmax));
  const double p0 = std::exp(z0 - lse), p1 = std::exp(z1 - lse);
  const double dz0 = p0 - (y == 0 ? 1.0 : 0.0);
  const double dz1 = p1 - (y == 1 ? 1.0 : 0.0);
  const double dh = dz0 * x[2] + dz1 * x[3];
  const double dpre = dh * (1.0 - h * h);
  const ParamVector expect = {dpre * a0, dpre, dz0 * h, dz1 * h, dz0, dz1};
  for (int j = 0; j < 6; ++j) CHECK(std::abs(g[j] - expect[j]) <= 1e-12);
}

TEST_CASE("full-batch gradients agree with central finite differences") {
  const auto check_task = [](const FederatedTask& task, ParamVector x) {
    const auto& shard = task.clients[0];
    const ParamVector g = fullbatch_grad(x, task.model, shard);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      ParamVector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (mean_loss(xp, task.model, shard.samples) -
                         mean_loss(xm, task.model, shard.samples)) /
                        (2.0 * h);
      CHECK(std::abs(g[j] - fd) <= 1e-6 * std::max(1.0, std::abs(g[j])));
    }
  };

  {
    const FederatedTask t = gen_least_squares_federation(5, 2, 8, {0.5, 0.4, 0.2}, 31);
    ParamVector x(5);
    Rng rng(1);
    for (auto& xi : x) xi = rng.normal();
    check_task(t, x);
  }
  {
    const FederatedTask t = gen_logistic_federation(4, 3, 2, 10, 1.0, 32);
    ParamVector x(static_cast<std::size_t>(t.model.model_dim()));
    Rng rng(2);
    for (auto& xi : x) xi = 0.5 * rng.normal();
    check_task(t, x);
  }
  {
    const FederatedTask t = gen_mlp_federation(4, 3, 3, 2, 10, 1.0, 33);
    ParamVector x(static_cast<std::size_t>(t.model.model_dim()));
    Rng rng(3);
    for (auto& xi : x) xi = 0.5 * rng.normal();
    check_task(t, x);
  }
}

TEST_CASE("zero model predicts class 0, matching the base rate exactly") {
  const FederatedTask task = gen_logistic_federation(5, 4, 10, 30, 1.0, 88);
  const ParamVector x(static_cast<std::size_t>(task.model.model_dim()), 0.0);
  const EvalResult ev = eval_model(x, task.model, task.test_set);
  double zero_frac = 0.0;
  for (const auto& s : task.test_set)
    if (s.label == 0.0) zero_frac += 1.0;
  zero_frac /= static_cast<double>(task.test_set.size());
  CHECK(ev.accuracy == zero_frac);
  // uniform softmax: loss is exactly log C
  CHECK(ev.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("losses are nonnegative everywhere") {
  Rng rng(404);
  const FederatedTask logi = gen_logistic_federation(3, 3, 2, 5, 1.0, 41);
  const FederatedTask mlp = gen_mlp_federation(3, 2, 3, 2, 5, 1.0, 42);
  const FederatedTask ls = gen_least_squares_federation(3, 2, 5, {1.0, 2.0, 0.5}, 43);
  for (int trial = 0; trial < 200; ++trial) {
    for (const FederatedTask* task : {&logi, &mlp, &ls}) {
      ParamVector x(static_cast<std::size_t>(task->model.model_dim()));
      for (auto& xi : x) xi = 3.0 * rng.normal();
      for (const auto& s : task->clients[0].samples)
        CHECK(sample_loss(x, task->model, s) >= 0.0);
    }
  }
}

TEST_CASE("hessian top eigenvalue bounds least-squares gradient differences") {
  const FederatedTask task = gen_least_squares_federation(8, 6, 15, {1.0, 0.5, 0.1}, 70);
  double L = 0.0;
  for (const auto& shard : task.clients)
    L = std::max(L, client_hessian_lambda_max(shard, 8));
  Rng rng(71);
  for (int trial = 0; trial < 1000; ++trial) {
    ParamVector x(8), y(8);
    for (auto& v : x) v = 2.0 * rng.normal();
    for (auto& v : y) v = 2.0 * rng.normal();
    const double dist = vec::norm2(vec::sub(x, y));
    for (const auto& shard : task.clients) {
      const ParamVector gx = fullbatch_grad(x, task.model, shard);
      const ParamVector gy = fullbatch_grad(y, task.model, shard);
      CHECK(vec::norm2(vec::sub(gx, gy)) <= L * dist * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("power iteration agrees with a dense jacobi eigensolver") {
  const int d = 4, n = 12;
  Rng rng(515);
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    std::vector<double> a(d);
    for (auto& aj : a) aj = rng.normal();
    samples.push_back(dense_sample(0.0, std::move(a)));
  }
  const ClientShard shard = make_shard(0, samples);

  std::vector<std::vector<double>> h(d, std::vector<double>(d, 0.0));
  for (const auto& s : samples) {
    const auto& a = s.features.dense_values();
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) h[p][q] += a[p] * a[q] / n;
  }
  const double reference = jacobi_lambda_max(h);
  CHECK(client_hessian_lambda_max(shard, d) == doctest::Approx(reference).epsilon(1e-8));
}

TEST_CASE("sparse feature vectors validate their index lists") {
  CHECK_THROWS_AS(FeatureVec::sparse({3, 1}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(FeatureVec::sparse({1, 1}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(FeatureVec::sparse({-1}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FeatureVec::sparse({0, 2}, {1.0}), std::invalid_argument);
  const FeatureVec f = FeatureVec::sparse({0, 2, 5}, {1.0, -2.0, 0.5});
  CHECK(f.min_feature_dim() == 6);
  const double w[6] = {1.0, 10.0, 2.0, 10.0, 10.0, 4.0};
  CHECK(f.dot(w) == doctest::Approx(1.0 - 4.0 + 2.0).epsilon(1e-15));
  CHECK(FeatureVec::dense({1.0, 2.0}).min_feature_dim() == 2);
}

TEST_CASE("task validation rejects oversized feature indices") {
  FederatedTask task;
  task.model.kind = ModelKind::LeastSquares;
  task.model.feature_dim = 3;
  Sample s;
  s.label = 0.0;
  s.features = FeatureVec::sparse({5}, {1.0});
  task.clients.push_back(make_shard(0, {s}));
  CHECK_THROWS_AS(task.validate(), std::invalid_argument);
}

TEST_CASE("init_model is zero for convex kinds and seeded gaussian for mlp1") {
  const ModelSpec logi = [] {
    ModelSpec s;
    s.kind = ModelKind::Logistic;
    s.feature_dim = 4;
    s.n_classes = 3;
    return s;
  }();
  for (double v : init_model(logi, 9)) CHECK(v == 0.0);
  for (double v : init_model(ls_spec(6), 9)) CHECK(v == 0.0);

  ModelSpec mlp;
  mlp.kind = ModelKind::MLP1;
  mlp.feature_dim = 4;
  mlp.n_classes = 3;
  mlp.hidden = 5;
  const ParamVector a = init_model(mlp, 9);
  const ParamVector b = init_model(mlp, 9);
  const ParamVector c = init_model(mlp, 10);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(vec::norm2(a) > 0.0);
  // bias segments stay zero
  const int b1_off = mlp.hidden * mlp.feature_dim;
  for (int j = 0; j < mlp.hidden; ++j) CHECK(a[static_cast<std::size_t>(b1_off + j)] == 0.0);
  const int b2_off = b1_off + mlp.hidden + mlp.n_classes * mlp.hidden;
  for (int j = 0; j < mlp.n_classes; ++j) CHECK(a[static_cast<std::size_t>(b2_off + j)] == 0.0);
}

TEST_CASE("model dims and forward costs follow the layouts") {
  CHECK(ls_spec(7).model_dim() == 7);
  CHECK(ls_spec(7).fwd_flops() == 7);
  ModelSpec logi;
  logi.kind = ModelKind::Logistic;
  logi.feature_dim = 5000;
  logi.n_classes = 2;
  CHECK(logi.model_dim() == 10002);
  CHECK(logi.fwd_flops() == 10000);
  ModelSpec mlp;
  mlp.kind = ModelKind::MLP1;
  mlp.feature_dim = 64;
  mlp.hidden = 32;
  mlp.n_classes = 10;
  CHECK(mlp.model_dim() == 64 * 32 + 32 + 10 * 32 + 10);
  CHECK(mlp.fwd_flops() == 64 * 32 + 32 * 10);
}

TEST_CASE("generators are deterministic in the seed") {
  const FederatedTask a = gen_logistic_federation(5, 3, 4, 12, 0.5, 900);
  const FederatedTask b = gen_logistic_federation(5, 3, 4, 12, 0.5, 900);
  const FederatedTask c = gen_logistic_federation(5, 3, 4, 12, 0.5, 901);
  REQUIRE(a.clients.size() == b.clients.size());
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.clients.size(); ++i)
    for (int j = 0; j < a.clients[i].n(); ++j) {
      const auto& sa = a.clients[i].samples[static_cast<std::size_t>(j)];
      const auto& sb = b.clients[i].samples[static_cast<std::size_t>(j)];
      const auto& sc = c.clients[i].samples[static_cast<std::size_t>(j)];
      same = same && sa.label == sb.label && sa.features == sb.features;
      differs = differs || sa.label != sc.label || !(sa.features == sc.features);
    }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("sent140-shape task has the published parameter count") {
  const FederatedTask t = gen_sent140_shape_federation(4, 10, 25, 77);
  CHECK(t.model.model_dim() == 10002);
  for (const auto& shard : t.clients)
    for (const auto& s : shard.samples) {
      CHECK(s.features.is_sparse());
      CHECK(s.features.sparse_indices().size() == 25);
    }
}

TEST_CASE("client directory io round-trips bitwise") {
  for (int variant = 0; variant < 2; ++variant) {
    const FederatedTask task =
        variant == 0 ? gen_least_squares_federation(6, 5, 9, {0.7, 0.3, 0.2}, 1001)
                     : gen_sent140_shape_federation(3, 7, 10, 1002);
    const fs::path dir = fresh_dir("fedsim_test_io_" + std::to_string(variant));
    save_client_dir(task, dir.string());
    const FederatedTask loaded = load_client_dir(dir.string());

    CHECK(loaded.model.kind == task.model.kind);
    CHECK(loaded.model.model_dim() == task.model.model_dim());
    REQUIRE(loaded.clients.size() == task.clients.size());
    for (std::size_t i = 0; i < task.clients.size(); ++i) {
      CHECK(loaded.clients[i].client_id == task.clients[i].client_id);
      REQUIRE(loaded.clients[i].n() == task.clients[i].n());
      for (int j = 0; j < task.clients[i].n(); ++j) {
        const auto& orig = task.clients[i].samples[static_cast<std::size_t>(j)];
        const auto& got = loaded.clients[i].samples[static_cast<std::size_t>(j)];
        CHECK(got.label == orig.label);
        CHECK(got.features == orig.features);
      }
    }
    REQUIRE(loaded.test_set.size() == task.test_set.size());
    for (std::size_t j = 0; j < task.test_set.size(); ++j) {
      CHECK(loaded.test_set[j].label == task.test_set[j].label);
      CHECK(loaded.test_set[j].features == task.test_set[j].features);
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("loader reports missing, empty, and malformed inputs by name") {
  const FederatedTask task = gen_least_squares_federation(4, 8, 5, {0.2, 0.1, 0.1}, 1100);
  const fs::path dir = fresh_dir("fedsim_test_io_errors");
  save_client_dir(task, dir.string());

  fs::remove(dir / "client_1.csv");
  CHECK_THROWS_WITH_AS(load_client_dir(dir.string()),
                       doctest::Contains("missing data file for client 1"), std::runtime_error);
  {
    std::ofstream restore(dir / "client_1.csv", std::ios::binary);
    for (const auto& s : task.clients[1].samples) {
      restore << s.label;
      for (double f : s.features.dense_values()) restore << ',' << f;
      restore << '\n';
    }
  }

  { std::ofstream truncate(dir / "client_7.csv", std::ios::binary); }
  CHECK_THROWS_WITH_AS(load_client_dir(dir.string()),
                       doctest::Contains("client 7 has zero samples"), std::runtime_error);

  {
    std::ofstream bad(dir / "manifest.json", std::ios::binary);
    bad << "{not json";
  }
  CHECK_THROWS_WITH_AS(load_client_dir(dir.string()),
                       doctest::Contains("malformed manifest"), std::runtime_error);
  fs::remove_all(dir);
}

}  // TEST_SUITE
