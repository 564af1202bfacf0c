// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "fedsim/accounting.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

CostInputs published_shape(Algorithm alg, OptimKind opt, int k) {
  CostInputs in;
  in.algorithm = alg;
  in.optimiser = opt;
  in.k_steps = k;
  in.batch_size = 8;
  in.fwd = 10000;
  in.model_params = 10002;
  in.n_mean = 15.0;
  return in;
}

}  // namespace

TEST_SUITE("accounting") {

TEST_CASE("published-shape integer cell values") {
  CHECK(flops_per_round(published_shape(Algorithm::FedAvg, OptimKind::SGD, 10)) == 2600040);
  CHECK(flops_per_round(published_shape(Algorithm::AdaptiveFedOpt, OptimKind::Adam, 10)) ==
        2600040);
  CHECK(flops_per_round(published_shape(Algorithm::FedGBO, OptimKind::SGDm, 10)) == 2900100);
  CHECK(flops_per_round(published_shape(Algorithm::FedGBO, OptimKind::Adam, 10)) == 3200160);
  CHECK(flops_per_round(published_shape(Algorithm::Mimelite, OptimKind::RMSProp, 10)) == 3350100);
  CHECK(flops_per_round(published_shape(Algorithm::MFL, OptimKind::Adam, 10)) == 3500220);
  CHECK(round_3sig(3350100 / 1e8) == 0.0335);
}

TEST_CASE("per-parameter op counts") {
  CHECK(OpCountTable::c_fixed(OptimKind::SGD) == 2);
  CHECK(OpCountTable::c_fixed(OptimKind::RMSProp) == 5);
  CHECK(OpCountTable::c_fixed(OptimKind::SGDm) == 5);
  CHECK(OpCountTable::c_fixed(OptimKind::Adam) == 8);
  CHECK(OpCountTable::c_moving(OptimKind::RMSProp) == 5);
  CHECK(OpCountTable::c_moving(OptimKind::SGDm) == 8);
  CHECK(OpCountTable::c_moving(OptimKind::Adam) == 11);
}

TEST_CASE("five-fold local work scales all non-mimelite cells exactly") {
  Rng rng(2100);
  const Algorithm algs[] = {Algorithm::FedAvg, Algorithm::AdaptiveFedOpt, Algorithm::FedGBO,
                            Algorithm::MFL};
  const OptimKind kinds[] = {OptimKind::SGD, OptimKind::RMSProp, OptimKind::SGDm,
                             OptimKind::Adam};
  for (int trial = 0; trial < 200; ++trial) {
    CostInputs in;
    in.algorithm = algs[rng.below(4)];
    in.optimiser = kinds[rng.below(4)];
    if ((in.algorithm == Algorithm::MFL) && in.optimiser == OptimKind::SGD)
      in.optimiser = OptimKind::SGDm;
    in.k_steps = 1 + static_cast<int>(rng.below(40));
    in.batch_size = 1 + static_cast<int>(rng.below(64));
    in.fwd = 1 + static_cast<long long>(rng.below(100000));
    in.model_params = 1 + static_cast<long long>(rng.below(100000));
    in.n_mean = 1.0 + static_cast<double>(rng.below(500));
    const long long base = flops_per_round(in);
    CostInputs in5 = in;
    in5.k_steps = 5 * in.k_steps;
    CHECK(flops_per_round(in5) == 5 * base);
  }
}

TEST_CASE("mimelite full-batch surcharge is K-independent") {
  for (OptimKind opt : {OptimKind::RMSProp, OptimKind::SGDm, OptimKind::Adam}) {
    const long long f10 = flops_per_round(published_shape(Algorithm::Mimelite, opt, 10));
    const long long f50 = flops_per_round(published_shape(Algorithm::Mimelite, opt, 50));
    const long long per_k =
        8LL * 3 * 10000 + static_cast<long long>(OpCountTable::c_fixed(opt)) * 10002;
    CHECK(f50 - f10 == 40 * per_k);
    const long long gbo = flops_per_round(published_shape(Algorithm::FedGBO, opt, 10));
    CHECK(f10 - gbo == std::llround(15.0 * 3 * 10000));
  }
}

TEST_CASE("mfl pays the moving-statistics premium over fedgbo") {
  for (OptimKind opt : {OptimKind::RMSProp, OptimKind::SGDm, OptimKind::Adam}) {
    for (int k : {10, 50}) {
      const long long mfl = flops_per_round(published_shape(Algorithm::MFL, opt, k));
      const long long gbo = flops_per_round(published_shape(Algorithm::FedGBO, opt, k));
      const long long expect = static_cast<long long>(k) *
                               (OpCountTable::c_moving(opt) - OpCountTable::c_fixed(opt)) * 10002;
      CHECK(mfl - gbo == expect);
    }
  }
}

TEST_CASE("flops are strictly monotone in every size input") {
  const CostInputs base = published_shape(Algorithm::FedGBO, OptimKind::Adam, 10);
  const long long f = flops_per_round(base);
  CostInputs k = base;
  k.k_steps += 1;
  CHECK(flops_per_round(k) > f);
  CostInputs b = base;
  b.batch_size += 1;
  CHECK(flops_per_round(b) > f);
  CostInputs fw = base;
  fw.fwd += 1;
  CHECK(flops_per_round(fw) > f);
  CostInputs p = base;
  p.model_params += 1;
  CHECK(flops_per_round(p) > f);
}

TEST_CASE("mfl and mimelite reject plain sgd") {
  CHECK_THROWS_WITH_AS(flops_per_round(published_shape(Algorithm::MFL, OptimKind::SGD, 10)),
                       doctest::Contains("requires an adaptive optimiser"), std::invalid_argument);
  CHECK_THROWS_AS(flops_per_round(published_shape(Algorithm::Mimelite, OptimKind::SGD, 10)),
                  std::invalid_argument);
}

TEST_CASE("flops input validation") {
  CostInputs in = published_shape(Algorithm::FedAvg, OptimKind::SGD, 10);
  in.k_steps = 0;
  CHECK_THROWS_AS(flops_per_round(in), std::invalid_argument);
  in = published_shape(Algorithm::FedAvg, OptimKind::SGD, 10);
  in.fwd = 0;
  CHECK_THROWS_AS(flops_per_round(in), std::invalid_argument);
  in = published_shape(Algorithm::Mimelite, OptimKind::Adam, 10);
  in.n_mean = 0.0;
  CHECK_THROWS_AS(flops_per_round(in), std::invalid_argument);
}

TEST_CASE("communication table, all algorithm and optimiser pairs") {
  const auto state_floats = [](OptimKind opt, long long p) -> long long {
    switch (opt) {
      case OptimKind::SGD: return 0;
      case OptimKind::RMSProp:
      case OptimKind::SGDm: return p;
      case OptimKind::Adam: return 2 * p;
    }
    return -1;
  };
  for (long long p : {10002LL, 7LL}) {
    for (OptimKind opt :
         {OptimKind::SGD, OptimKind::RMSProp, OptimKind::SGDm, OptimKind::Adam}) {
      const long long s = state_floats(opt, p);
      const CommCost fedavg = comm_per_round(Algorithm::FedAvg, opt, p);
      CHECK(fedavg.download_floats == p);
      CHECK(fedavg.upload_floats == p);
      const CommCost adfo = comm_per_round(Algorithm::AdaptiveFedOpt, opt, p);
      CHECK(adfo.download_floats == p);
      CHECK(adfo.upload_floats == p);
      const CommCost gbo = comm_per_round(Algorithm::FedGBO, opt, p);
      CHECK(gbo.download_floats == p + s);
      CHECK(gbo.upload_floats == p);
      const CommCost mfl = comm_per_round(Algorithm::MFL, opt, p);
      CHECK(mfl.download_floats == p + s);
      CHECK(mfl.upload_floats == p + s);
      const CommCost mime = comm_per_round(Algorithm::Mimelite, opt, p);
      CHECK(mime.download_floats == p + s);
      CHECK(mime.upload_floats == 2 * p);
    }
  }
  CHECK(comm_per_round(Algorithm::MFL, OptimKind::SGDm, 10002).download_floats == 2 * 10002);
  CHECK(comm_per_round(Algorithm::FedGBO, OptimKind::Adam, 10002).download_floats == 3 * 10002);
  CHECK_THROWS_AS(comm_per_round(Algorithm::FedAvg, OptimKind::SGD, 0), std::invalid_argument);
}

TEST_CASE("linear layer forward cost is one mac per weight") {
  CHECK(linear_fwd_flops(1, 1) == 1);
  CHECK(linear_fwd_flops(5000, 2) == 10000);
  CHECK_THROWS_AS(linear_fwd_flops(0, 5), std::invalid_argument);
}

TEST_CASE("three-significant-figure rounding follows decimal semantics") {
  CHECK(round_3sig(0.0335001) == 0.0335);
  CHECK(round_3sig(0.149505) == 0.150);
  CHECK(round_3sig(0.0260004) == 0.026);
  CHECK(round_3sig(123456.0) == 123000.0);
  CHECK(round_3sig(-0.0335001) == -0.0335);
  CHECK(round_3sig(0.0) == 0.0);
}

TEST_CASE("algorithm name round trip") {
  for (Algorithm a : {Algorithm::FedGBO, Algorithm::FedAvg, Algorithm::MFL, Algorithm::Mimelite,
                      Algorithm::AdaptiveFedOpt})
    CHECK(algorithm_from_string(to_string(a)) == a);
  CHECK_THROWS_AS(algorithm_from_string("fedprox"), std::invalid_argument);
}

}  // TEST_SUITE
