// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// fedsim: deterministic federated-learning simulator and verification
// harness. Subcommands: run, sweep, flops, verify, gen.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedsim/accounting.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/tasks.hpp"
#include "fedsim/verify.hpp"

namespace {

struct FlopsRow {
  fedsim::Algorithm algorithm;
  fedsim::OptimKind optimiser;
};

// Rows in published-table order; MFL and Mimelite have no SGD variant.
std::vector<FlopsRow> flops_rows() {
  using A = fedsim::Algorithm;
  using O = fedsim::OptimKind;
  return {
      {A::FedAvg, O::SGD},          {A::AdaptiveFedOpt, O::SGD}, {A::FedGBO, O::SGD},
      {A::FedGBO, O::RMSProp},      {A::FedGBO, O::SGDm},        {A::FedGBO, O::Adam},
      {A::MFL, O::RMSProp},         {A::MFL, O::SGDm},           {A::MFL, O::Adam},
      {A::Mimelite, O::RMSProp},    {A::Mimelite, O::SGDm},      {A::Mimelite, O::Adam},
  };
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const fedsim::ExperimentConfig cfg = fedsim::load_config(config_path);
  const fedsim::ExperimentResult result = fedsim::run_experiment(cfg, out_dir);
  for (const fedsim::SeedOutcome& s : result.seeds) {
    if (!s.failure.empty()) {
      std::cout << "seed " << s.seed << ": FAILED at round " << s.diverged_round << " ("
                << s.failure << ")\n";
    } else if (!s.records.empty()) {
      const fedsim::MetricRecord& last = s.records.back();
      std::cout << "seed " << s.seed << ": round " << last.round << " train_loss "
                << last.train_loss << " test_accuracy " << last.test_accuracy << "\n";
    }
  }
  if (result.final_mean_accuracy) {
    std::cout << "final mean test accuracy: " << *result.final_mean_accuracy << "\n";
  }
  std::cout << "metrics written to " << result.out_dir << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_dir) {
  const fedsim::ExperimentConfig base = fedsim::load_config(config_path);
  const fedsim::SweepGrid grid = fedsim::parse_grid_file(grid_path);
  const fedsim::SweepResult result = fedsim::run_sweep(base, grid, out_dir);
  for (const fedsim::SweepCell& cell : result.cells) {
    std::cout << "cell " << cell.index << ":";
    for (const auto& [key, value] : cell.overrides) std::cout << " " << key << "=" << value;
    if (cell.failed) {
      std::cout << " FAILED\n";
    } else {
      std::cout << " accuracy "
                << (cell.final_mean_accuracy ? std::to_string(*cell.final_mean_accuracy) : "n/a")
                << "\n";
    }
  }
  if (result.winner) {
    std::cout << "winner: cell " << *result.winner << "\n";
  } else {
    std::cout << "winner: none (all cells failed)\n";
  }
  return 0;
}

int cmd_flops(long long fwd, long long params, int batch, double n_mean,
              const std::vector<int>& ks, const std::string& csv_path) {
  std::vector<std::string> lines;
  lines.push_back("algorithm,optimiser,K,flops,down_floats,up_floats");
  for (int k : ks) {
    for (const FlopsRow& row : flops_rows()) {
      fedsim::CostInputs in;
      in.algorithm = row.algorithm;
      in.optimiser = row.optimiser;
      in.k_steps = k;
      in.batch_size = batch;
      in.fwd = fwd;
      in.model_params = params;
      in.n_mean = n_mean;
      const long long flops = fedsim::flops_per_round(in);
      const fedsim::CommCost comm =
          fedsim::comm_per_round(row.algorithm, row.optimiser, params);
      lines.push_back(fedsim::to_string(row.algorithm) + "," +
                      fedsim::to_string(row.optimiser) + "," + std::to_string(k) + "," +
                      std::to_string(flops) + "," + std::to_string(comm.download_floats) + "," +
                      std::to_string(comm.upload_floats));
    }
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << csv_path << "\n";
      return 2;
    }
    for (const std::string& line : lines) out << line << "\n";
    std::cout << "wrote " << csv_path << "\n";
    return 0;
  }

  std::printf("%-15s %-10s %4s %14s %12s %12s\n", "algorithm", "optimiser", "K", "flops",
              "down_floats", "up_floats");
  for (int k : ks) {
    for (const FlopsRow& row : flops_rows()) {
      fedsim::CostInputs in;
      in.algorithm = row.algorithm;
      in.optimiser = row.optimiser;
      in.k_steps = k;
      in.batch_size = batch;
      in.fwd = fwd;
      in.model_params = params;
      in.n_mean = n_mean;
      const fedsim::CommCost comm =
          fedsim::comm_per_round(row.algorithm, row.optimiser, params);
      std::printf("%-15s %-10s %4d %14lld %12lld %12lld\n",
                  fedsim::to_string(row.algorithm).c_str(),
                  fedsim::to_string(row.optimiser).c_str(), k, fedsim::flops_per_round(in),
                  comm.download_floats, comm.upload_floats);
    }
  }
  return 0;
}

int cmd_verify(const std::string& suite) {
  const std::vector<fedsim::SuiteReport> reports = fedsim::run_verify(suite);
  std::cout << fedsim::report_to_json(reports);
  for (const fedsim::SuiteReport& rep : reports) {
    if (!rep.pass) return 1;
  }
  return 0;
}

int cmd_gen(const std::string& task, const std::string& out_dir, int dim, int n_clients,
            int samples_per_client, int n_classes, int hidden, int nnz, double alpha,
            double spread, double noise, std::uint64_t seed) {
  fedsim::ExperimentConfig cfg;
  cfg.task = task;
  cfg.dim = dim;
  cfg.n_clients = n_clients;
  cfg.samples_per_client = samples_per_client;
  cfg.n_classes = n_classes;
  cfg.hidden = hidden;
  cfg.nnz_per_sample = nnz;
  cfg.dirichlet_alpha = alpha;
  cfg.center_spread = spread;
  cfg.noise_sigma = noise;
  cfg.task_seed = seed;
  const fedsim::FederatedTask t = fedsim::build_task(cfg);
  fedsim::save_client_dir(t, out_dir);
  std::cout << "wrote " << t.n_clients() << " client shards (" << fedsim::to_string(t.model.kind)
            << ", model dim " << t.model.model_dim() << ") to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedsim: deterministic federated-learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grid_path;
  std::string out_dir;
  std::string suite = "all";
  std::string csv_path;
  std::string gen_task = "least_squares";
  long long fwd = 10000;
  long long params = 10002;
  int batch = 8;
  double n_mean = 15.0;
  std::vector<int> ks = {10, 50};
  int dim = 10;
  int n_clients = 10;
  int samples_per_client = 20;
  int n_classes = 2;
  int hidden = 8;
  int nnz = 25;
  double alpha = 1.0;
  double spread = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 1234;

  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over hyperparameters");
  sweep->add_option("--config", config_path, "base config file path")->required();
  sweep->add_option("--grid", grid_path, "grid file path")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI::App* flops = app.add_subcommand("flops", "per-client cost table");
  flops->add_option("--fwd", fwd, "forward-pass FLOPs per sample (default 10000)");
  flops->add_option("--params", params, "model parameter count (default 10002)");
  flops->add_option("--batch", batch, "minibatch size (default 8)");
  flops->add_option("--n-mean", n_mean, "mean samples per client (default 15)");
  flops->add_option("--k", ks, "local step counts (default 10 50)");
  flops->add_option("--csv", csv_path, "write CSV to this path instead of a table");

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--suite", suite,
                     "suite name, 'bounds' (perturbation+lemma1), or 'all' (default)");

  CLI::App* gen = app.add_subcommand("gen", "synthesise a dataset directory");
  gen->add_option("--task", gen_task,
                  "least_squares | logistic | mlp1 | sent140_shape (default least_squares)");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--dim", dim, "feature dimension (default 10)");
  gen->add_option("--n-clients", n_clients, "number of clients (default 10)");
  gen->add_option("--samples-per-client", samples_per_client, "samples per client (default 20)");
  gen->add_option("--n-classes", n_classes, "classes, classification tasks (default 2)");
  gen->add_option("--hidden", hidden, "hidden width, mlp1 (default 8)");
  gen->add_option("--nnz", nnz, "nonzeros per sample, sent140_shape (default 25)");
  gen->add_option("--alpha", alpha, "Dirichlet label-skew concentration (default 1.0)");
  gen->add_option("--spread", spread, "client optimum spread, least_squares (default 0)");
  gen->add_option("--noise", noise, "label noise sigma (default 0)");
  gen->add_option("--seed", seed, "generator seed (default 1234)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, grid_path, out_dir);
    if (flops->parsed()) return cmd_flops(fwd, params, batch, n_mean, ks, csv_path);
    if (verify->parsed()) return cmd_verify(suite);
    if (gen->parsed())
      return cmd_gen(gen_task, out_dir, dim, n_clients, samples_per_client, n_classes, hidden,
                     nnz, alpha, spread, noise, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
