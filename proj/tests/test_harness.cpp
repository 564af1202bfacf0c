// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fedsim/accounting.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/tasks.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fedsim;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fedsim_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::stringstream ss(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

// Small healthy least-squares federation; accuracy is identically zero for
// this model kind, which the tie-break tests rely on.
ExperimentConfig small_ls_config() {
  ExperimentConfig cfg;
  cfg.task = "least_squares";
  cfg.dim = 4;
  cfg.n_clients = 3;
  cfg.samples_per_client = 6;
  cfg.center_spread = 0.5;
  cfg.noise_sigma = 0.05;
  cfg.task_seed = 99;
  cfg.algorithm = Algorithm::FedGBO;
  cfg.optimiser = OptimKind::SGDm;
  cfg.eta = 0.05;
  cfg.beta = 0.5;
  cfg.k_steps = 4;
  cfg.batch_size = 3;
  cfg.clients_per_round = 2;
  cfg.rounds = 8;
  cfg.eval_every = 2;
  cfg.seeds = {3, 4};
  return cfg;
}

ExperimentConfig small_logistic_config() {
  ExperimentConfig cfg;
  cfg.task = "logistic";
  cfg.dim = 4;
  cfg.n_classes = 3;
  cfg.n_clients = 6;
  cfg.samples_per_client = 8;
  cfg.dirichlet_alpha = 0.5;
  cfg.task_seed = 42;
  cfg.algorithm = Algorithm::FedAvg;
  cfg.optimiser = OptimKind::SGD;
  cfg.eta = 0.3;
  cfg.k_steps = 3;
  cfg.batch_size = 4;
  cfg.clients_per_round = 3;
  cfg.rounds = 4;
  cfg.eval_every = 2;
  cfg.seeds = {1, 2, 3};
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config text parsing handles comments, quotes, and blank lines") {
  const std::string text =
      "# leading comment\n"
      "task = \"least_squares\"   # trailing comment\n"
      "\n"
      "  eta = 0.1\n"
      "output_dir = \"/tmp/a#b\"  # '#' inside quotes is literal\n"
      "seeds = [1, 2, 3]\n";
  const auto kv = parse_config_text(text);
  CHECK(kv.size() == 4);
  CHECK(kv.at("task") == "\"least_squares\"");
  CHECK(kv.at("eta") == "0.1");
  CHECK(kv.at("output_dir") == "\"/tmp/a#b\"");
  CHECK(kv.at("seeds") == "[1, 2, 3]");
}

TEST_CASE("config text parsing rejects malformed lines") {
  CHECK_THROWS_WITH_AS(parse_config_text("eta = 0.1\neta = 0.2\n"),
                       doctest::Contains("config: duplicate key 'eta'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("just some words\n"),
                       doctest::Contains("expected 'key = value'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("eta =\n"), doctest::Contains("empty key or value"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("eta = 0.1x\n# fine\n= 3\n"),
                       doctest::Contains("empty key or value"), std::invalid_argument);
}

TEST_CASE("config_from_map populates every field") {
  std::map<std::string, std::string> kv = {
      {"task", "\"mlp1\""},
      {"dim", "6"},
      {"n_clients", "5"},
      {"samples_per_client", "7"},
      {"n_classes", "4"},
      {"hidden", "3"},
      {"dirichlet_alpha", "0.7"},
      {"task_seed", "77"},
      {"algorithm", "adaptivefedopt"},
      {"optimiser", "adam"},
      {"eta", "0.05"},
      {"beta1", "0.9"},
      {"beta2", "0.99"},
      {"epsilon", "0.001"},
      {"eta_server", "0.5"},
      {"k_steps", "2"},
      {"batch_size", "4"},
      {"clients_per_round", "3"},
      {"rounds", "10"},
      {"eval_every", "5"},
      {"seeds", "[7, 11]"},
      {"output_dir", "'/tmp/out'"},
      {"weighted_aggregation", "true"},
      {"track_unsquared_v", "true"},
  };
  const ExperimentConfig cfg = config_from_map(kv);
  CHECK(cfg.task == "mlp1");
  CHECK(cfg.dim == 6);
  CHECK(cfg.n_clients == 5);
  CHECK(cfg.samples_per_client == 7);
  CHECK(cfg.n_classes == 4);
  CHECK(cfg.hidden == 3);
  CHECK(cfg.dirichlet_alpha == 0.7);
  CHECK(cfg.task_seed == 77);
  CHECK(cfg.algorithm == Algorithm::AdaptiveFedOpt);
  CHECK(cfg.optimiser == OptimKind::Adam);
  CHECK(cfg.eta == 0.05);
  CHECK(cfg.beta1 == 0.9);
  CHECK(cfg.beta2 == 0.99);
  CHECK(cfg.epsilon == 0.001);
  REQUIRE(cfg.eta_server.has_value());
  CHECK(*cfg.eta_server == 0.5);
  CHECK(cfg.k_steps == 2);
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.clients_per_round == 3);
  CHECK(cfg.rounds == 10);
  CHECK(cfg.eval_every == 5);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{7, 11});
  CHECK(cfg.output_dir == "/tmp/out");
  CHECK(cfg.weighted_aggregation);
  CHECK(cfg.track_unsquared_v);
}

TEST_CASE("config_from_map rejects unknown keys and bad values") {
  const auto with = [](std::map<std::string, std::string> kv,
                       const std::string& key, const std::string& value) {
    kv[key] = value;
    return kv;
  };
  std::map<std::string, std::string> ok = {
      {"task", "least_squares"}, {"eta", "0.1"},    {"k_steps", "1"},
      {"batch_size", "1"},       {"rounds", "1"},   {"eval_every", "1"},
      {"clients_per_round", "1"}, {"seeds", "[1]"},
  };
  CHECK_NOTHROW(config_from_map(ok));
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "foo", "1")),
                       doctest::Contains("config: unknown key 'foo'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "eta", "0.1x")),
                       doctest::Contains("'eta' expects a number"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "rounds", "2.5")),
                       doctest::Contains("'rounds' expects an integer"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "seeds", "[1, -2]")),
                       doctest::Contains("'seeds' expects an unsigned integer"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "seeds", "1, 2")),
                       doctest::Contains("'seeds' expects a [v1, v2, ...] list"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "seeds", "[1, , 2]")),
                       doctest::Contains("'seeds' has an empty list element"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "seeds", "[]")),
                       doctest::Contains("'seeds' list is empty"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "weighted_aggregation", "maybe")),
                       doctest::Contains("expects true or false"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_map(with(ok, "algorithm", "fedprox")),
                       doctest::Contains("unknown algorithm"), std::invalid_argument);
}

TEST_CASE("config validation enforces task and algorithm constraints") {
  const auto expect = [](ExperimentConfig cfg, const char* fragment) {
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains(fragment), std::invalid_argument);
  };
  const ExperimentConfig base = small_ls_config();

  {
    ExperimentConfig cfg = base;
    cfg.eta = 0.0;
    expect(cfg, "config: 'eta' must be positive");
  }
  {
    ExperimentConfig cfg = base;
    cfg.task_dir = "/tmp/somewhere";
    expect(cfg, "exactly one of 'task' or 'task_dir'");
    cfg.task.clear();
    cfg.task_dir.clear();
    expect(cfg, "exactly one of 'task' or 'task_dir'");
  }
  {
    ExperimentConfig cfg = base;
    cfg.task = "resnet";
    expect(cfg, "unknown task generator 'resnet'");
  }
  {
    ExperimentConfig cfg = base;
    cfg.algorithm = Algorithm::FedAvg;
    cfg.optimiser = OptimKind::Adam;
    expect(cfg, "config: fedavg requires optimiser = sgd");
  }
  {
    ExperimentConfig cfg = base;
    cfg.algorithm = Algorithm::MFL;
    cfg.optimiser = OptimKind::SGD;
    expect(cfg, "config: mfl requires an adaptive optimiser");
    cfg.algorithm = Algorithm::Mimelite;
    expect(cfg, "config: mimelite requires an adaptive optimiser");
  }
  {
    ExperimentConfig cfg = base;
    cfg.algorithm = Algorithm::AdaptiveFedOpt;
    cfg.optimiser = OptimKind::Adam;
    cfg.beta1 = 0.9;
    cfg.beta2 = 0.99;
    expect(cfg, "config: adaptivefedopt requires 'eta_server'");
    cfg.eta_server = 0.0;
    expect(cfg, "config: 'eta_server' must be positive");
    cfg.eta_server = 1.0;
    CHECK_NOTHROW(cfg.validate());
  }
  {
    ExperimentConfig cfg = base;
    cfg.beta = 1.0;
    expect(cfg, "config: 'beta' must lie in [0, 1)");
    cfg.beta = -0.1;
    expect(cfg, "config: 'beta' must lie in [0, 1)");
  }
  {
    ExperimentConfig cfg = base;
    cfg.clients_per_round = cfg.n_clients + 1;
    expect(cfg, "config: 'clients_per_round' exceeds 'n_clients'");
  }
  {
    ExperimentConfig cfg = base;
    cfg.rounds = 0;
    expect(cfg, "'rounds' must be >= 1");
    cfg = base;
    cfg.eval_every = 0;
    expect(cfg, "'eval_every' must be >= 1");
    cfg = base;
    cfg.seeds.clear();
    expect(cfg, "'seeds' must list at least one seed");
    cfg = base;
    cfg.k_steps = 0;
    expect(cfg, "'k_steps' must be >= 1");
    cfg = base;
    cfg.batch_size = 0;
    expect(cfg, "'batch_size' must be >= 1");
  }
}

TEST_CASE("load_config round-trips a file") {
  const fs::path dir = fresh_dir("load_config");
  const fs::path path = dir / "exp.cfg";
  {
    std::ofstream out(path);
    out << "task = least_squares\n"
        << "dim = 4\nn_clients = 3\nsamples_per_client = 6\n"
        << "algorithm = fedgbo\noptimiser = rmsprop\n"
        << "eta = 0.05\nbeta = 0.9\nepsilon = 0.001\n"
        << "k_steps = 4\nbatch_size = 3\nclients_per_round = 2\n"
        << "rounds = 8\neval_every = 2\nseeds = [5]\n"
        << "output_dir = \"" << (dir / "out").string() << "\"\n";
  }
  const ExperimentConfig cfg = load_config(path.string());
  CHECK(cfg.algorithm == Algorithm::FedGBO);
  CHECK(cfg.optimiser == OptimKind::RMSProp);
  CHECK(cfg.beta == 0.9);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{5});
  CHECK(cfg.output_dir == (dir / "out").string());
  CHECK_THROWS_WITH_AS(load_config((dir / "missing.cfg").string()),
                       doctest::Contains("config: cannot open"), std::invalid_argument);
}

TEST_CASE("build_round_config and build_initial_state mirror the config") {
  ExperimentConfig cfg = small_ls_config();
  cfg.optimiser = OptimKind::Adam;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.99;
  cfg.track_unsquared_v = true;
  const RoundConfig rc = build_round_config(cfg, 17);
  CHECK(rc.algorithm == Algorithm::FedGBO);
  CHECK(rc.k_steps == cfg.k_steps);
  CHECK(rc.batch_size == cfg.batch_size);
  CHECK(rc.clients_per_round == cfg.clients_per_round);
  CHECK(rc.eta == cfg.eta);
  CHECK(rc.eta_server == 0.0);  // unset optional defaults to zero
  CHECK(rc.seed == 17);

  const FederatedTask task = build_task(cfg);
  const GlobalState state = build_initial_state(cfg, task);
  CHECK(state.model == init_model(task.model, cfg.task_seed));
  CHECK(state.opt.kind == OptimKind::Adam);
  CHECK(state.opt.beta1 == 0.9);
  CHECK(state.opt.track_unsquared_v);
  CHECK_FALSE(state.server_opt.has_value());

  ExperimentConfig srv = small_ls_config();
  srv.algorithm = Algorithm::AdaptiveFedOpt;
  srv.optimiser = OptimKind::SGDm;
  srv.beta = 0.9;
  srv.eta_server = 0.75;
  srv.track_unsquared_v = true;
  const GlobalState sstate = build_initial_state(srv, task);
  REQUIRE(sstate.server_opt.has_value());
  CHECK(sstate.server_opt->kind == OptimKind::SGDm);
  CHECK(sstate.server_opt->track_unsquared_v);
  CHECK(build_round_config(srv, 1).eta_server == 0.75);
}

TEST_CASE("run_experiment writes metrics, timing, and summary files") {
  const ExperimentConfig cfg = small_ls_config();
  const fs::path dir = fresh_dir("run_files");
  const ExperimentResult result = run_experiment(cfg, dir.string());

  REQUIRE(result.seeds.size() == 2);
  for (const auto& oc : result.seeds) {
    CHECK_FALSE(oc.diverged);
    REQUIRE(oc.records.size() == 4);  // rounds 2, 4, 6, 8
    for (std::size_t i = 0; i < oc.records.size(); ++i)
      CHECK(oc.records[i].round == static_cast<int>(2 * (i + 1)));
  }
  REQUIRE(result.final_mean_accuracy.has_value());
  CHECK(*result.final_mean_accuracy == 0.0);  // least squares has no accuracy

  const auto lines3 = read_lines(dir / "metrics_seed3.jsonl");
  REQUIRE(lines3.size() == 4);
  const auto row = nlohmann::ordered_json::parse(lines3.front());
  std::vector<std::string> keys;
  for (const auto& item : row.items()) keys.push_back(item.key());
  CHECK(keys == std::vector<std::string>{"seed", "round", "train_loss", "test_loss",
                                         "test_accuracy", "cum_download_floats",
                                         "cum_upload_floats", "cum_client_flops"});
  CHECK(row["seed"] == 3);
  CHECK(row["round"] == 2);
  CHECK(row["train_loss"].is_number());

  CHECK(read_lines(dir / "metrics_seed4.jsonl").size() == 4);
  CHECK(read_lines(dir / "timing.jsonl").size() == 2);

  const auto summary = read_lines(dir / "summary.csv");
  REQUIRE(summary.size() == 5);
  CHECK(summary[0] == "round,n_seeds,mean_test_accuracy,ci95_half_width");
  const auto cells = split_csv(summary[1]);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0] == "2");
  CHECK(cells[1] == "2");

  CHECK_THROWS_WITH_AS(run_experiment(cfg, ""), doctest::Contains("no output directory"),
                       std::invalid_argument);
}

TEST_CASE("cumulative traffic and flops counters follow the closed forms") {
  const ExperimentConfig cfg = small_ls_config();
  const fs::path dir = fresh_dir("counters");
  const ExperimentResult result = run_experiment(cfg, dir.string());

  const FederatedTask task = build_task(cfg);
  const long long p = task.model.model_dim();
  const CommCost cc = comm_per_round(cfg.algorithm, cfg.optimiser, p);
  CostInputs ci;
  ci.algorithm = cfg.algorithm;
  ci.optimiser = cfg.optimiser;
  ci.k_steps = cfg.k_steps;
  ci.batch_size = cfg.batch_size;
  ci.fwd = task.model.fwd_flops();
  ci.model_params = p;
  const long long per_client_flops = flops_per_round(ci);
  const long long m = cfg.clients_per_round;

  for (const auto& oc : result.seeds) {
    for (const auto& rec : oc.records) {
      const long long r = rec.round;
      CHECK(rec.cum_download_floats == r * m * cc.download_floats);
      CHECK(rec.cum_upload_floats == r * m * cc.upload_floats);
      // Compute is tracked per participating client, not summed over them.
      CHECK(rec.cum_client_flops == r * per_client_flops);
    }
  }
}

TEST_CASE("reruns produce byte-identical metric streams") {
  const ExperimentConfig cfg = small_ls_config();
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  run_experiment(cfg, a.string());
  run_experiment(cfg, b.string());
  CHECK(read_file(a / "metrics_seed3.jsonl") == read_file(b / "metrics_seed3.jsonl"));
  CHECK(read_file(a / "metrics_seed4.jsonl") == read_file(b / "metrics_seed4.jsonl"));
  CHECK(read_file(a / "summary.csv") == read_file(b / "summary.csv"));
  // timing.jsonl is the wall-clock sidecar and is allowed to differ
}

TEST_CASE("summary confidence interval matches the normal approximation") {
  const ExperimentConfig cfg = small_logistic_config();
  const fs::path dir = fresh_dir("ci");
  const ExperimentResult result = run_experiment(cfg, dir.string());
  REQUIRE(result.seeds.size() == 3);

  std::vector<double> final_acc;
  for (const auto& oc : result.seeds) {
    REQUIRE_FALSE(oc.records.empty());
    final_acc.push_back(oc.records.back().test_accuracy);
  }
  double mean = 0.0;
  for (double a : final_acc) mean += a;
  mean /= 3.0;
  double ss = 0.0;
  for (double a : final_acc) ss += (a - mean) * (a - mean);
  const double half = 1.96 * std::sqrt(ss / 2.0) / std::sqrt(3.0);

  const auto summary = read_lines(dir / "summary.csv");
  REQUIRE(summary.size() == 3);  // header + rounds 2 and 4
  const auto cells = split_csv(summary.back());
  REQUIRE(cells.size() == 4);
  CHECK(cells[0] == "4");
  CHECK(cells[1] == "3");
  CHECK(std::stod(cells[2]) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(std::stod(cells[3]) == doctest::Approx(half).epsilon(1e-12));

  // A single seed has no spread estimate; the half width is zero.
  ExperimentConfig one = cfg;
  one.seeds = {1};
  const fs::path dir1 = fresh_dir("ci_one");
  run_experiment(one, dir1.string());
  const auto s1 = read_lines(dir1 / "summary.csv");
  REQUIRE(s1.size() == 3);
  CHECK(split_csv(s1.back())[3] == "0");
}

TEST_CASE("grid files parse to sweepable axes only") {
  const fs::path dir = fresh_dir("grids");
  {
    std::ofstream out(dir / "good.grid");
    out << "eta = [0.1, 0.2]\nbeta = [0]\n";
  }
  const SweepGrid grid = parse_grid_file((dir / "good.grid").string());
  REQUIRE(grid.axes.size() == 2);
  CHECK(grid.axes[0].first == "beta");  // axes ordered by key name
  CHECK(grid.axes[0].second == std::vector<double>{0.0});
  CHECK(grid.axes[1].first == "eta");
  CHECK(grid.axes[1].second == std::vector<double>{0.1, 0.2});

  {
    std::ofstream out(dir / "bad.grid");
    out << "k_steps = [1, 2]\n";
  }
  CHECK_THROWS_WITH_AS(parse_grid_file((dir / "bad.grid").string()),
                       doctest::Contains("grid: key 'k_steps' is not a sweepable axis"),
                       std::invalid_argument);
  {
    std::ofstream out(dir / "empty.grid");
    out << "# nothing here\n";
  }
  CHECK_THROWS_WITH_AS(parse_grid_file((dir / "empty.grid").string()),
                       doctest::Contains("grid: no axes"), std::invalid_argument);
}

TEST_CASE("a 1x1 sweep selects its only cell") {
  ExperimentConfig base = small_ls_config();
  base.rounds = 2;
  base.eval_every = 2;
  base.seeds = {3};
  SweepGrid grid;
  grid.axes.emplace_back("eta", std::vector<double>{0.05});
  const fs::path dir = fresh_dir("sweep_1x1");
  const SweepResult result = run_sweep(base, grid, dir.string());
  REQUIRE(result.cells.size() == 1);
  REQUIRE(result.winner.has_value());
  CHECK(*result.winner == 0);
  CHECK(result.cells[0].overrides.at("eta") == 0.05);
  CHECK_FALSE(result.cells[0].failed);
  CHECK(fs::exists(dir / "cell_0" / "summary.csv"));
  CHECK(fs::exists(dir / "sweep_results.csv"));
  const std::string winner = read_file(dir / "winner.json");
  CHECK(winner.find("\"cell\": 0") != std::string::npos);
}

TEST_CASE("diverging sweep cells are marked failed and skipped for the winner") {
  ExperimentConfig base = small_ls_config();
  base.rounds = 60;
  base.eval_every = 10;
  base.seeds = {3};
  SweepGrid grid;
  grid.axes.emplace_back("eta", std::vector<double>{0.05, 100.0});
  const fs::path dir = fresh_dir("sweep_diverge");
  const SweepResult result = run_sweep(base, grid, dir.string());
  REQUIRE(result.cells.size() == 2);
  CHECK_FALSE(result.cells[0].failed);
  CHECK(result.cells[1].failed);
  CHECK_FALSE(result.cells[1].final_mean_accuracy.has_value());
  REQUIRE(result.winner.has_value());
  CHECK(*result.winner == 0);

  const std::string csv = read_file(dir / "sweep_results.csv");
  CHECK(csv.find("failed") != std::string::npos);
  const std::string metrics = read_file(dir / "cell_1" / "metrics_seed3.jsonl");
  CHECK(metrics.find("\"failed\":true") != std::string::npos);
  CHECK(metrics.find("\"reason\"") != std::string::npos);
}

TEST_CASE("accuracy ties break to the lower eta, then the lower beta") {
  // Least-squares accuracy is identically zero, so every healthy cell ties.
  ExperimentConfig base = small_ls_config();
  base.rounds = 2;
  base.eval_every = 2;
  base.seeds = {3};
  {
    SweepGrid grid;
    grid.axes.emplace_back("eta", std::vector<double>{0.02, 0.01});
    const fs::path dir = fresh_dir("sweep_tie_eta");
    const SweepResult result = run_sweep(base, grid, dir.string());
    REQUIRE(result.winner.has_value());
    CHECK(*result.winner == 1);  // eta 0.01 enumerated second
  }
  {
    SweepGrid grid;
    grid.axes.emplace_back("beta", std::vector<double>{0.6, 0.2});
    const fs::path dir = fresh_dir("sweep_tie_beta");
    const SweepResult result = run_sweep(base, grid, dir.string());
    REQUIRE(result.winner.has_value());
    CHECK(*result.winner == 1);
  }
}

TEST_CASE("sweep cells enumerate the full cartesian product") {
  ExperimentConfig base = small_ls_config();
  base.rounds = 2;
  base.eval_every = 2;
  base.seeds = {3};
  SweepGrid grid;
  grid.axes.emplace_back("beta", std::vector<double>{0.1, 0.2, 0.3});
  grid.axes.emplace_back("eta", std::vector<double>{0.01, 0.02});
  const fs::path dir = fresh_dir("sweep_product");
  const SweepResult result = run_sweep(base, grid, dir.string());
  REQUIRE(result.cells.size() == 6);
  // Row-major: the last axis varies fastest.
  CHECK(result.cells[0].overrides == std::map<std::string, double>{{"beta", 0.1}, {"eta", 0.01}});
  CHECK(result.cells[3].overrides == std::map<std::string, double>{{"beta", 0.2}, {"eta", 0.02}});
  CHECK(result.cells[5].overrides == std::map<std::string, double>{{"beta", 0.3}, {"eta", 0.02}});
  std::set<std::pair<double, double>> seen;
  for (const auto& cell : result.cells)
    seen.insert({cell.overrides.at("beta"), cell.overrides.at("eta")});
  CHECK(seen.size() == 6);
  REQUIRE(result.winner.has_value());
  CHECK(*result.winner == 0);  // all tie at zero accuracy; lowest eta, then beta
}

TEST_CASE("an eta_server axis multiplies the cell count") {
  ExperimentConfig base = small_ls_config();
  base.algorithm = Algorithm::AdaptiveFedOpt;
  base.optimiser = OptimKind::Adam;
  base.beta1 = 0.9;
  base.beta2 = 0.99;
  base.eta_server = 1.0;
  base.rounds = 2;
  base.eval_every = 2;
  base.seeds = {3};
  SweepGrid grid;
  grid.axes.emplace_back("eta", std::vector<double>{0.01, 0.02});
  grid.axes.emplace_back("eta_server", std::vector<double>{0.5, 1.0, 2.0});
  const fs::path dir = fresh_dir("sweep_eta_server");
  const SweepResult result = run_sweep(base, grid, dir.string());
  REQUIRE(result.cells.size() == 6);
  for (const auto& cell : result.cells) {
    CHECK_FALSE(cell.failed);
    CHECK(cell.overrides.count("eta_server") == 1);
  }
  REQUIRE(result.winner.has_value());
}

TEST_CASE("bundled presets parse and validate") {
  const fs::path presets = fs::path(FEDSIM_SOURCE_DIR) / "presets";
  REQUIRE(fs::is_directory(presets));
  const std::regex name_re(
      "(cifar100|femnist|sent140|shakespeare)_k[0-9]+_"
      "(fedavg_sgd|(fedgbo|mfl|mimelite|adaptivefedopt)_(rmsprop|sgdm|adam))\\.cfg");
  std::set<std::string> algorithms;
  int count = 0;
  for (const auto& entry : fs::directory_iterator(presets)) {
    const std::string name = entry.path().filename().string();
    INFO("preset ", name);
    CHECK(std::regex_match(name, name_re));
    const ExperimentConfig cfg = load_config(entry.path().string());
    CHECK(cfg.rounds >= 1);
    CHECK_FALSE(cfg.seeds.empty());
    algorithms.insert(to_string(cfg.algorithm));
    ++count;
  }
  CHECK(count == 104);
  CHECK(algorithms ==
        std::set<std::string>{"adaptivefedopt", "fedavg", "fedgbo", "mfl", "mimelite"});
}

}  // TEST_SUITE("harness")
