// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fedsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task",          "task_dir",       "dim",
      "n_clients",     "samples_per_client", "n_classes",
      "hidden",        "nnz_per_sample", "dirichlet_alpha",
      "center_spread", "noise_sigma",    "task_seed",
      "algorithm",     "optimiser",      "eta",
      "beta",          "beta1",          "beta2",
      "epsilon",       "eta_server",     "k_steps",
      "batch_size",    "clients_per_round", "rounds",
      "eval_every",    "seeds",          "output_dir",
      "weighted_aggregation", "track_unsquared_v",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Strips a quoted string or returns the bare token.
std::string unquote(const std::string& raw, const std::string& key) {
  if (raw.size() >= 2 && (raw.front() == '"' || raw.front() == '\'')) {
    if (raw.back() != raw.front())
      throw std::invalid_argument("config: unterminated quote in value of '" + key + "'");
    return raw.substr(1, raw.size() - 2);
  }
  return raw;
}

double parse_real(const std::string& raw, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + raw + "'");
  }
}

long long parse_int(const std::string& raw, const std::string& key) {
  long long v = 0;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + raw + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& raw, const std::string& key) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
    throw std::invalid_argument("config: '" + key + "' expects an unsigned integer, got '" + raw +
                                "'");
  return v;
}

bool parse_bool(const std::string& raw, const std::string& key) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  throw std::invalid_argument("config: '" + key + "' expects true or false, got '" + raw + "'");
}

std::vector<std::string> parse_list(const std::string& raw, const std::string& key) {
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
    throw std::invalid_argument("config: '" + key + "' expects a [v1, v2, ...] list");
  std::vector<std::string> items;
  std::string body = raw.substr(1, raw.size() - 2);
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw std::invalid_argument("config: '" + key + "' has an empty list element");
    items.push_back(item);
  }
  if (items.empty()) throw std::invalid_argument("config: '" + key + "' list is empty");
  return items;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    // Comments start at '#' outside quotes.
    bool in_quote = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quote) {
        if (c == quote) in_quote = false;
      } else if (c == '"' || c == '\'') {
        in_quote = true;
        quote = c;
      } else if (c == '#') {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!known_keys().count(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  ExperimentConfig cfg;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("task")) cfg.task = unquote(*v, "task");
  if (const auto* v = get("task_dir")) cfg.task_dir = unquote(*v, "task_dir");
  if (const auto* v = get("dim")) cfg.dim = static_cast<int>(parse_int(*v, "dim"));
  if (const auto* v = get("n_clients")) cfg.n_clients = static_cast<int>(parse_int(*v, "n_clients"));
  if (const auto* v = get("samples_per_client"))
    cfg.samples_per_client = static_cast<int>(parse_int(*v, "samples_per_client"));
  if (const auto* v = get("n_classes")) cfg.n_classes = static_cast<int>(parse_int(*v, "n_classes"));
  if (const auto* v = get("hidden")) cfg.hidden = static_cast<int>(parse_int(*v, "hidden"));
  if (const auto* v = get("nnz_per_sample"))
    cfg.nnz_per_sample = static_cast<int>(parse_int(*v, "nnz_per_sample"));
  if (const auto* v = get("dirichlet_alpha")) cfg.dirichlet_alpha = parse_real(*v, "dirichlet_alpha");
  if (const auto* v = get("center_spread")) cfg.center_spread = parse_real(*v, "center_spread");
  if (const auto* v = get("noise_sigma")) cfg.noise_sigma = parse_real(*v, "noise_sigma");
  if (const auto* v = get("task_seed")) cfg.task_seed = parse_u64(*v, "task_seed");
  if (const auto* v = get("algorithm")) cfg.algorithm = algorithm_from_string(unquote(*v, "algorithm"));
  if (const auto* v = get("optimiser")) cfg.optimiser = optim_kind_from_string(unquote(*v, "optimiser"));
  if (const auto* v = get("eta")) cfg.eta = parse_real(*v, "eta");
  if (const auto* v = get("beta")) cfg.beta = parse_real(*v, "beta");
  if (const auto* v = get("beta1")) cfg.beta1 = parse_real(*v, "beta1");
  if (const auto* v = get("beta2")) cfg.beta2 = parse_real(*v, "beta2");
  if (const auto* v = get("epsilon")) cfg.epsilon = parse_real(*v, "epsilon");
  if (const auto* v = get("eta_server")) cfg.eta_server = parse_real(*v, "eta_server");
  if (const auto* v = get("k_steps")) cfg.k_steps = static_cast<int>(parse_int(*v, "k_steps"));
  if (const auto* v = get("batch_size")) cfg.batch_size = static_cast<int>(parse_int(*v, "batch_size"));
  if (const auto* v = get("clients_per_round"))
    cfg.clients_per_round = static_cast<int>(parse_int(*v, "clients_per_round"));
  if (const auto* v = get("rounds")) cfg.rounds = static_cast<int>(parse_int(*v, "rounds"));
  if (const auto* v = get("eval_every")) cfg.eval_every = static_cast<int>(parse_int(*v, "eval_every"));
  if (const auto* v = get("seeds")) {
    for (const auto& item : parse_list(*v, "seeds")) cfg.seeds.push_back(parse_u64(item, "seeds"));
  }
  if (const auto* v = get("output_dir")) cfg.output_dir = unquote(*v, "output_dir");
  if (const auto* v = get("weighted_aggregation"))
    cfg.weighted_aggregation = parse_bool(*v, "weighted_aggregation");
  if (const auto* v = get("track_unsquared_v"))
    cfg.track_unsquared_v = parse_bool(*v, "track_unsquared_v");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_map(parse_config_file(path));
}

void ExperimentConfig::validate() const {
  if (task.empty() == task_dir.empty())
    throw std::invalid_argument("config: exactly one of 'task' or 'task_dir' is required");
  if (!task.empty() && task != "least_squares" && task != "logistic" && task != "mlp1" &&
      task != "sent140_shape")
    throw std::invalid_argument("config: unknown task generator '" + task + "'");
  if (!(eta > 0.0)) throw std::invalid_argument("config: 'eta' must be positive");
  if (k_steps < 1) throw std::invalid_argument("config: 'k_steps' must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("config: 'batch_size' must be >= 1");
  if (clients_per_round < 1)
    throw std::invalid_argument("config: 'clients_per_round' must be >= 1");
  if (rounds < 1) throw std::invalid_argument("config: 'rounds' must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("config: 'eval_every' must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: 'seeds' must list at least one seed");
  if (epsilon < 0.0) throw std::invalid_argument("config: 'epsilon' must be >= 0");

  const auto require_decay = [](double b, const char* name) {
    if (!(b >= 0.0 && b < 1.0))
      throw std::invalid_argument(std::string("config: '") + name + "' must lie in [0, 1)");
  };
  switch (optimiser) {
    case OptimKind::SGD: break;
    case OptimKind::RMSProp:
    case OptimKind::SGDm: require_decay(beta, "beta"); break;
    case OptimKind::Adam:
      require_decay(beta1, "beta1");
      require_decay(beta2, "beta2");
      break;
  }
  switch (algorithm) {
    case Algorithm::FedAvg:
      if (optimiser != OptimKind::SGD)
        throw std::invalid_argument("config: fedavg requires optimiser = sgd");
      break;
    case Algorithm::MFL:
    case Algorithm::Mimelite:
      if (optimiser == OptimKind::SGD)
        throw std::invalid_argument("config: " + to_string(algorithm) +
                                    " requires an adaptive optimiser");
      break;
    case Algorithm::AdaptiveFedOpt:
      if (!eta_server)
        throw std::invalid_argument("config: adaptivefedopt requires 'eta_server'");
      if (!(*eta_server > 0.0))
        throw std::invalid_argument("config: 'eta_server' must be positive");
      break;
    case Algorithm::FedGBO: break;
  }

  if (!task.empty()) {
    if (task != "sent140_shape" && dim < 1)
      throw std::invalid_argument("config: 'dim' must be >= 1");
    if (n_clients < 1) throw std::invalid_argument("config: 'n_clients' must be >= 1");
    if (samples_per_client < 1)
      throw std::invalid_argument("config: 'samples_per_client' must be >= 1");
    if ((task == "logistic" || task == "mlp1") && n_classes < 2)
      throw std::invalid_argument("config: 'n_classes' must be >= 2");
    if (task == "mlp1" && hidden < 1)
      throw std::invalid_argument("config: 'hidden' must be >= 1");
    if (task == "sent140_shape" && nnz_per_sample < 1)
      throw std::invalid_argument("config: 'nnz_per_sample' must be >= 1");
    if ((task == "logistic" || task == "mlp1") && !(dirichlet_alpha > 0.0))
      throw std::invalid_argument("config: 'dirichlet_alpha' must be positive");
    if (clients_per_round > n_clients)
      throw std::invalid_argument("config: 'clients_per_round' exceeds 'n_clients'");
  }
}

FederatedTask build_task(const ExperimentConfig& cfg) {
  if (!cfg.task_dir.empty()) return load_client_dir(cfg.task_dir);
  if (cfg.task == "least_squares") {
    HeterogeneityKnobs knobs;
    knobs.dirichlet_alpha = cfg.dirichlet_alpha;
    knobs.center_spread = cfg.center_spread;
    knobs.noise_sigma = cfg.noise_sigma;
    return gen_least_squares_federation(cfg.dim, cfg.n_clients, cfg.samples_per_client, knobs,
                                        cfg.task_seed);
  }
  if (cfg.task == "logistic")
    return gen_logistic_federation(cfg.dim, cfg.n_classes, cfg.n_clients, cfg.samples_per_client,
                                   cfg.dirichlet_alpha, cfg.task_seed);
  if (cfg.task == "mlp1")
    return gen_mlp_federation(cfg.dim, cfg.hidden, cfg.n_classes, cfg.n_clients,
                              cfg.samples_per_client, cfg.dirichlet_alpha, cfg.task_seed);
  if (cfg.task == "sent140_shape")
    return gen_sent140_shape_federation(cfg.n_clients, cfg.samples_per_client,
                                        cfg.nnz_per_sample, cfg.task_seed);
  throw std::invalid_argument("build_task: unknown task '" + cfg.task + "'");
}

RoundConfig build_round_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  RoundConfig rc;
  rc.algorithm = cfg.algorithm;
  rc.k_steps = cfg.k_steps;
  rc.batch_size = cfg.batch_size;
  rc.clients_per_round = cfg.clients_per_round;
  rc.eta = cfg.eta;
  rc.eta_server = cfg.eta_server.value_or(0.0);
  rc.seed = seed;
  rc.weighted_aggregation = cfg.weighted_aggregation;
  return rc;
}

GlobalState build_initial_state(const ExperimentConfig& cfg, const FederatedTask& task) {
  const ParamVector x0 = init_model(task.model, cfg.task_seed);
  GlobalState state = make_initial_state(cfg.algorithm, cfg.optimiser, x0, cfg.beta, cfg.beta1,
                                         cfg.beta2, cfg.epsilon);
  state.opt.track_unsquared_v = cfg.track_unsquared_v;
  if (state.server_opt) state.server_opt->track_unsquared_v = cfg.track_unsquared_v;
  return state;
}

namespace {

void write_summary_csv(const std::string& path, const std::vector<SeedOutcome>& outcomes) {
  // Per-round mean and 95% normal-approximation CI of test accuracy over
  // the seeds that reached that round.
  std::vector<int> rounds;
  for (const auto& oc : outcomes)
    for (const auto& rec : oc.records) rounds.push_back(rec.round);
  std::sort(rounds.begin(), rounds.end());
  rounds.erase(std::unique(rounds.begin(), rounds.end()), rounds.end());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("run_experiment: cannot write " + path);
  out << "round,n_seeds,mean_test_accuracy,ci95_half_width\n";
  for (int round : rounds) {
    std::vector<double> acc;
    for (const auto& oc : outcomes)
      for (const auto& rec : oc.records)
        if (rec.round == round) acc.push_back(rec.test_accuracy);
    const double n = static_cast<double>(acc.size());
    double mean = 0.0;
    for (double a : acc) mean += a;
    mean /= n;
    double half = 0.0;
    if (acc.size() > 1) {
      double ss = 0.0;
      for (double a : acc) ss += (a - mean) * (a - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      half = 1.96 * sd / std::sqrt(n);
    }
    out << round << ',' << acc.size() << ',' << format_double(mean) << ','
        << format_double(half) << '\n';
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
  if (dir.empty())
    throw std::invalid_argument("run_experiment: no output directory (config or --out)");
  fs::create_directories(dir);

  const FederatedTask task = build_task(cfg);

  ExperimentResult result;
  result.out_dir = dir;
  std::ofstream timing(fs::path(dir) / "timing.jsonl", std::ios::binary);
  if (!timing) throw std::runtime_error("run_experiment: cannot write timing.jsonl");

  for (const std::uint64_t seed : cfg.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const RoundConfig rc = build_round_config(cfg, seed);
    GlobalState state = build_initial_state(cfg, task);
    const TrainingResult tr = run_training(task, rc, std::move(state), cfg.rounds, cfg.eval_every);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    SeedOutcome oc;
    oc.seed = seed;
    oc.diverged = tr.diverged;
    oc.diverged_round = tr.diverged_round;
    oc.failure = tr.failure;

    const fs::path metrics_path = fs::path(dir) / ("metrics_seed" + std::to_string(seed) + ".jsonl");
    std::ofstream metrics(metrics_path, std::ios::binary);
    if (!metrics) throw std::runtime_error("run_experiment: cannot write " + metrics_path.string());
    for (const auto& rec : tr.records) {
      MetricRecord mr;
      mr.seed = seed;
      mr.round = rec.round;
      mr.train_loss = rec.train_loss;
      mr.test_loss = rec.test_loss;
      mr.test_accuracy = rec.test_accuracy;
      mr.cum_download_floats = rec.cum_download_floats;
      mr.cum_upload_floats = rec.cum_upload_floats;
      mr.cum_client_flops = rec.cum_client_flops;
      oc.records.push_back(mr);

      ordered_json row;
      row["seed"] = mr.seed;
      row["round"] = mr.round;
      row["train_loss"] = mr.train_loss;
      row["test_loss"] = mr.test_loss;
      row["test_accuracy"] = mr.test_accuracy;
      row["cum_download_floats"] = mr.cum_download_floats;
      row["cum_upload_floats"] = mr.cum_upload_floats;
      row["cum_client_flops"] = mr.cum_client_flops;
      metrics << row.dump() << '\n';
    }
    if (tr.diverged) {
      ordered_json row;
      row["seed"] = seed;
      row["round"] = tr.diverged_round;
      row["failed"] = true;
      row["reason"] = tr.failure;
      metrics << row.dump() << '\n';
    }

    // Wall time is non-deterministic by nature and lives in a sidecar so
    // the metric streams stay byte-identical across reruns.
    ordered_json trow;
    trow["seed"] = seed;
    trow["wall_ms"] = wall_ms;
    timing << trow.dump() << '\n';

    result.seeds.push_back(std::move(oc));
  }

  write_summary_csv((fs::path(dir) / "summary.csv").string(), result.seeds);

  bool all_healthy = true;
  double sum = 0.0;
  int count = 0;
  for (const auto& oc : result.seeds) {
    if (oc.diverged || oc.records.empty()) {
      all_healthy = false;
      break;
    }
    sum += oc.records.back().test_accuracy;
    ++count;
  }
  if (all_healthy && count > 0) result.final_mean_accuracy = sum / count;
  return result;
}

SweepGrid parse_grid_file(const std::string& path) {
  const auto kv = parse_config_file(path);
  static const std::set<std::string> allowed = {"eta",     "beta",    "beta1",
                                                "beta2",   "epsilon", "eta_server"};
  SweepGrid grid;
  for (const auto& [key, value] : kv) {
    if (!allowed.count(key))
      throw std::invalid_argument("grid: key '" + key + "' is not a sweepable axis");
    std::vector<double> values;
    for (const auto& item : parse_list(value, key)) values.push_back(parse_real(item, key));
    grid.axes.emplace_back(key, std::move(values));
  }
  if (grid.axes.empty()) throw std::invalid_argument("grid: no axes");
  return grid;
}

namespace {

ExperimentConfig apply_overrides(const ExperimentConfig& base,
                                 const std::map<std::string, double>& overrides) {
  ExperimentConfig cfg = base;
  for (const auto& [key, value] : overrides) {
    if (key == "eta") cfg.eta = value;
    else if (key == "beta") cfg.beta = value;
    else if (key == "beta1") cfg.beta1 = value;
    else if (key == "beta2") cfg.beta2 = value;
    else if (key == "epsilon") cfg.epsilon = value;
    else if (key == "eta_server") cfg.eta_server = value;
    else throw std::invalid_argument("sweep: bad override '" + key + "'");
  }
  return cfg;
}

double override_or(const std::map<std::string, double>& overrides, const char* key,
                   double fallback) {
  const auto it = overrides.find(key);
  return it == overrides.end() ? fallback : it->second;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                      const std::string& out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("run_sweep: output directory required");
  fs::create_directories(out_dir);

  // Row-major enumeration of the Cartesian product.
  std::vector<std::size_t> radix(grid.axes.size());
  std::size_t total = 1;
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    radix[a] = grid.axes[a].second.size();
    total *= radix[a];
  }

  SweepResult result;
  for (std::size_t cell_idx = 0; cell_idx < total; ++cell_idx) {
    SweepCell cell;
    cell.index = static_cast<int>(cell_idx);
    std::size_t rem = cell_idx;
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
      const auto& [key, values] = grid.axes[a];
      cell.overrides[key] = values[rem % radix[a]];
      rem /= radix[a];
    }
    const std::string cell_dir =
        (fs::path(out_dir) / ("cell_" + std::to_string(cell_idx))).string();
    try {
      const ExperimentConfig cfg = apply_overrides(base, cell.overrides);
      cfg.validate();
      const ExperimentResult er = run_experiment(cfg, cell_dir);
      if (er.final_mean_accuracy) {
        cell.final_mean_accuracy = er.final_mean_accuracy;
      } else {
        cell.failed = true;
      }
    } catch (const std::exception&) {
      cell.failed = true;
    }
    result.cells.push_back(std::move(cell));
  }

  // Winner: highest final accuracy; ties break to lower eta, then lower beta.
  for (const auto& cell : result.cells) {
    if (cell.failed) continue;
    if (!result.winner) {
      result.winner = cell.index;
      continue;
    }
    const auto& best = result.cells[static_cast<std::size_t>(*result.winner)];
    const double a = *cell.final_mean_accuracy;
    const double b = *best.final_mean_accuracy;
    const double cell_eta = override_or(cell.overrides, "eta", base.eta);
    const double best_eta = override_or(best.overrides, "eta", base.eta);
    const double cell_beta = override_or(cell.overrides, "beta", base.beta);
    const double best_beta = override_or(best.overrides, "beta", base.beta);
    if (a > b ||
        (a == b && (cell_eta < best_eta || (cell_eta == best_eta && cell_beta < best_beta))))
      result.winner = cell.index;
  }

  std::ofstream csv(fs::path(out_dir) / "sweep_results.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("run_sweep: cannot write sweep_results.csv");
  csv << "cell";
  for (const auto& [key, values] : grid.axes) {
    (void)values;
    csv << ',' << key;
  }
  csv << ",status,final_mean_test_accuracy\n";
  for (const auto& cell : result.cells) {
    csv << cell.index;
    for (const auto& [key, values] : grid.axes) {
      (void)values;
      csv << ',' << format_double(cell.overrides.at(key));
    }
    csv << ',' << (cell.failed ? "failed" : "ok") << ','
        << (cell.final_mean_accuracy ? format_double(*cell.final_mean_accuracy) : std::string())
        << '\n';
  }

  ordered_json winner;
  if (result.winner) {
    const auto& best = result.cells[static_cast<std::size_t>(*result.winner)];
    winner["cell"] = best.index;
    for (const auto& [key, value] : best.overrides) winner[key] = value;
    winner["final_mean_test_accuracy"] = *best.final_mean_accuracy;
  } else {
    winner["cell"] = nullptr;
  }
  std::ofstream wout(fs::path(out_dir) / "winner.json", std::ios::binary);
  if (!wout) throw std::runtime_error("run_sweep: cannot write winner.json");
  wout << winner.dump(2) << '\n';

  return result;
}

}  // namespace fedsim
