// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Client dataset directory format:
//   manifest.json                {model_kind, dim, n_classes, client_ids[]}
//   client_<id>.csv              one sample per line
//   test.csv                     same row format
// Rows are "label,feat0,feat1,..." (dense) or "label,idx:val idx:val ..."
// (sparse). UTF-8, LF line endings, reals with round-trip precision.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <json.hpp>

#include "fedsim/tasks.hpp"

namespace fedsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw std::runtime_error(context + ": bad number '" + std::string(text) + "'");
  return v;
}

void write_sample_row(std::ofstream& out, const Sample& s) {
  out << format_double(s.label);
  if (s.features.is_sparse()) {
    out << ',';
    const auto& idx = s.features.sparse_indices();
    const auto& val = s.features.sparse_values();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i > 0) out << ' ';
      out << idx[i] << ':' << format_double(val[i]);
    }
  } else {
    for (double f : s.features.dense_values()) out << ',' << format_double(f);
  }
  out << '\n';
}

Sample parse_sample_row(const std::string& line_in, const std::string& context) {
  std::string line = line_in;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto comma = line.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error(context + ": row has no feature field");
  Sample s;
  s.label = parse_double(std::string_view(line).substr(0, comma), context + " label");
  const std::string_view rest = std::string_view(line).substr(comma + 1);
  if (rest.find(':') != std::string_view::npos) {
    std::vector<std::int32_t> indices;
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto end = rest.find(' ', pos);
      if (end == std::string_view::npos) end = rest.size();
      const std::string_view pair = rest.substr(pos, end - pos);
      if (!pair.empty()) {
        const auto colon = pair.find(':');
        if (colon == std::string_view::npos)
          throw std::runtime_error(context + ": sparse pair missing ':'");
        int idx = 0;
        const auto res = std::from_chars(pair.data(), pair.data() + colon, idx);
        if (res.ec != std::errc{} || res.ptr != pair.data() + colon)
          throw std::runtime_error(context + ": bad sparse index");
        indices.push_back(idx);
        values.push_back(parse_double(pair.substr(colon + 1), context + " sparse value"));
      }
      pos = end + 1;
    }
    s.features = FeatureVec::sparse(std::move(indices), std::move(values));
  } else {
    std::vector<double> values;
    std::size_t pos = 0;
    const std::string_view sv = rest;
    while (pos <= sv.size()) {
      auto end = sv.find(',', pos);
      if (end == std::string_view::npos) end = sv.size();
      const std::string_view field = sv.substr(pos, end - pos);
      if (field.empty()) throw std::runtime_error(context + ": empty feature field");
      values.push_back(parse_double(field, context + " feature"));
      if (end == sv.size()) break;
      pos = end + 1;
    }
    s.features = FeatureVec::dense(std::move(values));
  }
  return s;
}

std::vector<Sample> load_sample_file(const fs::path& path, const std::string& context) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(context + ": cannot open " + path.string());
  std::vector<Sample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    samples.push_back(parse_sample_row(line, context + " line " + std::to_string(line_no)));
  }
  return samples;
}

// Recovers the full ModelSpec from (kind, model dim, n_classes) plus the
// dense feature width observed in the data.
ModelSpec infer_spec(ModelKind kind, int dim, int n_classes, int observed_feature_dim) {
  ModelSpec spec;
  spec.kind = kind;
  spec.n_classes = n_classes;
  switch (kind) {
    case ModelKind::LeastSquares:
      if (n_classes != 0)
        throw std::runtime_error("manifest: least_squares requires n_classes = 0");
      spec.feature_dim = dim;
      break;
    case ModelKind::Logistic: {
      if (n_classes < 2) throw std::runtime_error("manifest: logistic requires n_classes >= 2");
      if (dim % n_classes != 0)
        throw std::runtime_error("manifest: dim not divisible by n_classes");
      spec.feature_dim = dim / n_classes - 1;
      if (spec.feature_dim < 1) throw std::runtime_error("manifest: implied feature dim < 1");
      break;
    }
    case ModelKind::MLP1: {
      if (n_classes < 2) throw std::runtime_error("manifest: mlp1 requires n_classes >= 2");
      if (observed_feature_dim < 1)
        throw std::runtime_error("manifest: mlp1 requires dense rows to infer feature dim");
      spec.feature_dim = observed_feature_dim;
      const int denom = observed_feature_dim + 1 + n_classes;
      if ((dim - n_classes) % denom != 0)
        throw std::runtime_error("manifest: dim inconsistent with mlp1 layout");
      spec.hidden = (dim - n_classes) / denom;
      if (spec.hidden < 1) throw std::runtime_error("manifest: implied hidden dim < 1");
      break;
    }
  }
  if (spec.model_dim() != dim)
    throw std::runtime_error("manifest: dim " + std::to_string(dim) +
                             " inconsistent with inferred layout " +
                             std::to_string(spec.model_dim()));
  return spec;
}

int dense_width(const std::vector<Sample>& samples) {
  for (const auto& s : samples)
    if (!s.features.is_sparse()) return static_cast<int>(s.features.dense_values().size());
  return 0;
}

void check_samples(const std::vector<Sample>& samples, const ModelSpec& spec,
                   const std::string& context) {
  for (const auto& s : samples) {
    if (!s.features.is_sparse() &&
        static_cast<int>(s.features.dense_values().size()) != spec.feature_dim)
      throw std::runtime_error(context + ": dense row width " +
                               std::to_string(s.features.dense_values().size()) +
                               " does not match feature dim " +
                               std::to_string(spec.feature_dim));
    if (s.features.min_feature_dim() > spec.feature_dim)
      throw std::runtime_error(context + ": sparse index exceeds feature dim " +
                               std::to_string(spec.feature_dim));
  }
}

}  // namespace

void save_client_dir(const FederatedTask& task, const std::string& dir) {
  task.validate();
  const fs::path root(dir);
  fs::create_directories(root);

  json manifest;
  manifest["model_kind"] = to_string(task.model.kind);
  manifest["dim"] = task.model.model_dim();
  manifest["n_classes"] = task.model.n_classes;
  json ids = json::array();
  for (const auto& c : task.clients) ids.push_back(c.client_id);
  manifest["client_ids"] = ids;
  {
    std::ofstream out(root / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("save_client_dir: cannot write manifest.json");
    out << manifest.dump(2) << '\n';
  }

  for (const auto& c : task.clients) {
    std::ofstream out(root / ("client_" + std::to_string(c.client_id) + ".csv"),
                      std::ios::binary);
    if (!out)
      throw std::runtime_error("save_client_dir: cannot write client " +
                               std::to_string(c.client_id));
    for (const auto& s : c.samples) write_sample_row(out, s);
  }

  std::ofstream out(root / "test.csv", std::ios::binary);
  if (!out) throw std::runtime_error("save_client_dir: cannot write test.csv");
  for (const auto& s : task.test_set) write_sample_row(out, s);
}

FederatedTask load_client_dir(const std::string& dir) {
  const fs::path root(dir);
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path))
    throw std::runtime_error("load_client_dir: missing manifest.json in " + dir);

  json manifest;
  try {
    std::ifstream in(manifest_path, std::ios::binary);
    in >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest: ") + e.what());
  }
  ModelKind kind;
  int dim = 0, n_classes = 0;
  std::vector<int> client_ids;
  try {
    kind = model_kind_from_string(manifest.at("model_kind").get<std::string>());
    dim = manifest.at("dim").get<int>();
    n_classes = manifest.at("n_classes").get<int>();
    client_ids = manifest.at("client_ids").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest: ") + e.what());
  }
  if (dim < 1) throw std::runtime_error("malformed manifest: dim must be positive");
  if (client_ids.empty()) throw std::runtime_error("malformed manifest: no client ids");

  FederatedTask task;
  for (int id : client_ids) {
    const fs::path path = root / ("client_" + std::to_string(id) + ".csv");
    if (!fs::exists(path))
      throw std::runtime_error("load_client_dir: missing data file for client " +
                               std::to_string(id));
    ClientShard shard;
    shard.client_id = id;
    shard.samples = load_sample_file(path, "client " + std::to_string(id));
    if (shard.samples.empty())
      throw std::runtime_error("client " + std::to_string(id) + " has zero samples");
    task.clients.push_back(std::move(shard));
  }

  const fs::path test_path = root / "test.csv";
  if (!fs::exists(test_path)) throw std::runtime_error("load_client_dir: missing test.csv");
  task.test_set = load_sample_file(test_path, "test set");

  int observed = 0;
  for (const auto& c : task.clients)
    if (const int w = dense_width(c.samples); w > 0) {
      observed = w;
      break;
    }
  if (observed == 0) observed = dense_width(task.test_set);

  task.model = infer_spec(kind, dim, n_classes, observed);
  for (const auto& c : task.clients)
    check_samples(c.samples, task.model, "client " + std::to_string(c.client_id));
  check_samples(task.test_set, task.model, "test set");
  task.validate();
  return task;
}

}  // namespace fedsim
