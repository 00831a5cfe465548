/*
 * Copyright 2026 The csrel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "csrel/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include <nlohmann/json.hpp>

#include "csrel/error.hpp"
#include "csrel/format.hpp"
#include "csrel/rng.hpp"

namespace csrel {
namespace {

using nlohmann::json;

constexpr int kDatasetFormatVersion = 1;
constexpr int kReportFormatVersion = 1;

json parse_line(const std::string& path, std::int64_t line_no, const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON object");
  }
  return j;
}

std::int64_t require_int(const json& j, const char* key, const std::string& path,
                         std::int64_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": missing integer field '" + key +
                    "'");
  }
  return it->get<std::int64_t>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw IoError("read failed for " + path);
  }
  return out.str();
}

json parse_json_file(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    throw DataError(path + ": malformed JSON");
  }
  return j;
}

json config_to_json(const SynthConfig& c) {
  return json{{"num_classes", c.num_classes},
              {"zipf_exponent", c.zipf_exponent},
              {"num_images", c.num_images},
              {"pairs_per_image", c.pairs_per_image},
              {"fg_fraction", c.fg_fraction},
              {"feature_dim", c.feature_dim},
              {"center_scale", c.center_scale},
              {"noise_scale", c.noise_scale},
              {"seed", c.seed}};
}

SynthConfig config_from_json(const json& j, const std::string& path) {
  SynthConfig c;
  try {
    c.num_classes = j.at("num_classes").get<int>();
    c.zipf_exponent = j.at("zipf_exponent").get<double>();
    c.num_images = j.at("num_images").get<int>();
    c.pairs_per_image = j.at("pairs_per_image").get<int>();
    c.fg_fraction = j.at("fg_fraction").get<double>();
    c.feature_dim = j.at("feature_dim").get<int>();
    c.center_scale = j.at("center_scale").get<double>();
    c.noise_scale = j.at("noise_scale").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(path + ": bad config block: " + e.what());
  }
  return c;
}

/// Cumulative Zipf weights over classes 1..C: weight(j) proportional to
/// j^(-s). Sampling inverts the CDF with a binary search.
std::vector<double> zipf_cumulative(int num_classes, double exponent) {
  std::vector<double> cum(num_classes);
  double total = 0.0;
  for (int j = 1; j <= num_classes; ++j) {
    total += std::pow(static_cast<double>(j), -exponent);
    cum[j - 1] = total;
  }
  return cum;
}

int zipf_draw(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform01() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) {
    --it;
  }
  return static_cast<int>(it - cum.begin()) + 1;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 2) {
    throw ValidationError("num_classes must be at least 2");
  }
  if (!(zipf_exponent > 0.0) || !std::isfinite(zipf_exponent)) {
    throw ValidationError("zipf_exponent must be positive and finite");
  }
  if (num_images < 1 || pairs_per_image < 1) {
    throw ValidationError("num_images and pairs_per_image must be positive");
  }
  if (!(fg_fraction > 0.0) || !(fg_fraction <= 1.0)) {
    throw ValidationError("fg_fraction must lie in (0, 1]");
  }
  if (feature_dim < 1) {
    throw ValidationError("feature_dim must be positive");
  }
  if (!(center_scale > 0.0) || !(noise_scale > 0.0)) {
    throw ValidationError("center_scale and noise_scale must be positive");
  }
}

std::vector<std::int64_t> Dataset::label_counts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes) + 1, 0);
  for (int label : labels) {
    counts[static_cast<std::size_t>(label)] += 1;
  }
  return counts;
}

std::vector<std::int64_t> Dataset::label_counts(std::span<const int> rows) const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes) + 1, 0);
  for (int row : rows) {
    counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(row)])] += 1;
  }
  return counts;
}

std::vector<RelInstance> Dataset::ground_truth() const {
  std::vector<int> rows(labels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = static_cast<int>(i);
  }
  return ground_truth(rows);
}

std::vector<RelInstance> Dataset::ground_truth(std::span<const int> rows) const {
  std::vector<RelInstance> out;
  for (int row : rows) {
    const auto i = static_cast<std::size_t>(row);
    if (labels[i] == 0) {
      continue;
    }
    RelInstance inst;
    inst.image = image_ids[i];
    inst.subject = subject_ids[i];
    inst.object = object_ids[i];
    inst.predicate = labels[i];
    out.push_back(inst);
  }
  return out;
}

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);

  const int C = config.num_classes;
  const int D = config.feature_dim;
  const std::int64_t n =
      static_cast<std::int64_t>(config.num_images) * config.pairs_per_image;

  // Class centers are drawn once, before any per-pair randomness, so the
  // geometry is fixed under the seed regardless of dataset size.
  Matrix centers(C, D);
  for (int j = 0; j < C; ++j) {
    for (int d = 0; d < D; ++d) {
      centers(j, d) = config.center_scale * rng.normal();
    }
  }

  // Foreground mask and labels are resampled together until every class
  // appears at least once; a rare-class zero count would make downstream
  // statistics undefined.
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  const std::vector<double> cum = zipf_cumulative(C, config.zipf_exponent);
  bool covered = false;
  for (int attempt = 0; attempt < 100 && !covered; ++attempt) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(C) + 1, 0);
    for (std::int64_t i = 0; i < n; ++i) {
      int label = 0;
      if (rng.uniform01() < config.fg_fraction) {
        label = zipf_draw(cum, rng);
      }
      labels[static_cast<std::size_t>(i)] = label;
      counts[static_cast<std::size_t>(label)] += 1;
    }
    covered = true;
    for (int j = 1; j <= C; ++j) {
      if (counts[static_cast<std::size_t>(j)] == 0) {
        covered = false;
        break;
      }
    }
  }
  if (!covered) {
    throw DataError(
        "could not cover every foreground class in 100 attempts; "
        "increase the dataset size or reduce num_classes");
  }

  // Background features come from a single broad Gaussian whose variance
  // equals center variance plus noise variance, so background matches the
  // overall foreground spread instead of forming its own cluster.
  const double bg_scale =
      std::sqrt(config.center_scale * config.center_scale +
                config.noise_scale * config.noise_scale);

  Dataset ds;
  ds.config = config;
  ds.num_classes = C;
  ds.feature_dim = D;
  ds.features = Matrix(static_cast<int>(n), D);
  ds.labels = std::move(labels);
  ds.image_ids.resize(static_cast<std::size_t>(n));
  ds.subject_ids.resize(static_cast<std::size_t>(n));
  ds.object_ids.resize(static_cast<std::size_t>(n));

  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::int64_t image = i / config.pairs_per_image;
    const std::int64_t slot = i % config.pairs_per_image;
    ds.image_ids[idx] = image;
    ds.subject_ids[idx] = 2 * slot;
    ds.object_ids[idx] = 2 * slot + 1;
    const int label = ds.labels[idx];
    for (int d = 0; d < D; ++d) {
      if (label == 0) {
        ds.features(static_cast<int>(i), d) = bg_scale * rng.normal();
      } else {
        ds.features(static_cast<int>(i), d) =
            centers(label - 1, d) + config.noise_scale * rng.normal();
      }
    }
  }
  return ds;
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out.good()) {
      throw IoError("write failed for " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
  }
}

void write_dataset(const Dataset& dataset, const std::string& prefix) {
  const auto n = static_cast<std::size_t>(dataset.size());
  if (dataset.features.rows != dataset.size() || dataset.image_ids.size() != n ||
      dataset.subject_ids.size() != n || dataset.object_ids.size() != n) {
    throw ValidationError("dataset arrays disagree on the number of pairs");
  }

  json meta{{"format_version", kDatasetFormatVersion},
            {"config", config_to_json(dataset.config)},
            {"num_pairs", dataset.size()},
            {"num_classes", dataset.num_classes},
            {"feature_dim", dataset.feature_dim},
            {"label_counts", dataset.label_counts()}};
  atomic_write(prefix + ".meta.json", meta.dump(2) + "\n");

  static_assert(sizeof(double) == 8);
  std::string blob;
  blob.resize(dataset.features.data.size() * sizeof(double));
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(blob.data(), dataset.features.data.data(), blob.size());
  } else {
    for (std::size_t i = 0; i < dataset.features.data.size(); ++i) {
      auto bits = std::bit_cast<std::uint64_t>(dataset.features.data[i]);
      for (int b = 0; b < 8; ++b) {
        blob[i * 8 + static_cast<std::size_t>(b)] =
            static_cast<char>((bits >> (8 * b)) & 0xff);
      }
    }
  }
  atomic_write(prefix + ".features.bin", blob);

  std::string lines;
  for (std::size_t i = 0; i < n; ++i) {
    json rec{{"image", dataset.image_ids[i]},
             {"subject", dataset.subject_ids[i]},
             {"object", dataset.object_ids[i]},
             {"predicate", dataset.labels[i]}};
    lines += rec.dump();
    lines += '\n';
  }
  atomic_write(prefix + ".pairs.jsonl", lines);
}

Dataset load_dataset(const std::string& prefix) {
  const std::string meta_path = prefix + ".meta.json";
  const json meta = parse_json_file(meta_path);
  if (!meta.contains("format_version") ||
      meta["format_version"].get<int>() != kDatasetFormatVersion) {
    throw DataError(meta_path + ": unsupported format version");
  }

  Dataset ds;
  ds.config = config_from_json(meta.at("config"), meta_path);
  try {
    ds.num_classes = meta.at("num_classes").get<int>();
    ds.feature_dim = meta.at("feature_dim").get<int>();
  } catch (const json::exception& e) {
    throw DataError(meta_path + ": " + e.what());
  }
  const auto n = meta.at("num_pairs").get<std::int64_t>();
  if (n < 1 || ds.num_classes < 2 || ds.feature_dim < 1) {
    throw DataError(meta_path + ": implausible dataset dimensions");
  }

  const std::string blob = read_file(prefix + ".features.bin");
  const std::size_t expected =
      static_cast<std::size_t>(n) * static_cast<std::size_t>(ds.feature_dim) * sizeof(double);
  if (blob.size() != expected) {
    throw DataError(prefix + ".features.bin: expected " + std::to_string(expected) +
                    " bytes, found " + std::to_string(blob.size()));
  }
  ds.features = Matrix(static_cast<int>(n), ds.feature_dim);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(ds.features.data.data(), blob.data(), blob.size());
  } else {
    for (std::size_t i = 0; i < ds.features.data.size(); ++i) {
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) {
        bits = (bits << 8) |
               static_cast<std::uint8_t>(blob[i * 8 + static_cast<std::size_t>(b)]);
      }
      ds.features.data[i] = std::bit_cast<double>(bits);
    }
  }

  const std::string pairs_path = prefix + ".pairs.jsonl";
  std::ifstream in(pairs_path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + pairs_path);
  }
  ds.labels.reserve(static_cast<std::size_t>(n));
  ds.image_ids.reserve(static_cast<std::size_t>(n));
  ds.subject_ids.reserve(static_cast<std::size_t>(n));
  ds.object_ids.reserve(static_cast<std::size_t>(n));
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const json rec = parse_line(pairs_path, line_no, line);
    const std::int64_t predicate = require_int(rec, "predicate", pairs_path, line_no);
    if (predicate < 0 || predicate > ds.num_classes) {
      throw DataError(pairs_path + ":" + std::to_string(line_no) + ": predicate " +
                      std::to_string(predicate) + " outside 0.." +
                      std::to_string(ds.num_classes));
    }
    ds.labels.push_back(static_cast<int>(predicate));
    ds.image_ids.push_back(require_int(rec, "image", pairs_path, line_no));
    ds.subject_ids.push_back(require_int(rec, "subject", pairs_path, line_no));
    ds.object_ids.push_back(require_int(rec, "object", pairs_path, line_no));
  }
  if (ds.size() != n) {
    throw DataError(pairs_path + ": expected " + std::to_string(n) + " records, found " +
                    std::to_string(ds.size()));
  }
  return ds;
}

std::vector<RelInstance> load_ground_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::vector<RelInstance> out;
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> seen;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const json rec = parse_line(path, line_no, line);
    RelInstance inst;
    inst.image = require_int(rec, "image", path, line_no);
    inst.subject = require_int(rec, "subject", path, line_no);
    inst.object = require_int(rec, "object", path, line_no);
    const std::int64_t predicate = require_int(rec, "predicate", path, line_no);
    if (predicate < 1) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": ground-truth predicate must be at least 1");
    }
    inst.predicate = static_cast<int>(predicate);
    if (!seen.insert({inst.image, inst.subject, inst.object}).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate pair");
    }
    out.push_back(inst);
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::vector<PredictionRecord> out;
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, int>> seen;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const json rec = parse_line(path, line_no, line);
    PredictionRecord pr;
    pr.instance.image = require_int(rec, "image", path, line_no);
    pr.instance.subject = require_int(rec, "subject", path, line_no);
    pr.instance.object = require_int(rec, "object", path, line_no);
    const std::int64_t predicate = require_int(rec, "predicate", path, line_no);
    if (predicate < 0) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": predicted predicate must be at least 0");
    }
    pr.instance.predicate = static_cast<int>(predicate);
    if (auto it = rec.find("score"); it != rec.end()) {
      if (!it->is_number()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": score must be a number");
      }
      const double s = it->get<double>();
      if (!(s >= 0.0 && s <= 1.0)) {
        throw DataError(path + ":" + std::to_string(line_no) + ": score outside [0, 1]");
      }
      pr.instance.score = s;
    }
    if (auto it = rec.find("scores"); it != rec.end()) {
      if (!it->is_array()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": scores must be an array");
      }
      std::vector<double> scores;
      for (const auto& v : *it) {
        if (!v.is_number()) {
          throw DataError(path + ":" + std::to_string(line_no) +
                          ": scores entries must be numbers");
        }
        const double s = v.get<double>();
        if (!(s >= 0.0 && s <= 1.0)) {
          throw DataError(path + ":" + std::to_string(line_no) +
                          ": scores entry outside [0, 1]");
        }
        scores.push_back(s);
      }
      pr.full_scores = std::move(scores);
    }
    if (!seen.insert({pr.instance.image, pr.instance.subject, pr.instance.object,
                      pr.instance.predicate})
             .second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate prediction");
    }
    out.push_back(std::move(pr));
  }
  return out;
}

void write_ground_truth(const std::vector<RelInstance>& instances, const std::string& path) {
  std::string lines;
  for (const auto& inst : instances) {
    json rec{{"image", inst.image},
             {"subject", inst.subject},
             {"object", inst.object},
             {"predicate", inst.predicate}};
    lines += rec.dump();
    lines += '\n';
  }
  atomic_write(path, lines);
}

void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
  std::string lines;
  for (const auto& pr : records) {
    json rec{{"image", pr.instance.image},
             {"subject", pr.instance.subject},
             {"object", pr.instance.object},
             {"predicate", pr.instance.predicate}};
    if (pr.instance.score.has_value()) {
      rec["score"] = *pr.instance.score;
    }
    if (pr.full_scores.has_value()) {
      rec["scores"] = *pr.full_scores;
    }
    lines += rec.dump();
    lines += '\n';
  }
  atomic_write(path, lines);
}

void write_report(const EvalReport& report, const std::string& prefix) {
  std::string csv = "metric,value\n";
  csv += "k," + std::to_string(report.k) + "\n";
  csv += "theta," + format_double(report.theta) + "\n";
  csv += std::string("nrf,") + (report.nrf ? "1" : "0") + "\n";
  csv += "recall_at_k," + format_double(report.recall_at_k) + "\n";
  csv += "mpcr," + format_double(report.mpcr) + "\n";
  csv += "precision," + format_double(report.precision) + "\n";
  csv += "f1," + format_double(report.f1) + "\n";
  csv += "ece," + format_double(report.ece) + "\n";
  csv += "zero_recall_fraction," + format_double(report.zero_recall_fraction) + "\n";
  atomic_write(prefix + ".metrics.csv", csv);

  const auto& cm = report.confusion;
  std::string grid = "true\\pred";
  for (int cls : cm.class_order) {
    grid += "," + std::to_string(cls);
  }
  grid += "\n";
  const int side = static_cast<int>(cm.class_order.size());
  for (int i = 0; i < side; ++i) {
    grid += std::to_string(cm.class_order[static_cast<std::size_t>(i)]);
    for (int j = 0; j < side; ++j) {
      grid += "," + std::to_string(cm.at(i, j));
    }
    grid += "\n";
  }
  atomic_write(prefix + ".confusion.csv", grid);

  json per_class = json::object();
  for (const auto& [cls, recall] : report.per_class_recall) {
    per_class[std::to_string(cls)] = recall;
  }
  json j{{"format_version", kReportFormatVersion},
         {"k", report.k},
         {"theta", report.theta},
         {"nrf", report.nrf},
         {"recall_at_k", report.recall_at_k},
         {"mpcr", report.mpcr},
         {"precision", report.precision},
         {"f1", report.f1},
         {"ece", report.ece},
         {"zero_recall_fraction", report.zero_recall_fraction},
         {"per_class_recall", per_class},
         {"confusion",
          json{{"class_order", cm.class_order},
               {"has_background", cm.has_background},
               {"counts", cm.counts}}}};
  atomic_write(prefix + ".report.json", j.dump(2) + "\n");
}

EvalReport load_report(const std::string& prefix) {
  const std::string path = prefix + ".report.json";
  const json j = parse_json_file(path);
  EvalReport report;
  try {
    if (j.at("format_version").get<int>() != kReportFormatVersion) {
      throw DataError(path + ": unsupported format version");
    }
    report.k = j.at("k").get<int>();
    report.theta = j.at("theta").get<double>();
    report.nrf = j.at("nrf").get<bool>();
    report.recall_at_k = j.at("recall_at_k").get<double>();
    report.mpcr = j.at("mpcr").get<double>();
    report.precision = j.at("precision").get<double>();
    report.f1 = j.at("f1").get<double>();
    report.ece = j.at("ece").get<double>();
    report.zero_recall_fraction = j.at("zero_recall_fraction").get<double>();
    for (const auto& [key, value] : j.at("per_class_recall").items()) {
      report.per_class_recall[std::stoi(key)] = value.get<double>();
    }
    const json& cj = j.at("confusion");
    report.confusion.class_order = cj.at("class_order").get<std::vector<int>>();
    report.confusion.has_background = cj.at("has_background").get<bool>();
    report.confusion.counts = cj.at("counts").get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return report;
}

}  // namespace csrel
