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

#ifndef CSREL_DATA_IO_HPP_
#define CSREL_DATA_IO_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csrel/cost_model.hpp"
#include "csrel/matrix.hpp"
#include "csrel/metrics.hpp"

namespace csrel {

/// Parameters of the synthetic long-tail relationship generator.
struct SynthConfig {
  int num_classes = 20;          // foreground predicate classes
  double zipf_exponent = 1.5;    // class-frequency skew, > 0
  int num_images = 100;
  int pairs_per_image = 50;
  double fg_fraction = 0.06;     // share of pairs carrying a relationship
  int feature_dim = 16;
  double center_scale = 0.5;     // spread of the per-class feature centers
  double noise_scale = 1.0;      // within-class feature noise
  std::uint64_t seed = 1;

  void validate() const;
};

/// Candidate pairs with features, labels (0 = background), and image
/// grouping. Rows are pairs; subject/object ids are unique per image.
struct Dataset {
  SynthConfig config;
  int num_classes = 0;
  int feature_dim = 0;
  Matrix features;                        // N x D
  std::vector<int> labels;                // N, values in {0..C}
  std::vector<std::int64_t> image_ids;    // N
  std::vector<std::int64_t> subject_ids;  // N
  std::vector<std::int64_t> object_ids;   // N

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }

  /// Counts over {0..C} (background at slot 0), taken from `labels` or a
  /// subset of row indices.
  std::vector<std::int64_t> label_counts() const;
  std::vector<std::int64_t> label_counts(std::span<const int> rows) const;

  /// Ground-truth relationship instances (foreground rows only),
  /// optionally restricted to a subset of rows.
  std::vector<RelInstance> ground_truth() const;
  std::vector<RelInstance> ground_truth(std::span<const int> rows) const;
};

/// Draws a synthetic dataset: foreground labels follow a Zipf law over
/// {1..C}, each class gets a fixed random center, features are the center
/// plus isotropic noise, and background pairs come from one broad
/// Gaussian covering all centers. Deterministic under the seed. Label
/// draws that leave a foreground class empty are resampled, with a hard
/// error after 100 attempts.
Dataset generate_synthetic(const SynthConfig& config);

/// Dataset files: <prefix>.meta.json (format version, config echo,
/// empirical counts), <prefix>.features.bin (row-major little-endian
/// float64), <prefix>.pairs.jsonl (one record per pair). Writes are
/// atomic (temp file + rename).
void write_dataset(const Dataset& dataset, const std::string& prefix);
Dataset load_dataset(const std::string& prefix);

/// Line-delimited records, one JSON object per line with fields `image`,
/// `subject`, `object`, `predicate`, optional `score`, optional `scores`
/// (full per-class vector). Ground truth carries no scores.
struct PredictionRecord {
  RelInstance instance;
  std::optional<std::vector<double>> full_scores;
};

std::vector<RelInstance> load_ground_truth(const std::string& path);
std::vector<PredictionRecord> load_predictions(const std::string& path);
void write_ground_truth(const std::vector<RelInstance>& instances, const std::string& path);
void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path);

/// Evaluation report files: <prefix>.metrics.csv (`metric,value` rows),
/// <prefix>.confusion.csv (dense grid with class-order header), and
/// <prefix>.report.json (single structured object).
void write_report(const EvalReport& report, const std::string& prefix);
EvalReport load_report(const std::string& prefix);

/// Writes `contents` to `path` atomically: temp file in the same
/// directory, then rename. No partial file survives a failure.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace csrel

#endif  // CSREL_DATA_IO_HPP_
