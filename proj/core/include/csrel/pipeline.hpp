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

#ifndef CSREL_PIPELINE_HPP_
#define CSREL_PIPELINE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "csrel/data_io.hpp"
#include "csrel/metrics.hpp"
#include "csrel/model.hpp"

namespace csrel {

struct EvalOptions {
  int k = 100;         // retained triplets per image
  double theta = 0.5;  // background threshold when nrf is on
  bool nrf = false;
  int bins = 10;       // calibration-error bins over retained scores
};

/// Scores every pair in `rows`, ranks the top k triplets per image
/// (background-filtered when nrf is on), and evaluates them against the
/// ground truth of the same rows. Ground-truth pairs whose triplet was
/// filtered or truncated count as background misses for mPCR and the
/// confusion matrix; precision counts retained triplets only. The
/// calibration error is taken over the retained triplet scores.
EvalReport evaluate_model(const Model& model, const Dataset& dataset, std::span<const int> rows,
                          const EvalOptions& options);

/// The retained ranked triplets themselves, for prediction-file export.
/// `full_scores` carries the whole per-class score row of each triplet.
std::vector<PredictionRecord> rank_dataset(const Model& model, const Dataset& dataset,
                                           std::span<const int> rows, const EvalOptions& options);

struct ReliabilityBin {
  double lo = 0.0;  // bin covers (lo, hi]
  double hi = 0.0;
  std::int64_t count = 0;
  double mean_confidence = 0.0;  // 0 for empty bins
  double accuracy = 0.0;         // 0 for empty bins
};

struct CalibrationReport {
  int bins = 0;
  std::int64_t count = 0;
  double ece = 0.0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  std::vector<ReliabilityBin> reliability;  // exactly `bins` rows
};

/// Per-pair calibration over `rows`: each pair's decision is the highest
/// scoring class over all outputs (background included, no threshold, no
/// top-k), its confidence is that class's score, and correctness compares
/// against the pair label. Matches the calibration-error binning exactly.
CalibrationReport calibrate_model(const Model& model, const Dataset& dataset,
                                  std::span<const int> rows, int bins);

std::vector<int> all_rows(const Dataset& dataset);

}  // namespace csrel

#endif  // CSREL_PIPELINE_HPP_
