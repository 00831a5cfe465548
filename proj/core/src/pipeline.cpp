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

#include "csrel/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "csrel/error.hpp"
#include "csrel/predict.hpp"

namespace csrel {
namespace {

constexpr int kScoreChunkRows = 4096;

void check_model_matches(const Model& model, const Dataset& dataset) {
  if (model.params.in_dim != dataset.feature_dim) {
    throw ValidationError("model expects feature width " + std::to_string(model.params.in_dim) +
                          ", dataset has " + std::to_string(dataset.feature_dim));
  }
  if (model.num_classes() != dataset.num_classes) {
    throw ValidationError("model covers " + std::to_string(model.num_classes()) +
                          " foreground classes, dataset has " +
                          std::to_string(dataset.num_classes));
  }
}

Matrix gather_rows(const Matrix& features, std::span<const int> rows) {
  Matrix out(static_cast<int>(rows.size()), features.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto* src = &features.data[static_cast<std::size_t>(rows[i]) *
                                     static_cast<std::size_t>(features.cols)];
    std::copy(src, src + features.cols, &out.data[i * static_cast<std::size_t>(out.cols)]);
  }
  return out;
}

/// Scores one image's pairs and returns the ranked retained triplets plus
/// each pair's full score row (keyed by pair) for prediction export.
struct ImageRanking {
  std::vector<ScoredTriplet> triplets;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> score_rows;
};

ImageRanking rank_image(const Model& model, const Dataset& dataset, std::span<const int> rows,
                        const EvalOptions& options, bool keep_score_rows) {
  const Matrix chunk = gather_rows(dataset.features, rows);
  const Matrix scores = model.scores(chunk);
  std::vector<ScoredPair> pairs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = static_cast<std::size_t>(rows[i]);
    pairs[i].subject = dataset.subject_ids[row];
    pairs[i].object = dataset.object_ids[row];
    const auto span = scores.row(static_cast<int>(i));
    pairs[i].scores.assign(span.begin(), span.end());
  }
  DecisionRule rule;
  rule.use_nrf = options.nrf;
  rule.filter.theta = options.theta;
  ImageRanking out;
  out.triplets = rank_predictions(pairs, rule, options.k);
  if (keep_score_rows) {
    for (auto& pair : pairs) {
      out.score_rows.emplace(std::make_pair(pair.subject, pair.object),
                             std::move(pair.scores));
    }
  }
  return out;
}

std::map<std::int64_t, std::vector<int>> group_by_image(const Dataset& dataset,
                                                        std::span<const int> rows) {
  std::map<std::int64_t, std::vector<int>> groups;
  for (int row : rows) {
    groups[dataset.image_ids[static_cast<std::size_t>(row)]].push_back(row);
  }
  return groups;
}

}  // namespace

std::vector<int> all_rows(const Dataset& dataset) {
  std::vector<int> rows(static_cast<std::size_t>(dataset.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = static_cast<int>(i);
  }
  return rows;
}

EvalReport evaluate_model(const Model& model, const Dataset& dataset, std::span<const int> rows,
                          const EvalOptions& options) {
  check_model_matches(model, dataset);
  if (rows.empty()) {
    throw ValidationError("empty evaluation set");
  }
  if (options.k < 1) {
    throw ValidationError("k must be at least 1");
  }
  if (!(options.theta >= 0.0 && options.theta <= 1.0)) {
    throw ValidationError("theta must lie in [0, 1]");
  }

  std::vector<RelInstance> retained;
  for (const auto& [image, image_rows] : group_by_image(dataset, rows)) {
    ImageRanking ranking = rank_image(model, dataset, image_rows, options, false);
    for (const auto& t : ranking.triplets) {
      RelInstance inst;
      inst.image = image;
      inst.subject = t.subject;
      inst.object = t.object;
      inst.predicate = t.predicate;
      inst.score = t.score;
      retained.push_back(inst);
    }
  }

  const std::vector<RelInstance> gt = dataset.ground_truth(rows);
  if (gt.empty()) {
    throw DataError("evaluation rows contain no ground-truth relationships");
  }
  if (retained.empty()) {
    throw DataError("no retained predictions; raise theta or k");
  }

  // Ground-truth pairs whose triplet was filtered out or truncated away
  // are scored as background misses.
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, int> decided;
  for (const auto& inst : retained) {
    decided.emplace(std::make_tuple(inst.image, inst.subject, inst.object), inst.predicate);
  }
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, int>> gt_keys;
  std::vector<RelInstance> gt_predictions;
  gt_predictions.reserve(gt.size());
  for (const auto& inst : gt) {
    gt_keys.insert(std::make_tuple(inst.image, inst.subject, inst.object, inst.predicate));
    RelInstance pred = inst;
    pred.score.reset();
    auto it = decided.find(std::make_tuple(inst.image, inst.subject, inst.object));
    pred.predicate = it == decided.end() ? 0 : it->second;
    gt_predictions.push_back(pred);
  }

  std::vector<double> retained_scores;
  std::vector<bool> retained_correct;
  retained_scores.reserve(retained.size());
  retained_correct.reserve(retained.size());
  for (const auto& inst : retained) {
    retained_scores.push_back(*inst.score);
    retained_correct.push_back(gt_keys.contains(
        std::make_tuple(inst.image, inst.subject, inst.object, inst.predicate)));
  }

  EvalReport report;
  report.k = options.k;
  report.theta = options.theta;
  report.nrf = options.nrf;
  report.recall_at_k = micro_recall_at_k(retained, gt, options.k);
  const PrecisionRecallF1 prf = precision_recall_f1(retained, gt);
  report.precision = prf.precision;
  report.f1 = prf.f1;
  report.mpcr = mpcr(gt_predictions, gt);
  report.ece = expected_calibration_error(retained_scores, retained_correct, options.bins);
  report.confusion = confusion(gt_predictions, gt, true);
  report.per_class_recall = per_class_recall(report.confusion);
  report.zero_recall_fraction = zero_recall_fraction(report.confusion);
  return report;
}

std::vector<PredictionRecord> rank_dataset(const Model& model, const Dataset& dataset,
                                           std::span<const int> rows,
                                           const EvalOptions& options) {
  check_model_matches(model, dataset);
  if (rows.empty()) {
    throw ValidationError("empty evaluation set");
  }
  std::vector<PredictionRecord> out;
  for (const auto& [image, image_rows] : group_by_image(dataset, rows)) {
    ImageRanking ranking = rank_image(model, dataset, image_rows, options, true);
    for (const auto& t : ranking.triplets) {
      PredictionRecord rec;
      rec.instance.image = image;
      rec.instance.subject = t.subject;
      rec.instance.object = t.object;
      rec.instance.predicate = t.predicate;
      rec.instance.score = t.score;
      rec.full_scores = ranking.score_rows.at(std::make_pair(t.subject, t.object));
      out.push_back(std::move(rec));
    }
  }
  return out;
}

CalibrationReport calibrate_model(const Model& model, const Dataset& dataset,
                                  std::span<const int> rows, int bins) {
  check_model_matches(model, dataset);
  if (rows.empty()) {
    throw DataError("empty evaluation set");
  }
  if (bins < 1) {
    throw ValidationError("number of bins must be >= 1");
  }

  std::vector<double> confidences;
  std::vector<bool> correct;
  confidences.reserve(rows.size());
  correct.reserve(rows.size());
  for (std::size_t start = 0; start < rows.size(); start += kScoreChunkRows) {
    const std::size_t stop = std::min(rows.size(), start + kScoreChunkRows);
    const auto chunk_rows = rows.subspan(start, stop - start);
    const Matrix scores = model.scores(gather_rows(dataset.features, chunk_rows));
    for (int i = 0; i < scores.rows; ++i) {
      int best = 0;
      for (int j = 1; j < scores.cols; ++j) {
        if (scores(i, j) > scores(i, best)) {
          best = j;
        }
      }
      confidences.push_back(scores(i, best));
      correct.push_back(best ==
                        dataset.labels[static_cast<std::size_t>(chunk_rows[static_cast<std::size_t>(i)])]);
    }
  }

  CalibrationReport report;
  report.bins = bins;
  report.count = static_cast<std::int64_t>(confidences.size());
  report.ece = expected_calibration_error(confidences, correct, bins);

  std::vector<std::int64_t> count(static_cast<std::size_t>(bins), 0);
  std::vector<std::int64_t> hits(static_cast<std::size_t>(bins), 0);
  std::vector<double> score_sum(static_cast<std::size_t>(bins), 0.0);
  std::int64_t total_hits = 0;
  double total_score = 0.0;
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const auto bin = static_cast<std::size_t>(calibration_bin(confidences[i], bins));
    count[bin] += 1;
    score_sum[bin] += confidences[i];
    if (correct[i]) {
      hits[bin] += 1;
      total_hits += 1;
    }
    total_score += confidences[i];
  }
  report.accuracy = static_cast<double>(total_hits) / static_cast<double>(report.count);
  report.mean_confidence = total_score / static_cast<double>(report.count);
  report.reliability.resize(static_cast<std::size_t>(bins));
  for (int m = 0; m < bins; ++m) {
    auto& row = report.reliability[static_cast<std::size_t>(m)];
    row.lo = static_cast<double>(m) / bins;
    row.hi = static_cast<double>(m + 1) / bins;
    row.count = count[static_cast<std::size_t>(m)];
    if (row.count > 0) {
      row.mean_confidence = score_sum[static_cast<std::size_t>(m)] / static_cast<double>(row.count);
      row.accuracy = static_cast<double>(hits[static_cast<std::size_t>(m)]) /
                     static_cast<double>(row.count);
    }
  }
  return report;
}

}  // namespace csrel
