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

#ifndef CSREL_METRICS_HPP_
#define CSREL_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace csrel {

/// One subject-predicate-object record. Ground-truth predicates are in
/// {1..C}; predicted ones may be 0 (background / abstain). The
/// (image, subject, object) triple is unique within a set.
struct RelInstance {
  std::int64_t image = 0;
  std::int64_t subject = 0;
  std::int64_t object = 0;
  int predicate = 0;
  std::optional<double> score;
};

/// Counts of (true class, predicted class) over evaluated pairs. Rows and
/// columns share one class order, sorted by descending ground-truth
/// frequency (ties by class id); with a background slot the background
/// class sits wherever its zero frequency places it (last).
struct ConfusionMatrix {
  std::vector<int> class_order;        // class id per row/column position
  std::vector<std::int64_t> counts;    // row-major, size order^2
  bool has_background = false;

  int size() const { return static_cast<int>(class_order.size()); }
  std::int64_t at(int row, int col) const { return counts[static_cast<std::size_t>(row) * class_order.size() + col]; }
  std::int64_t& at(int row, int col) { return counts[static_cast<std::size_t>(row) * class_order.size() + col]; }
  std::int64_t total() const;
  std::int64_t row_sum(int row) const;
};

/// Mean predicate classification recall: the per-class recall averaged
/// over classes with at least one ground-truth instance (macro-averaged
/// recall). Every ground-truth pair must carry exactly one prediction;
/// background counts as a miss.
double mpcr(const std::vector<RelInstance>& predictions, const std::vector<RelInstance>& ground_truth);

/// Fraction of ground-truth triplets exactly matched (image, subject,
/// object, predicate) by a retained prediction. `retained` must already
/// be truncated to the top k per image; the metric pools globally.
double micro_recall_at_k(const std::vector<RelInstance>& retained, const std::vector<RelInstance>& ground_truth,
                         int k);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision over retained triplets, recall over ground truth, and their
/// harmonic mean. Precision is 0 when nothing is retained; F1 is 0 when
/// precision + recall is 0.
PrecisionRecallF1 precision_recall_f1(const std::vector<RelInstance>& retained,
                                      const std::vector<RelInstance>& ground_truth);

/// Expected calibration error over equal-width score bins on (0, 1]:
///   sum_m (|B_m| / n) * |accuracy(B_m) - mean_score(B_m)|.
/// Empty bins contribute 0; a score of 0 lands in the first bin.
double expected_calibration_error(const std::vector<double>& scores, const std::vector<bool>& correct,
                                  int num_bins);

/// Index of the equal-width bin on (0, 1] holding `score`: bin m covers
/// (m/M, (m+1)/M], score 0 maps to bin 0. Shared by the calibration error
/// and reliability tables so the two always bin identically.
int calibration_bin(double score, int num_bins);

/// Fraction of classes that have at least one true instance but a zero
/// diagonal count (classes the predictor never gets right).
double zero_recall_fraction(const ConfusionMatrix& confusion_matrix);

/// Builds the confusion matrix over all ground-truth pairs. Each pair's
/// prediction is looked up by (image, subject, object) and must exist.
/// With `include_background` the matrix gains a slot for class 0 so
/// background decisions are representable; without it any background
/// prediction is out of range.
ConfusionMatrix confusion(const std::vector<RelInstance>& predictions,
                          const std::vector<RelInstance>& ground_truth, bool include_background);

/// Per-class recall for every class with at least one true instance,
/// keyed by class id.
std::map<int, double> per_class_recall(const ConfusionMatrix& confusion_matrix);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool significant = false;  // two-sided at 95%
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom. Each sample needs >= 2 values and their pooled variance must
/// be nonzero.
TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b);

/// One-sample Student's t-test against a fixed reference value.
TTestResult one_sample_t_test(std::span<const double> values, double reference);

/// All evaluation measures for one model on one dataset slice.
struct EvalReport {
  int k = 0;
  double theta = 0.0;
  bool nrf = false;
  double recall_at_k = 0.0;
  double mpcr = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double ece = 0.0;
  double zero_recall_fraction = 0.0;
  std::map<int, double> per_class_recall;
  ConfusionMatrix confusion;
};

}  // namespace csrel

#endif  // CSREL_METRICS_HPP_
