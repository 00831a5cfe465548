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

#ifndef CSREL_COST_MODEL_HPP_
#define CSREL_COST_MODEL_HPP_

#include <cstdint>
#include <vector>

#include "csrel/matrix.hpp"

namespace csrel {

/// Per-class example counts with derived priors. Immutable after
/// construction. Class slots are contiguous; when the caller models a
/// background class it conventionally occupies slot 0.
class ClassStats {
 public:
  /// Builds stats from raw counts. Requires at least two classes and every
  /// count >= 1; a zero or negative count is rejected with an
  /// "insufficient class support" error (the cost matrix is undefined for
  /// empty classes and no smoothing is applied).
  static ClassStats from_counts(std::vector<std::int64_t> counts);

  int num_classes() const { return static_cast<int>(counts_.size()); }
  std::int64_t count(int j) const { return counts_[j]; }
  std::int64_t total() const { return total_; }
  double prior(int j) const { return priors_[j]; }

  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<double>& priors() const { return priors_; }

 private:
  ClassStats() = default;
  std::vector<std::int64_t> counts_;
  std::vector<double> priors_;
  std::int64_t total_ = 0;
};

/// Misclassification cost table. Entry (j, k) is the cost of predicting
/// class k for an example of true class j: zero on the diagonal,
/// max(1, log2(N_k / N_j)) elsewhere. Mistaking a rare class for a common
/// one is the expensive direction; weights are floored at one so common
/// classes are not hindered.
class CostMatrix {
 public:
  static CostMatrix from_stats(const ClassStats& stats);

  int num_classes() const { return entries_.rows; }
  double cost(int true_class, int predicted_class) const { return entries_(true_class, predicted_class); }
  const Matrix& entries() const { return entries_; }

 private:
  explicit CostMatrix(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// Loss weights derived from a cost matrix: positive weight u_j is the
/// expected misclassification cost of class j, and the negative weights
/// for an example of true class j are row j of the cost matrix.
class WeightPair {
 public:
  static WeightPair from_cost_matrix(const ClassStats& stats, const CostMatrix& costs);

  /// All-ones weights (zero on negative-row diagonals); with these the
  /// cost-sensitive loss reduces to plain binary cross entropy.
  static WeightPair unit(int num_classes);

  int num_classes() const { return static_cast<int>(positive_.size()); }
  double positive(int j) const { return positive_[j]; }
  /// Negative weight applied to class j when the example's true class is
  /// `true_class`.
  double negative(int true_class, int j) const { return negative_rows_(true_class, j); }
  std::span<const double> negative_row(int true_class) const { return negative_rows_.row(true_class); }

  const std::vector<double>& positive_weights() const { return positive_; }
  const Matrix& negative_rows() const { return negative_rows_; }

 private:
  WeightPair(std::vector<double> positive, Matrix negative_rows)
      : positive_(std::move(positive)), negative_rows_(std::move(negative_rows)) {}
  std::vector<double> positive_;
  Matrix negative_rows_;
};

}  // namespace csrel

#endif  // CSREL_COST_MODEL_HPP_
