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

#ifndef CSREL_LOSS_HPP_
#define CSREL_LOSS_HPP_

#include <cmath>
#include <optional>
#include <vector>

#include "csrel/cost_model.hpp"
#include "csrel/matrix.hpp"

namespace csrel {

/// Scores are clamped into [eps, 1 - eps] before any logarithm so hard
/// predictions keep the loss finite.
inline constexpr double kDefaultScoreClamp = 1e-7;

/// N x C matrix of per-class scores, every entry strictly inside (0, 1).
class ScoreBatch {
 public:
  /// Wraps raw scores, clamping each entry into [eps, 1 - eps]. Entries
  /// outside [0, 1] are rejected.
  static ScoreBatch from_scores(Matrix scores, double eps = kDefaultScoreClamp);

  /// Applies the logistic sigmoid to pre-activations and keeps them for
  /// gradient use.
  static ScoreBatch from_logits(Matrix logits, double eps = kDefaultScoreClamp);

  int num_examples() const { return values_.rows; }
  int num_classes() const { return values_.cols; }
  const Matrix& values() const { return values_; }
  const std::optional<Matrix>& logits() const { return logits_; }

 private:
  explicit ScoreBatch(Matrix values) : values_(std::move(values)) {}
  Matrix values_;
  std::optional<Matrix> logits_;
};

/// One-hot targets, stored as the per-example class index. Row i of the
/// logical N x C matrix is 1 at labels[i] and 0 elsewhere.
class TargetBatch {
 public:
  static TargetBatch from_labels(std::vector<int> labels, int num_classes);

  /// Validates that every row of `targets` is one-hot and derives labels.
  static TargetBatch from_one_hot(const Matrix& targets);

  int num_examples() const { return static_cast<int>(labels_.size()); }
  int num_classes() const { return num_classes_; }
  int label(int i) const { return labels_[i]; }
  double value(int i, int j) const { return labels_[i] == j ? 1.0 : 0.0; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  TargetBatch(std::vector<int> labels, int num_classes)
      : labels_(std::move(labels)), num_classes_(num_classes) {}
  std::vector<int> labels_;
  int num_classes_ = 0;
};

/// Cost-sensitive binary cross entropy:
///   -(1/N) sum_i sum_j [ u_j t_ij log z_ij + v_{c(i),j} (1 - t_ij) log(1 - z_ij) ]
/// where c(i) is the true class of example i and v_{c(i),.} is the
/// corresponding negative-weight row.
double cs_bce_loss(const ScoreBatch& scores, const TargetBatch& targets, const WeightPair& weights);

/// Gradient of cs_bce_loss with respect to the scores:
///   entry (i,j) = -(1/N) [ u_j t_ij / z_ij - v_{c(i),j} (1 - t_ij) / (1 - z_ij) ].
/// Testing path only; training differentiates through the sigmoid instead.
Matrix cs_bce_grad_scores(const ScoreBatch& scores, const TargetBatch& targets, const WeightPair& weights);

/// Gradient of cs_bce_loss with respect to pre-sigmoid activations:
///   entry (i,j) = -(1/N) [ u_j t_ij (1 - z_ij) - v_{c(i),j} (1 - t_ij) z_ij ]
/// with z = sigmoid(logits). No division by z or 1 - z.
Matrix cs_bce_grad_logits(const Matrix& logits, const TargetBatch& targets, const WeightPair& weights);

/// Unweighted binary cross entropy baseline (independent code path; equals
/// cs_bce_loss with unit weights).
double plain_bce_loss(const ScoreBatch& scores, const TargetBatch& targets);
Matrix plain_bce_grad_logits(const Matrix& logits, const TargetBatch& targets);

/// Categorical cross entropy over softmax(logits).
double softmax_ce_loss(const Matrix& logits, const TargetBatch& targets);

/// Gradient of softmax_ce_loss: (softmax(logits) - T) / N.
Matrix softmax_ce_grad(const Matrix& logits, const TargetBatch& targets);

/// Row-wise softmax with max-shift for stability.
Matrix softmax(const Matrix& logits);

inline double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace csrel

#endif  // CSREL_LOSS_HPP_
