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

#include "csrel/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csrel/error.hpp"

namespace csrel {

namespace {

void check_shapes(int n, int c, const TargetBatch& targets) {
  if (targets.num_examples() != n || targets.num_classes() != c)
    throw ValidationError("score and target batch shapes disagree");
}

void check_weights(int c, const WeightPair& weights) {
  if (weights.num_classes() != c) throw ValidationError("weight pair not dimensioned to the class count");
}

}  // namespace

ScoreBatch ScoreBatch::from_scores(Matrix scores, double eps) {
  if (scores.rows < 1) throw ValidationError("score batch must contain at least one example");
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("clamp epsilon must lie in (0, 0.5)");
  for (double& z : scores.data) {
    if (!(z >= 0.0 && z <= 1.0)) throw ValidationError("scores must lie in [0, 1]");
    z = std::clamp(z, eps, 1.0 - eps);
  }
  return ScoreBatch(std::move(scores));
}

ScoreBatch ScoreBatch::from_logits(Matrix logits, double eps) {
  if (logits.rows < 1) throw ValidationError("score batch must contain at least one example");
  if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("clamp epsilon must lie in (0, 0.5)");
  Matrix values(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.data.size(); ++i) {
    values.data[i] = std::clamp(sigmoid(logits.data[i]), eps, 1.0 - eps);
  }
  ScoreBatch batch(std::move(values));
  batch.logits_ = std::move(logits);
  return batch;
}

TargetBatch TargetBatch::from_labels(std::vector<int> labels, int num_classes) {
  if (labels.empty()) throw ValidationError("target batch must contain at least one example");
  if (num_classes < 1) throw ValidationError("target batch requires at least one class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes)
      throw ValidationError("label " + std::to_string(y) + " out of range [0, " + std::to_string(num_classes) + ")");
  }
  return TargetBatch(std::move(labels), num_classes);
}

TargetBatch TargetBatch::from_one_hot(const Matrix& targets) {
  if (targets.rows < 1) throw ValidationError("target batch must contain at least one example");
  std::vector<int> labels(targets.rows, -1);
  for (int i = 0; i < targets.rows; ++i) {
    for (int j = 0; j < targets.cols; ++j) {
      const double t = targets(i, j);
      if (t == 1.0) {
        if (labels[i] >= 0) throw ValidationError("target row " + std::to_string(i) + " is not one-hot");
        labels[i] = j;
      } else if (t != 0.0) {
        throw ValidationError("target row " + std::to_string(i) + " is not one-hot");
      }
    }
    if (labels[i] < 0) throw ValidationError("target row " + std::to_string(i) + " is not one-hot");
  }
  return TargetBatch(std::move(labels), targets.cols);
}

double cs_bce_loss(const ScoreBatch& scores, const TargetBatch& targets, const WeightPair& weights) {
  const int n = scores.num_examples();
  const int c = scores.num_classes();
  check_shapes(n, c, targets);
  check_weights(c, weights);
  const Matrix& z = scores.values();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int label = targets.label(i);
    for (int j = 0; j < c; ++j) {
      if (j == label) {
        total += weights.positive(j) * std::log(z(i, j));
      } else {
        total += weights.negative(label, j) * std::log(1.0 - z(i, j));
      }
    }
  }
  return -total / n;
}

Matrix cs_bce_grad_scores(const ScoreBatch& scores, const TargetBatch& targets, const WeightPair& weights) {
  const int n = scores.num_examples();
  const int c = scores.num_classes();
  check_shapes(n, c, targets);
  check_weights(c, weights);
  const Matrix& z = scores.values();
  Matrix grad(n, c);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const int label = targets.label(i);
    for (int j = 0; j < c; ++j) {
      if (j == label) {
        grad(i, j) = -inv_n * weights.positive(j) / z(i, j);
      } else {
        grad(i, j) = inv_n * weights.negative(label, j) / (1.0 - z(i, j));
      }
    }
  }
  return grad;
}

Matrix cs_bce_grad_logits(const Matrix& logits, const TargetBatch& targets, const WeightPair& weights) {
  const int n = logits.rows;
  const int c = logits.cols;
  if (n < 1) throw ValidationError("logit batch must contain at least one example");
  check_shapes(n, c, targets);
  check_weights(c, weights);
  Matrix grad(n, c);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const int label = targets.label(i);
    for (int j = 0; j < c; ++j) {
      const double z = sigmoid(logits(i, j));
      if (j == label) {
        grad(i, j) = -inv_n * weights.positive(j) * (1.0 - z);
      } else {
        grad(i, j) = inv_n * weights.negative(label, j) * z;
      }
    }
  }
  return grad;
}

double plain_bce_loss(const ScoreBatch& scores, const TargetBatch& targets) {
  const int n = scores.num_examples();
  const int c = scores.num_classes();
  check_shapes(n, c, targets);
  const Matrix& z = scores.values();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int label = targets.label(i);
    for (int j = 0; j < c; ++j) {
      total += (j == label) ? std::log(z(i, j)) : std::log(1.0 - z(i, j));
    }
  }
  return -total / n;
}

Matrix plain_bce_grad_logits(const Matrix& logits, const TargetBatch& targets) {
  const int n = logits.rows;
  const int c = logits.cols;
  if (n < 1) throw ValidationError("logit batch must contain at least one example");
  check_shapes(n, c, targets);
  Matrix grad(n, c);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const int label = targets.label(i);
    for (int j = 0; j < c; ++j) {
      grad(i, j) = inv_n * (sigmoid(logits(i, j)) - (j == label ? 1.0 : 0.0));
    }
  }
  return grad;
}

Matrix softmax(const Matrix& logits) {
  Matrix probs(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    double mx = logits(i, 0);
    for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, logits(i, j));
    double denom = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      probs(i, j) = std::exp(logits(i, j) - mx);
      denom += probs(i, j);
    }
    for (int j = 0; j < logits.cols; ++j) probs(i, j) /= denom;
  }
  return probs;
}

double softmax_ce_loss(const Matrix& logits, const TargetBatch& targets) {
  const int n = logits.rows;
  const int c = logits.cols;
  if (n < 1) throw ValidationError("logit batch must contain at least one example");
  check_shapes(n, c, targets);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double mx = logits(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, logits(i, j));
    double denom = 0.0;
    for (int j = 0; j < c; ++j) denom += std::exp(logits(i, j) - mx);
    total += logits(i, targets.label(i)) - mx - std::log(denom);
  }
  return -total / n;
}

Matrix softmax_ce_grad(const Matrix& logits, const TargetBatch& targets) {
  const int n = logits.rows;
  const int c = logits.cols;
  if (n < 1) throw ValidationError("logit batch must contain at least one example");
  check_shapes(n, c, targets);
  Matrix grad = softmax(logits);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    grad(i, targets.label(i)) -= 1.0;
    for (int j = 0; j < c; ++j) grad(i, j) *= inv_n;
  }
  return grad;
}

}  // namespace csrel
