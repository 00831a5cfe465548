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

#ifndef CSREL_MODEL_HPP_
#define CSREL_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csrel/cost_model.hpp"
#include "csrel/matrix.hpp"
#include "csrel/rng.hpp"

namespace csrel {

enum class TrainMode {
  kPlainBce,       // per-class sigmoid, uniform weights
  kCostSensitive,  // per-class sigmoid, count-derived weights
  kSoftmaxCe,      // softmax over all classes
};

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

/// Affine map D -> C+1, or affine-rectifier-affine map D -> H -> C+1 when
/// hidden_dim > 0. Output slot 0 is the background class. The same shapes
/// double as the gradient container for sgd_step.
struct ClassifierParams {
  int in_dim = 0;
  int hidden_dim = 0;  // 0 = linear
  int out_dim = 0;
  Matrix w1;               // in x hidden, or in x out when linear
  std::vector<double> b1;  // hidden, or out when linear
  Matrix w2;               // hidden x out; empty when linear
  std::vector<double> b2;  // out; empty when linear

  static ClassifierParams zeros(int in_dim, int hidden_dim, int out_dim);

  /// Fills weights uniformly in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases
  /// zero. Draw order is w1 row-major, then w2 row-major.
  void init_uniform(Rng& rng);

  /// Raw logits, N x out_dim. Throws on feature-width mismatch.
  Matrix forward(const Matrix& features) const;

  /// Gradients of a scalar loss with respect to every parameter, given
  /// the gradient with respect to the logits.
  ClassifierParams backward(const Matrix& features, const Matrix& grad_logits) const;
};

/// params <- params - lr * grad, elementwise; throws on shape mismatch or
/// non-finite gradient entries.
void sgd_step(ClassifierParams& params, const ClassifierParams& grad, double learning_rate);

struct TrainConfig {
  TrainMode mode = TrainMode::kCostSensitive;
  double learning_rate = 0.1;
  int epochs = 50;
  int batch_size = 0;  // 0 = full training split per step
  std::uint64_t seed = 1;
  int hidden_dim = 0;  // 0 = linear
  double clamp_eps = 1e-7;

  void validate() const;
};

/// Per-epoch training record. Holdout entries are NaN when the held-out
/// split is empty or has no foreground instances.
struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double holdout_loss = 0.0;
  double holdout_mpcr = 0.0;
  double holdout_micro_recall = 0.0;
};

struct Model {
  ClassifierParams params;
  TrainConfig config;

  int num_classes() const { return params.out_dim - 1; }

  /// Per-class probabilities, N x out_dim: sigmoid per entry in the
  /// binary-cross-entropy modes, softmax rows in softmax mode. Sigmoid
  /// outputs are clamped to [clamp_eps, 1 - clamp_eps].
  Matrix scores(const Matrix& features) const;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

/// The train/holdout row split used by `train` for the same (n, seed):
/// one seeded shuffle of 0..n-1, last 20% held out. Exposed so a trained
/// model can be evaluated on exactly the rows it never saw.
struct SplitRows {
  std::vector<int> train;
  std::vector<int> holdout;
};
SplitRows split_rows(std::int64_t n, std::uint64_t seed);

/// Gradient-descent training loop. Labels take values in {0..num_classes}
/// with 0 = background. The row order is shuffled once by the seed and the
/// last 20% is held out for the per-epoch history; only the remaining 80%
/// receives gradient updates. In cost-sensitive mode `stats` is required
/// and should be computed from the training labels. Fully deterministic
/// given (config, features, labels). Throws on divergence ("non-finite
/// loss").
TrainResult train(const Matrix& features, const std::vector<int>& labels, int num_classes,
                  const TrainConfig& config, const std::optional<ClassStats>& stats);

/// Model checkpoint, versioned text format: a header line, `key value`
/// config lines, then one `tensor <name> <rows> <cols>` block per
/// parameter array with %.17g doubles (exact round trip).
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace csrel

#endif  // CSREL_MODEL_HPP_
