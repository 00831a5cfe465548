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

#include "csrel/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "csrel/data_io.hpp"
#include "csrel/error.hpp"
#include "csrel/format.hpp"
#include "csrel/loss.hpp"

namespace csrel {
namespace {

constexpr int kModelFormatVersion = 1;
constexpr int kEvalChunkRows = 4096;

Matrix gather_rows(const Matrix& features, std::span<const int> rows) {
  Matrix out(static_cast<int>(rows.size()), features.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto* src = &features.data[static_cast<std::size_t>(rows[i]) *
                                     static_cast<std::size_t>(features.cols)];
    std::copy(src, src + features.cols, &out.data[i * static_cast<std::size_t>(out.cols)]);
  }
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const int> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i] = labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

/// Loss and logit gradient for one batch under the configured mode.
struct BatchLoss {
  double loss = 0.0;
  Matrix grad_logits;
};

double batch_loss_only(TrainMode mode, const Matrix& logits, const TargetBatch& targets,
                       const WeightPair* weights, double clamp_eps) {
  switch (mode) {
    case TrainMode::kPlainBce:
      return plain_bce_loss(ScoreBatch::from_logits(logits, clamp_eps), targets);
    case TrainMode::kCostSensitive:
      return cs_bce_loss(ScoreBatch::from_logits(logits, clamp_eps), targets, *weights);
    case TrainMode::kSoftmaxCe:
      return softmax_ce_loss(logits, targets);
  }
  throw ValidationError("unknown training mode");
}

BatchLoss batch_loss_grad(TrainMode mode, const Matrix& logits, const TargetBatch& targets,
                          const WeightPair* weights, double clamp_eps) {
  BatchLoss out;
  switch (mode) {
    case TrainMode::kPlainBce: {
      out.loss = plain_bce_loss(ScoreBatch::from_logits(logits, clamp_eps), targets);
      out.grad_logits = plain_bce_grad_logits(logits, targets);
      return out;
    }
    case TrainMode::kCostSensitive: {
      out.loss = cs_bce_loss(ScoreBatch::from_logits(logits, clamp_eps), targets, *weights);
      out.grad_logits = cs_bce_grad_logits(logits, targets, *weights);
      return out;
    }
    case TrainMode::kSoftmaxCe: {
      out.loss = softmax_ce_loss(logits, targets);
      out.grad_logits = softmax_ce_grad(logits, targets);
      return out;
    }
  }
  throw ValidationError("unknown training mode");
}

/// Post-epoch evaluation of one row subset, chunked so desk-scale splits
/// never materialize a full score matrix. The loss is the row-weighted
/// mean of chunk losses, which equals the whole-split mean.
struct SplitEval {
  double loss = std::numeric_limits<double>::quiet_NaN();
  double mpcr = std::numeric_limits<double>::quiet_NaN();
  double micro_recall = std::numeric_limits<double>::quiet_NaN();
};

SplitEval eval_split(const ClassifierParams& params, TrainMode mode, double clamp_eps,
                     const WeightPair* weights, const Matrix& features,
                     const std::vector<int>& labels, std::span<const int> rows,
                     int num_classes) {
  SplitEval out;
  if (rows.empty()) {
    return out;
  }
  const auto total_rows = static_cast<double>(rows.size());
  double loss_sum = 0.0;
  std::vector<std::int64_t> class_total(static_cast<std::size_t>(num_classes) + 1, 0);
  std::vector<std::int64_t> class_correct(static_cast<std::size_t>(num_classes) + 1, 0);
  for (std::size_t start = 0; start < rows.size(); start += kEvalChunkRows) {
    const std::size_t stop = std::min(rows.size(), start + kEvalChunkRows);
    const auto chunk_rows = rows.subspan(start, stop - start);
    const Matrix chunk = gather_rows(features, chunk_rows);
    std::vector<int> chunk_labels = gather_labels(labels, chunk_rows);
    const Matrix logits = params.forward(chunk);
    const TargetBatch targets =
        TargetBatch::from_labels(chunk_labels, num_classes + 1);
    loss_sum += batch_loss_only(mode, logits, targets, weights, clamp_eps) *
                static_cast<double>(chunk_rows.size());
    for (int i = 0; i < logits.rows; ++i) {
      int best = 0;
      for (int j = 1; j < logits.cols; ++j) {
        if (logits(i, j) > logits(i, best)) {
          best = j;
        }
      }
      const auto label = static_cast<std::size_t>(chunk_labels[static_cast<std::size_t>(i)]);
      class_total[label] += 1;
      if (best == static_cast<int>(label)) {
        class_correct[label] += 1;
      }
    }
  }
  out.loss = loss_sum / total_rows;

  std::int64_t fg_total = 0;
  std::int64_t fg_correct = 0;
  double recall_sum = 0.0;
  int classes_present = 0;
  for (int j = 1; j <= num_classes; ++j) {
    const auto total = class_total[static_cast<std::size_t>(j)];
    if (total == 0) {
      continue;
    }
    fg_total += total;
    fg_correct += class_correct[static_cast<std::size_t>(j)];
    recall_sum += static_cast<double>(class_correct[static_cast<std::size_t>(j)]) /
                  static_cast<double>(total);
    classes_present += 1;
  }
  if (classes_present > 0) {
    out.mpcr = recall_sum / static_cast<double>(classes_present);
    out.micro_recall = static_cast<double>(fg_correct) / static_cast<double>(fg_total);
  }
  return out;
}

template <typename Exception = ValidationError>
void require_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Exception(std::string("non-finite ") + what);
    }
  }
}

SplitRows split_rows_with(Rng& rng, std::int64_t n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  const auto holdout_size = static_cast<std::size_t>(n / 5);
  const std::size_t train_size = perm.size() - holdout_size;
  SplitRows split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_size));
  split.holdout.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_size), perm.end());
  return split;
}

}  // namespace

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kPlainBce:
      return "plain_bce";
    case TrainMode::kCostSensitive:
      return "cost_sensitive";
    case TrainMode::kSoftmaxCe:
      return "softmax_ce";
  }
  throw ValidationError("unknown training mode");
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "plain_bce") {
    return TrainMode::kPlainBce;
  }
  if (name == "cost_sensitive") {
    return TrainMode::kCostSensitive;
  }
  if (name == "softmax_ce") {
    return TrainMode::kSoftmaxCe;
  }
  throw ValidationError("unknown training mode '" + name + "'");
}

ClassifierParams ClassifierParams::zeros(int in_dim, int hidden_dim, int out_dim) {
  if (in_dim < 1 || out_dim < 1 || hidden_dim < 0) {
    throw ValidationError("classifier dimensions must be positive");
  }
  ClassifierParams p;
  p.in_dim = in_dim;
  p.hidden_dim = hidden_dim;
  p.out_dim = out_dim;
  if (hidden_dim == 0) {
    p.w1 = Matrix(in_dim, out_dim);
    p.b1.assign(static_cast<std::size_t>(out_dim), 0.0);
  } else {
    p.w1 = Matrix(in_dim, hidden_dim);
    p.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    p.w2 = Matrix(hidden_dim, out_dim);
    p.b2.assign(static_cast<std::size_t>(out_dim), 0.0);
  }
  return p;
}

void ClassifierParams::init_uniform(Rng& rng) {
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& w : w1.data) {
    w = rng.uniform(-bound1, bound1);
  }
  std::fill(b1.begin(), b1.end(), 0.0);
  if (hidden_dim > 0) {
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (double& w : w2.data) {
      w = rng.uniform(-bound2, bound2);
    }
    std::fill(b2.begin(), b2.end(), 0.0);
  }
}

Matrix ClassifierParams::forward(const Matrix& features) const {
  if (features.cols != in_dim) {
    throw ValidationError("feature width " + std::to_string(features.cols) +
                          " does not match model input width " + std::to_string(in_dim));
  }
  auto affine = [](const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix y(x.rows, w.cols);
    for (int i = 0; i < x.rows; ++i) {
      for (int j = 0; j < w.cols; ++j) {
        y(i, j) = b[static_cast<std::size_t>(j)];
      }
      for (int d = 0; d < x.cols; ++d) {
        const double xv = x(i, d);
        if (xv == 0.0) {
          continue;
        }
        for (int j = 0; j < w.cols; ++j) {
          y(i, j) += xv * w(d, j);
        }
      }
    }
    return y;
  };
  if (hidden_dim == 0) {
    return affine(features, w1, b1);
  }
  Matrix h = affine(features, w1, b1);
  for (double& v : h.data) {
    v = std::max(0.0, v);
  }
  return affine(h, w2, b2);
}

ClassifierParams ClassifierParams::backward(const Matrix& features,
                                            const Matrix& grad_logits) const {
  if (features.cols != in_dim || grad_logits.cols != out_dim ||
      features.rows != grad_logits.rows) {
    throw ValidationError("backward shapes do not match the model");
  }
  auto matmul_at_b = [](const Matrix& a, const Matrix& b) {
    // a^T * b, accumulated row by row for cache-friendly access.
    Matrix y(a.cols, b.cols);
    for (int i = 0; i < a.rows; ++i) {
      for (int d = 0; d < a.cols; ++d) {
        const double av = a(i, d);
        if (av == 0.0) {
          continue;
        }
        for (int j = 0; j < b.cols; ++j) {
          y(d, j) += av * b(i, j);
        }
      }
    }
    return y;
  };
  auto colsum = [](const Matrix& a) {
    std::vector<double> s(static_cast<std::size_t>(a.cols), 0.0);
    for (int i = 0; i < a.rows; ++i) {
      for (int j = 0; j < a.cols; ++j) {
        s[static_cast<std::size_t>(j)] += a(i, j);
      }
    }
    return s;
  };

  ClassifierParams grad = zeros(in_dim, hidden_dim, out_dim);
  if (hidden_dim == 0) {
    grad.w1 = matmul_at_b(features, grad_logits);
    grad.b1 = colsum(grad_logits);
    return grad;
  }

  Matrix a1(features.rows, hidden_dim);
  for (int i = 0; i < features.rows; ++i) {
    for (int j = 0; j < hidden_dim; ++j) {
      a1(i, j) = b1[static_cast<std::size_t>(j)];
    }
    for (int d = 0; d < features.cols; ++d) {
      const double xv = features(i, d);
      if (xv == 0.0) {
        continue;
      }
      for (int j = 0; j < hidden_dim; ++j) {
        a1(i, j) += xv * w1(d, j);
      }
    }
  }
  Matrix h = a1;
  for (double& v : h.data) {
    v = std::max(0.0, v);
  }
  grad.w2 = matmul_at_b(h, grad_logits);
  grad.b2 = colsum(grad_logits);

  Matrix da1(features.rows, hidden_dim);
  for (int i = 0; i < features.rows; ++i) {
    for (int d = 0; d < hidden_dim; ++d) {
      if (a1(i, d) <= 0.0) {
        continue;
      }
      double acc = 0.0;
      for (int j = 0; j < out_dim; ++j) {
        acc += grad_logits(i, j) * w2(d, j);
      }
      da1(i, d) = acc;
    }
  }
  grad.w1 = matmul_at_b(features, da1);
  grad.b1 = colsum(da1);
  return grad;
}

void sgd_step(ClassifierParams& params, const ClassifierParams& grad, double learning_rate) {
  if (grad.in_dim != params.in_dim || grad.hidden_dim != params.hidden_dim ||
      grad.out_dim != params.out_dim) {
    throw ValidationError("gradient shapes do not match the parameters");
  }
  if (!std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be finite");
  }
  require_finite(grad.w1.data, "gradient");
  require_finite(grad.b1, "gradient");
  require_finite(grad.w2.data, "gradient");
  require_finite(grad.b2, "gradient");
  auto update = [learning_rate](std::vector<double>& p, const std::vector<double>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= learning_rate * g[i];
    }
  };
  update(params.w1.data, grad.w1.data);
  update(params.b1, grad.b1);
  update(params.w2.data, grad.w2.data);
  update(params.b2, grad.b2);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be positive and finite");
  }
  if (epochs < 1) {
    throw ValidationError("epochs must be at least 1");
  }
  if (batch_size < 0) {
    throw ValidationError("batch size must be nonnegative (0 = full batch)");
  }
  if (hidden_dim < 0) {
    throw ValidationError("hidden width must be nonnegative");
  }
  if (!(clamp_eps > 0.0) || !(clamp_eps < 0.5)) {
    throw ValidationError("clamp epsilon must lie in (0, 0.5)");
  }
}

SplitRows split_rows(std::int64_t n, std::uint64_t seed) {
  if (n < 1) {
    throw ValidationError("cannot split an empty row set");
  }
  Rng rng(seed);
  return split_rows_with(rng, n);
}

Matrix Model::scores(const Matrix& features) const {
  const Matrix logits = params.forward(features);
  if (config.mode == TrainMode::kSoftmaxCe) {
    return softmax(logits);
  }
  return ScoreBatch::from_logits(logits, config.clamp_eps).values();
}

TrainResult train(const Matrix& features, const std::vector<int>& labels, int num_classes,
                  const TrainConfig& config, const std::optional<ClassStats>& stats) {
  config.validate();
  if (num_classes < 1) {
    throw ValidationError("num_classes must be at least 1");
  }
  const auto n = static_cast<std::int64_t>(labels.size());
  if (n == 0) {
    throw ValidationError("training set is empty");
  }
  if (features.rows != n) {
    throw ValidationError("features and labels disagree on the number of rows");
  }
  for (int label : labels) {
    if (label < 0 || label > num_classes) {
      throw ValidationError("label " + std::to_string(label) + " outside 0.." +
                            std::to_string(num_classes));
    }
  }

  std::optional<WeightPair> weights;
  if (config.mode == TrainMode::kCostSensitive) {
    if (!stats.has_value()) {
      throw ValidationError("cost-sensitive training requires class statistics");
    }
    if (stats->num_classes() != num_classes + 1) {
      throw ValidationError("class statistics cover " + std::to_string(stats->num_classes()) +
                            " classes, expected " + std::to_string(num_classes + 1));
    }
    weights = WeightPair::from_cost_matrix(*stats, CostMatrix::from_stats(*stats));
  }
  const WeightPair* weights_ptr = weights.has_value() ? &*weights : nullptr;

  // RNG draw order is part of the determinism contract: one shuffle that
  // fixes the holdout split, then the parameter init, then one reshuffle
  // of the training rows per epoch.
  Rng rng(config.seed);
  SplitRows split = split_rows_with(rng, n);
  std::vector<int> train_rows = std::move(split.train);
  const std::vector<int> holdout_rows = std::move(split.holdout);
  const std::size_t train_size = train_rows.size();
  if (train_size == 0) {
    throw ValidationError("training split is empty");
  }

  ClassifierParams params =
      ClassifierParams::zeros(features.cols, config.hidden_dim, num_classes + 1);
  params.init_uniform(rng);

  const std::size_t batch =
      config.batch_size == 0 ? train_size
                             : std::min(static_cast<std::size_t>(config.batch_size), train_size);

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(train_rows);
    for (std::size_t start = 0; start < train_size; start += batch) {
      const std::size_t stop = std::min(train_size, start + batch);
      const auto rows = std::span<const int>(train_rows).subspan(start, stop - start);
      const Matrix bx = gather_rows(features, rows);
      const TargetBatch targets =
          TargetBatch::from_labels(gather_labels(labels, rows), num_classes + 1);
      const Matrix logits = params.forward(bx);
      BatchLoss bl = batch_loss_grad(config.mode, logits, targets, weights_ptr,
                                     config.clamp_eps);
      if (!std::isfinite(bl.loss)) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch));
      }
      const ClassifierParams grads = params.backward(bx, bl.grad_logits);
      sgd_step(params, grads, config.learning_rate);
    }

    const SplitEval train_eval = eval_split(params, config.mode, config.clamp_eps, weights_ptr,
                                            features, labels, train_rows, num_classes);
    const SplitEval holdout_eval = eval_split(params, config.mode, config.clamp_eps,
                                              weights_ptr, features, labels, holdout_rows,
                                              num_classes);
    if (!std::isfinite(train_eval.loss)) {
      throw Error("non-finite loss at epoch " + std::to_string(epoch));
    }
    EpochStats es;
    es.epoch = epoch;
    es.train_loss = train_eval.loss;
    es.holdout_loss = holdout_eval.loss;
    es.holdout_mpcr = holdout_eval.mpcr;
    es.holdout_micro_recall = holdout_eval.micro_recall;
    result.history.push_back(es);
  }

  result.model.params = std::move(params);
  result.model.config = config;
  return result;
}

void save_model(const Model& model, const std::string& path) {
  const ClassifierParams& p = model.params;
  std::string out;
  out += "csrel-model " + std::to_string(kModelFormatVersion) + "\n";
  out += "mode " + to_string(model.config.mode) + "\n";
  out += "learning_rate " + format_double(model.config.learning_rate) + "\n";
  out += "epochs " + std::to_string(model.config.epochs) + "\n";
  out += "batch_size " + std::to_string(model.config.batch_size) + "\n";
  out += "seed " + std::to_string(model.config.seed) + "\n";
  out += "hidden_dim " + std::to_string(model.config.hidden_dim) + "\n";
  out += "clamp_eps " + format_double(model.config.clamp_eps) + "\n";
  out += "in_dim " + std::to_string(p.in_dim) + "\n";
  out += "out_dim " + std::to_string(p.out_dim) + "\n";
  auto emit_tensor = [&out](const std::string& name, int rows, int cols,
                            const std::vector<double>& data) {
    out += "tensor " + name + " " + std::to_string(rows) + " " + std::to_string(cols) + "\n";
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        out += format_double(data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
                               static_cast<std::size_t>(j)]);
        out += (j + 1 == cols) ? "\n" : " ";
      }
    }
  };
  emit_tensor("w1", p.w1.rows, p.w1.cols, p.w1.data);
  emit_tensor("b1", 1, static_cast<int>(p.b1.size()), p.b1);
  if (p.hidden_dim > 0) {
    emit_tensor("w2", p.w2.rows, p.w2.cols, p.w2.data);
    emit_tensor("b2", 1, static_cast<int>(p.b2.size()), p.b2);
  }
  out += "end\n";
  atomic_write(path, out);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();

  auto fail = [&path](const std::string& why) { return DataError(path + ": " + why); };

  std::string word;
  if (!(buf >> word) || word != "csrel-model") {
    throw fail("not a model checkpoint");
  }
  int version = 0;
  if (!(buf >> version) || version != kModelFormatVersion) {
    throw fail("unsupported checkpoint version");
  }

  Model model;
  int in_dim = -1;
  int out_dim = -1;
  std::vector<std::pair<std::string, Matrix>> tensors;
  while (buf >> word) {
    if (word == "end") {
      break;
    }
    if (word == "mode") {
      std::string name;
      if (!(buf >> name)) {
        throw fail("truncated mode");
      }
      model.config.mode = train_mode_from_string(name);
    } else if (word == "learning_rate") {
      if (!(buf >> model.config.learning_rate)) throw fail("bad learning_rate");
    } else if (word == "epochs") {
      if (!(buf >> model.config.epochs)) throw fail("bad epochs");
    } else if (word == "batch_size") {
      if (!(buf >> model.config.batch_size)) throw fail("bad batch_size");
    } else if (word == "seed") {
      if (!(buf >> model.config.seed)) throw fail("bad seed");
    } else if (word == "hidden_dim") {
      if (!(buf >> model.config.hidden_dim)) throw fail("bad hidden_dim");
    } else if (word == "clamp_eps") {
      if (!(buf >> model.config.clamp_eps)) throw fail("bad clamp_eps");
    } else if (word == "in_dim") {
      if (!(buf >> in_dim)) throw fail("bad in_dim");
    } else if (word == "out_dim") {
      if (!(buf >> out_dim)) throw fail("bad out_dim");
    } else if (word == "tensor") {
      std::string name;
      int rows = 0;
      int cols = 0;
      if (!(buf >> name >> rows >> cols) || rows < 1 || cols < 1) {
        throw fail("bad tensor header");
      }
      Matrix t(rows, cols);
      for (double& v : t.data) {
        if (!(buf >> v)) {
          throw fail("truncated tensor " + name);
        }
      }
      tensors.emplace_back(name, std::move(t));
    } else {
      throw fail("unknown field '" + word + "'");
    }
  }
  if (word != "end") {
    throw fail("missing end marker");
  }
  if (in_dim < 1 || out_dim < 2) {
    throw fail("missing or implausible dimensions");
  }

  model.params = ClassifierParams::zeros(in_dim, model.config.hidden_dim, out_dim);
  auto take = [&tensors, &fail](const std::string& name, int rows, int cols) -> Matrix {
    for (auto& [tname, t] : tensors) {
      if (tname == name) {
        if (t.rows != rows || t.cols != cols) {
          throw fail("tensor " + name + " has unexpected shape");
        }
        return std::move(t);
      }
    }
    throw fail("missing tensor " + name);
  };
  model.params.w1 = take("w1", model.params.w1.rows, model.params.w1.cols);
  model.params.b1 = take("b1", 1, static_cast<int>(model.params.b1.size())).data;
  if (model.config.hidden_dim > 0) {
    model.params.w2 = take("w2", model.params.w2.rows, model.params.w2.cols);
    model.params.b2 = take("b2", 1, static_cast<int>(model.params.b2.size())).data;
  }
  model.config.validate();
  require_finite<DataError>(model.params.w1.data, "checkpoint parameter");
  require_finite<DataError>(model.params.b1, "checkpoint parameter");
  require_finite<DataError>(model.params.w2.data, "checkpoint parameter");
  require_finite<DataError>(model.params.b2, "checkpoint parameter");
  return model;
}

}  // namespace csrel
