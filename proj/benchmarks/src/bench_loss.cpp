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

// Loss-kernel throughput at training batch shapes: 21 output columns
// (background plus 20 predicates) over a long-tail class census.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "csrel/cost_model.hpp"
#include "csrel/loss.hpp"
#include "csrel/matrix.hpp"

namespace {

using namespace csrel;

constexpr int kClasses = 21;

std::vector<std::int64_t> long_tail_counts() {
  std::vector<std::int64_t> counts(kClasses);
  for (int j = 0; j < kClasses; ++j) {
    counts[static_cast<std::size_t>(j)] =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(50000.0 / std::pow(j + 1.0, 1.5)));
  }
  return counts;
}

Matrix random_logits(int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> range(-3.0, 3.0);
  Matrix logits(rows, kClasses);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < kClasses; ++j) logits(i, j) = range(rng);
  }
  return logits;
}

TargetBatch random_targets(int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(rows));
  for (auto& label : labels) label = static_cast<int>(rng() % kClasses);
  return TargetBatch::from_labels(std::move(labels), kClasses);
}

void BM_PlainBceLoss(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const ScoreBatch scores = ScoreBatch::from_logits(random_logits(rows, 7));
  const TargetBatch targets = random_targets(rows, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plain_bce_loss(scores, targets));
  }
  state.SetItemsProcessed(state.iterations() * rows * kClasses);
}
BENCHMARK(BM_PlainBceLoss)->Arg(256)->Arg(2048);

void BM_CostSensitiveBceLoss(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const ClassStats stats = ClassStats::from_counts(long_tail_counts());
  const WeightPair weights = WeightPair::from_cost_matrix(stats, CostMatrix::from_stats(stats));
  const ScoreBatch scores = ScoreBatch::from_logits(random_logits(rows, 7));
  const TargetBatch targets = random_targets(rows, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cs_bce_loss(scores, targets, weights));
  }
  state.SetItemsProcessed(state.iterations() * rows * kClasses);
}
BENCHMARK(BM_CostSensitiveBceLoss)->Arg(256)->Arg(2048);

void BM_CostSensitiveGradLogits(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const ClassStats stats = ClassStats::from_counts(long_tail_counts());
  const WeightPair weights = WeightPair::from_cost_matrix(stats, CostMatrix::from_stats(stats));
  const Matrix logits = random_logits(rows, 7);
  const TargetBatch targets = random_targets(rows, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cs_bce_grad_logits(logits, targets, weights));
  }
  state.SetItemsProcessed(state.iterations() * rows * kClasses);
}
BENCHMARK(BM_CostSensitiveGradLogits)->Arg(256)->Arg(2048);

void BM_SoftmaxCeGrad(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const Matrix logits = random_logits(rows, 7);
  const TargetBatch targets = random_targets(rows, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(softmax_ce_grad(logits, targets));
  }
  state.SetItemsProcessed(state.iterations() * rows * kClasses);
}
BENCHMARK(BM_SoftmaxCeGrad)->Arg(256)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
