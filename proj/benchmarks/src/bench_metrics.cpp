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

// Metric throughput at evaluation scale: tens of thousands of pairs
// spread over many images with a 20-class predicate vocabulary.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "csrel/metrics.hpp"

namespace {

using namespace csrel;

constexpr int kPredicates = 20;
constexpr std::int64_t kImages = 1000;

struct EvalFixture {
  std::vector<RelInstance> truth;
  std::vector<RelInstance> predictions;
  std::vector<RelInstance> retained;
};

// Ground truth with a skewed predicate histogram, one prediction per
// pair (70% correct), and a sparse retained list of about 20 per image.
EvalFixture make_fixture(int pairs) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EvalFixture fixture;
  for (int p = 0; p < pairs; ++p) {
    RelInstance gt;
    gt.image = p % kImages;
    gt.subject = 2 * (p / kImages);
    gt.object = gt.subject + 1;
    gt.predicate = 1 + static_cast<int>(static_cast<double>(kPredicates) * unit(rng) * unit(rng));
    if (gt.predicate > kPredicates) gt.predicate = kPredicates;
    fixture.truth.push_back(gt);

    RelInstance pred = gt;
    if (unit(rng) > 0.7) pred.predicate = static_cast<int>(rng() % (kPredicates + 1));
    fixture.predictions.push_back(pred);

    if (unit(rng) < 0.4) {
      RelInstance kept = pred;
      kept.score = unit(rng);
      fixture.retained.push_back(kept);
    }
  }
  return fixture;
}

void BM_Mpcr(benchmark::State& state) {
  const EvalFixture fixture = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpcr(fixture.predictions, fixture.truth));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Mpcr)->Arg(10000)->Arg(50000);

void BM_ConfusionZeroRecall(benchmark::State& state) {
  const EvalFixture fixture = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        zero_recall_fraction(confusion(fixture.predictions, fixture.truth, true)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ConfusionZeroRecall)->Arg(10000)->Arg(50000);

void BM_MicroRecallAtK(benchmark::State& state) {
  const EvalFixture fixture = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(micro_recall_at_k(fixture.retained, fixture.truth, 100));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MicroRecallAtK)->Arg(10000)->Arg(50000);

void BM_PrecisionRecallF1(benchmark::State& state) {
  const EvalFixture fixture = make_fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(precision_recall_f1(fixture.retained, fixture.truth));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PrecisionRecallF1)->Arg(10000)->Arg(50000);

void BM_ExpectedCalibrationError(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> scores;
  std::vector<bool> correct;
  scores.reserve(static_cast<std::size_t>(n));
  correct.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = unit(rng);
    scores.push_back(s);
    correct.push_back(unit(rng) < s);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_calibration_error(scores, correct, 10));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ExpectedCalibrationError)->Arg(10000)->Arg(50000);

}  // namespace
