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

// Decision-rule and per-image ranking throughput at one image's pair
// budget (hundreds of candidate pairs, 21 score columns each).

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "csrel/predict.hpp"

namespace {

using namespace csrel;

constexpr int kColumns = 21;

std::vector<ScoredPair> make_pairs(int count) {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScoredPair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    ScoredPair pair;
    pair.subject = 2 * p;
    pair.object = 2 * p + 1;
    pair.scores.resize(kColumns);
    for (double& s : pair.scores) s = unit(rng);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void BM_NrfDecision(benchmark::State& state) {
  const std::vector<ScoredPair> pairs = make_pairs(1024);
  const FilterRule rule{0.5};
  for (auto _ : state) {
    int routed = 0;
    for (const ScoredPair& pair : pairs) {
      routed += nrf_decision(pair.scores, rule);
    }
    benchmark::DoNotOptimize(routed);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_NrfDecision);

void BM_RankPredictionsArgmax(benchmark::State& state) {
  const std::vector<ScoredPair> pairs = make_pairs(static_cast<int>(state.range(0)));
  const DecisionRule rule{};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_predictions(pairs, rule, 100));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankPredictionsArgmax)->Arg(256)->Arg(833);

void BM_RankPredictionsFiltered(benchmark::State& state) {
  const std::vector<ScoredPair> pairs = make_pairs(static_cast<int>(state.range(0)));
  DecisionRule rule;
  rule.use_nrf = true;
  rule.filter.theta = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_predictions(pairs, rule, 100));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankPredictionsFiltered)->Arg(256)->Arg(833);

}  // namespace
