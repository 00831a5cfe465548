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

#include "csrel/predict.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <tuple>

#include "csrel/error.hpp"

namespace csrel {

int argmax_decision(std::span<const double> foreground_scores) {
  if (foreground_scores.empty()) throw ValidationError("argmax over empty score vector");
  int best = 0;
  for (int j = 1; j < static_cast<int>(foreground_scores.size()); ++j) {
    if (foreground_scores[j] > foreground_scores[best]) best = j;
  }
  return best + 1;
}

int nrf_decision(std::span<const double> scores, const FilterRule& rule) {
  if (scores.size() < 2) throw ValidationError("filtering rule needs a background score plus at least one class");
  if (scores[0] >= rule.theta) return 0;
  return argmax_decision(scores.subspan(1));
}

std::vector<ScoredTriplet> rank_predictions(const std::vector<ScoredPair>& pairs, const DecisionRule& rule,
                                            int k) {
  if (k <= 0) throw ValidationError("k must be positive");
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::vector<ScoredTriplet> triplets;
  triplets.reserve(pairs.size());
  for (const ScoredPair& pair : pairs) {
    if (!seen.emplace(pair.subject, pair.object).second) {
      throw DataError("duplicate pair (" + std::to_string(pair.subject) + ", " + std::to_string(pair.object) +
                      ") within image");
    }
    std::span<const double> scores(pair.scores);
    int decided;
    if (rule.use_nrf) {
      decided = nrf_decision(scores, rule.filter);
    } else {
      if (scores.size() < 2) throw ValidationError("score vector needs a background slot plus foreground classes");
      decided = argmax_decision(scores.subspan(1));
    }
    if (decided == 0) continue;
    triplets.push_back({pair.subject, pair.object, decided, pair.scores[decided]});
  }
  std::sort(triplets.begin(), triplets.end(), [](const ScoredTriplet& a, const ScoredTriplet& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.subject, a.object, a.predicate) < std::tie(b.subject, b.object, b.predicate);
  });
  if (static_cast<int>(triplets.size()) > k) triplets.resize(k);
  return triplets;
}

}  // namespace csrel
