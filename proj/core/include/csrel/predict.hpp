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

#ifndef CSREL_PREDICT_HPP_
#define CSREL_PREDICT_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace csrel {

/// Background-filtering threshold. A pair whose background score reaches
/// theta is routed to the background class (index 0).
struct FilterRule {
  double theta = 0.5;
};

/// Index of the best foreground score, 1-based. `scores` holds foreground
/// classes only; ties resolve to the smallest index.
int argmax_decision(std::span<const double> foreground_scores);

/// Noisy-relationship filtering over scores with the background class at
/// index 0: returns 0 when scores[0] >= theta, otherwise the 1-based
/// argmax over the remaining entries. The boundary score goes to
/// background.
int nrf_decision(std::span<const double> scores, const FilterRule& rule);

/// One candidate subject-object pair with its full score vector
/// (background at index 0, foreground classes at 1..C).
struct ScoredPair {
  std::int64_t subject = 0;
  std::int64_t object = 0;
  std::vector<double> scores;
};

/// A decided prediction: the winning class and that class's score.
struct ScoredTriplet {
  std::int64_t subject = 0;
  std::int64_t object = 0;
  int predicate = 0;
  double score = 0.0;
};

/// How scores become a hard class: plain foreground argmax, or the
/// filtering rule with a threshold.
struct DecisionRule {
  bool use_nrf = false;
  FilterRule filter;
};

/// Decides every pair of one image, drops background decisions, and
/// returns the surviving triplets sorted by score descending, truncated
/// to at most k. Ties break by (subject, object, predicate). Duplicate
/// pairs are rejected.
std::vector<ScoredTriplet> rank_predictions(const std::vector<ScoredPair>& pairs, const DecisionRule& rule,
                                            int k);

}  // namespace csrel

#endif  // CSREL_PREDICT_HPP_
