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

#include "csrel/cost_model.hpp"

#include <cmath>
#include <string>

#include "csrel/error.hpp"

namespace csrel {

ClassStats ClassStats::from_counts(std::vector<std::int64_t> counts) {
  if (counts.size() < 2) throw ValidationError("class stats require at least two classes");
  std::int64_t total = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < 1) {
      throw ValidationError("insufficient class support: class " + std::to_string(j) +
                            " has count " + std::to_string(counts[j]));
    }
    total += counts[j];
  }
  ClassStats stats;
  stats.counts_ = std::move(counts);
  stats.total_ = total;
  stats.priors_.resize(stats.counts_.size());
  for (std::size_t j = 0; j < stats.counts_.size(); ++j) {
    stats.priors_[j] = static_cast<double>(stats.counts_[j]) / static_cast<double>(total);
  }
  return stats;
}

CostMatrix CostMatrix::from_stats(const ClassStats& stats) {
  const int c = stats.num_classes();
  Matrix w(c, c);
  for (int j = 0; j < c; ++j) {
    for (int k = 0; k < c; ++k) {
      if (j == k) continue;
      const double ratio = static_cast<double>(stats.count(k)) / static_cast<double>(stats.count(j));
      w(j, k) = std::max(1.0, std::log2(ratio));
    }
  }
  return CostMatrix(std::move(w));
}

WeightPair WeightPair::from_cost_matrix(const ClassStats& stats, const CostMatrix& costs) {
  const int c = stats.num_classes();
  if (costs.num_classes() != c) throw ValidationError("cost matrix and class stats dimensions disagree");
  std::vector<double> u(c);
  for (int j = 0; j < c; ++j) {
    const std::int64_t rest = stats.total() - stats.count(j);
    if (rest <= 0) throw ValidationError("degenerate prior: class " + std::to_string(j) + " holds all examples");
    // u_j = (1 / (1 - P_j)) * sum_{k != j} P_k w_jk, computed as
    // (sum_{k != j} N_k w_jk) / (N - N_j) so balanced counts give exactly 1.
    double acc = 0.0;
    for (int k = 0; k < c; ++k) {
      if (k == j) continue;
      acc += static_cast<double>(stats.count(k)) * costs.cost(j, k);
    }
    u[j] = acc / static_cast<double>(rest);
  }
  Matrix v = costs.entries();
  return WeightPair(std::move(u), std::move(v));
}

WeightPair WeightPair::unit(int num_classes) {
  if (num_classes < 1) throw ValidationError("unit weights require at least one class");
  std::vector<double> u(num_classes, 1.0);
  Matrix v(num_classes, num_classes);
  for (int j = 0; j < num_classes; ++j) {
    for (int k = 0; k < num_classes; ++k) {
      v(j, k) = (j == k) ? 0.0 : 1.0;
    }
  }
  return WeightPair(std::move(u), std::move(v));
}

}  // namespace csrel
