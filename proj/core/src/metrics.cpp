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

#include "csrel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "csrel/error.hpp"

namespace csrel {

namespace {

using PairKey = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

PairKey key_of(const RelInstance& r) { return {r.image, r.subject, r.object}; }

std::string describe(const PairKey& k) {
  return "(image " + std::to_string(std::get<0>(k)) + ", subject " + std::to_string(std::get<1>(k)) +
         ", object " + std::to_string(std::get<2>(k)) + ")";
}

/// Maps pair key -> predicted class, rejecting duplicates.
std::map<PairKey, int> prediction_index(const std::vector<RelInstance>& predictions) {
  std::map<PairKey, int> index;
  for (const RelInstance& p : predictions) {
    if (!index.emplace(key_of(p), p.predicate).second)
      throw DataError("duplicate prediction for pair " + describe(key_of(p)));
  }
  return index;
}

void check_gt_unique(const std::vector<RelInstance>& ground_truth) {
  std::map<PairKey, int> seen;
  for (const RelInstance& g : ground_truth) {
    if (g.predicate < 1) throw ValidationError("ground-truth predicate must be >= 1");
    if (!seen.emplace(key_of(g), g.predicate).second)
      throw DataError("duplicate ground-truth pair " + describe(key_of(g)));
  }
}

int lookup_prediction(const std::map<PairKey, int>& index, const RelInstance& g) {
  const auto it = index.find(key_of(g));
  if (it == index.end()) throw DataError("no prediction for ground-truth pair " + describe(key_of(g)));
  return it->second;
}

double sample_mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

TTestResult finish_t_test(double t, double dof) {
  TTestResult result;
  result.t = t;
  result.dof = dof;
  const boost::math::students_t_distribution<double> dist(dof);
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  result.significant = result.p_value < 0.05;
  return result;
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::int64_t c : counts) s += c;
  return s;
}

std::int64_t ConfusionMatrix::row_sum(int row) const {
  std::int64_t s = 0;
  for (int col = 0; col < size(); ++col) s += at(row, col);
  return s;
}

double mpcr(const std::vector<RelInstance>& predictions, const std::vector<RelInstance>& ground_truth) {
  if (ground_truth.empty()) throw ValidationError("mPCR is undefined on empty ground truth");
  check_gt_unique(ground_truth);
  const auto index = prediction_index(predictions);
  std::map<int, std::pair<std::int64_t, std::int64_t>> per_class;  // class -> (correct, total)
  for (const RelInstance& g : ground_truth) {
    auto& [correct, total] = per_class[g.predicate];
    ++total;
    if (lookup_prediction(index, g) == g.predicate) ++correct;
  }
  double acc = 0.0;
  for (const auto& [cls, counts] : per_class) {
    acc += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return acc / static_cast<double>(per_class.size());
}

double micro_recall_at_k(const std::vector<RelInstance>& retained, const std::vector<RelInstance>& ground_truth,
                         int k) {
  if (k <= 0) throw ValidationError("k must be positive");
  if (ground_truth.empty()) throw ValidationError("recall is undefined on empty ground truth");
  check_gt_unique(ground_truth);
  std::map<PairKey, int> retained_index = prediction_index(retained);
  std::int64_t matched = 0;
  for (const RelInstance& g : ground_truth) {
    const auto it = retained_index.find(key_of(g));
    if (it != retained_index.end() && it->second == g.predicate) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(ground_truth.size());
}

PrecisionRecallF1 precision_recall_f1(const std::vector<RelInstance>& retained,
                                      const std::vector<RelInstance>& ground_truth) {
  if (ground_truth.empty()) throw ValidationError("precision/recall undefined on empty ground truth");
  check_gt_unique(ground_truth);
  std::map<PairKey, int> retained_index = prediction_index(retained);
  std::int64_t matched = 0;
  for (const RelInstance& g : ground_truth) {
    const auto it = retained_index.find(key_of(g));
    if (it != retained_index.end() && it->second == g.predicate) ++matched;
  }
  PrecisionRecallF1 out;
  out.precision =
      retained.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(retained.size());
  out.recall = static_cast<double>(matched) / static_cast<double>(ground_truth.size());
  out.f1 = (out.precision + out.recall) == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double expected_calibration_error(const std::vector<double>& scores, const std::vector<bool>& correct,
                                  int num_bins) {
  if (scores.empty()) throw ValidationError("calibration error is undefined on empty input");
  if (scores.size() != correct.size()) throw ValidationError("scores and correctness flags differ in length");
  if (num_bins < 1) throw ValidationError("number of bins must be >= 1");
  std::vector<std::int64_t> count(num_bins, 0);
  std::vector<std::int64_t> hits(num_bins, 0);
  std::vector<double> score_sum(num_bins, 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    const int bin = calibration_bin(s, num_bins);
    ++count[bin];
    if (correct[i]) ++hits[bin];
    score_sum[bin] += s;
  }
  const double n = static_cast<double>(scores.size());
  double ece = 0.0;
  for (int m = 0; m < num_bins; ++m) {
    if (count[m] == 0) continue;
    const double acc = static_cast<double>(hits[m]) / static_cast<double>(count[m]);
    const double conf = score_sum[m] / static_cast<double>(count[m]);
    ece += (static_cast<double>(count[m]) / n) * std::fabs(acc - conf);
  }
  return ece;
}

int calibration_bin(double score, int num_bins) {
  if (num_bins < 1) throw ValidationError("number of bins must be >= 1");
  if (!(score >= 0.0 && score <= 1.0)) throw ValidationError("scores must lie in [0, 1]");
  // Bins partition (0, 1]; bin m covers (m/M, (m+1)/M]. Score 0 joins bin 0.
  const int bin = static_cast<int>(std::ceil(score * num_bins)) - 1;
  return std::clamp(bin, 0, num_bins - 1);
}

double zero_recall_fraction(const ConfusionMatrix& cm) {
  std::int64_t with_instances = 0;
  std::int64_t zero_recall = 0;
  for (int row = 0; row < cm.size(); ++row) {
    if (cm.row_sum(row) == 0) continue;
    ++with_instances;
    if (cm.at(row, row) == 0) ++zero_recall;
  }
  if (with_instances == 0) throw ValidationError("confusion matrix has no true instances");
  return static_cast<double>(zero_recall) / static_cast<double>(with_instances);
}

ConfusionMatrix confusion(const std::vector<RelInstance>& predictions,
                          const std::vector<RelInstance>& ground_truth, bool include_background) {
  check_gt_unique(ground_truth);
  const auto index = prediction_index(predictions);

  std::map<int, std::int64_t> gt_freq;
  for (const RelInstance& g : ground_truth) ++gt_freq[g.predicate];
  int max_class = 0;
  for (const auto& [cls, freq] : gt_freq) max_class = std::max(max_class, cls);
  for (const auto& [key, cls] : index) {
    if (cls < (include_background ? 0 : 1))
      throw ValidationError("predicted label " + std::to_string(cls) + " out of range");
    max_class = std::max(max_class, cls);
  }

  // Rows and columns sorted by descending ground-truth frequency, ties by
  // class id. Classes that only ever appear as predictions get frequency 0.
  std::vector<int> order;
  for (int cls = include_background ? 0 : 1; cls <= max_class; ++cls) order.push_back(cls);
  std::stable_sort(order.begin(), order.end(), [&gt_freq](int a, int b) {
    const std::int64_t fa = gt_freq.count(a) ? gt_freq.at(a) : 0;
    const std::int64_t fb = gt_freq.count(b) ? gt_freq.at(b) : 0;
    if (fa != fb) return fa > fb;
    return a < b;
  });
  std::map<int, int> position;
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i);

  ConfusionMatrix cm;
  cm.class_order = order;
  cm.has_background = include_background;
  cm.counts.assign(order.size() * order.size(), 0);
  for (const RelInstance& g : ground_truth) {
    const int predicted = lookup_prediction(index, g);
    if (!include_background && predicted == 0)
      throw ValidationError("background prediction in a foreground-only confusion matrix");
    ++cm.at(position.at(g.predicate), position.at(predicted));
  }
  return cm;
}

std::map<int, double> per_class_recall(const ConfusionMatrix& cm) {
  std::map<int, double> recall;
  for (int row = 0; row < cm.size(); ++row) {
    const std::int64_t total = cm.row_sum(row);
    if (total == 0) continue;
    recall[cm.class_order[row]] = static_cast<double>(cm.at(row, row)) / static_cast<double>(total);
  }
  return recall;
}

TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2)
    throw ValidationError("each sample needs at least two values");
  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  const double ma = sample_mean(sample_a);
  const double mb = sample_mean(sample_b);
  const double va = sample_variance(sample_a, ma) / na;
  const double vb = sample_variance(sample_b, mb) / nb;
  if (va + vb == 0.0) throw ValidationError("degenerate variance: both samples are constant");
  const double t = (ma - mb) / std::sqrt(va + vb);
  const double dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return finish_t_test(t, dof);
}

TTestResult one_sample_t_test(std::span<const double> values, double reference) {
  if (values.size() < 2) throw ValidationError("one-sample test needs at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = sample_mean(values);
  const double var = sample_variance(values, mean);
  if (var == 0.0) throw ValidationError("degenerate variance: sample is constant");
  const double t = (mean - reference) / std::sqrt(var / n);
  return finish_t_test(t, n - 1.0);
}

}  // namespace csrel
