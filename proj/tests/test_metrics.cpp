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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "csrel/error.hpp"
#include "csrel/metrics.hpp"
#include "csrel/rng.hpp"

using csrel::ConfusionMatrix;
using csrel::DataError;
using csrel::RelInstance;
using csrel::ValidationError;

namespace {

RelInstance ri(std::int64_t image, std::int64_t subject, std::int64_t object, int predicate) {
  RelInstance r;
  r.image = image;
  r.subject = subject;
  r.object = object;
  r.predicate = predicate;
  return r;
}

// Independent naive double-loop oracle for macro-averaged recall.
double mpcr_oracle(const std::vector<RelInstance>& preds, const std::vector<RelInstance>& gt) {
  std::set<int> classes;
  for (const auto& g : gt) classes.insert(g.predicate);
  double sum = 0.0;
  int used = 0;
  for (int cls : classes) {
    std::int64_t total = 0;
    std::int64_t correct = 0;
    for (const auto& g : gt) {
      if (g.predicate != cls) continue;
      ++total;
      for (const auto& p : preds) {
        if (p.image == g.image && p.subject == g.subject && p.object == g.object &&
            p.predicate == cls) {
          ++correct;
          break;
        }
      }
    }
    if (total > 0) {
      sum += static_cast<double>(correct) / static_cast<double>(total);
      ++used;
    }
  }
  return sum / used;
}

// Random paired (ground truth, predictions) sets; every pair gets exactly
// one prediction, some of them background.
struct RandomEvalSet {
  std::vector<RelInstance> gt;
  std::vector<RelInstance> preds;
};

RandomEvalSet random_eval_set(csrel::Rng& rng, int num_classes, int num_pairs) {
  RandomEvalSet out;
  for (int p = 0; p < num_pairs; ++p) {
    const int true_class = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(num_classes)));
    out.gt.push_back(ri(p % 4, p, p + 100000, true_class));
    int predicted;
    const double roll = rng.uniform01();
    if (roll < 0.4) {
      predicted = true_class;
    } else if (roll < 0.55) {
      predicted = 0;
    } else {
      predicted = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(num_classes)));
    }
    out.preds.push_back(ri(p % 4, p, p + 100000, predicted));
  }
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("macro recall averages per-class recalls while micro pools") {
  // Class 1: 2 of 2 correct. Class 2: 1 of 4 correct.
  std::vector<RelInstance> gt = {
      ri(0, 1, 2, 1), ri(0, 3, 4, 1),
      ri(1, 1, 2, 2), ri(1, 3, 4, 2), ri(1, 5, 6, 2), ri(1, 7, 8, 2),
  };
  std::vector<RelInstance> preds = {
      ri(0, 1, 2, 1), ri(0, 3, 4, 1),
      ri(1, 1, 2, 2), ri(1, 3, 4, 1), ri(1, 5, 6, 0), ri(1, 7, 8, 1),
  };
  CHECK(csrel::mpcr(preds, gt) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(csrel::micro_recall_at_k(preds, gt, 100) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("macro recall edge values") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 2)};
  std::vector<RelInstance> perfect = {ri(0, 1, 2, 1), ri(0, 3, 4, 2)};
  CHECK(csrel::mpcr(perfect, gt) == 1.0);

  std::vector<RelInstance> half = {ri(0, 1, 2, 1), ri(0, 3, 4, 0)};
  CHECK(csrel::mpcr(half, gt) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(csrel::mpcr(perfect, {}), ValidationError);
}

TEST_CASE("classes absent from the ground truth do not enter the macro mean") {
  // Only classes 1 and 3 occur; predicting class 2 for one pair hurts class
  // 3's recall but adds no third term.
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 3), ri(0, 5, 6, 3)};
  std::vector<RelInstance> preds = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(0, 5, 6, 3)};
  CHECK(csrel::mpcr(preds, gt) == doctest::Approx((1.0 + 0.5) / 2.0).epsilon(1e-12));
}

TEST_CASE("macro recall requires one prediction per ground-truth pair") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 2)};
  std::vector<RelInstance> missing = {ri(0, 1, 2, 1)};
  CHECK_THROWS_AS(csrel::mpcr(missing, gt), DataError);
  std::vector<RelInstance> dup_gt = {ri(0, 1, 2, 1), ri(0, 1, 2, 2)};
  CHECK_THROWS_AS(csrel::mpcr(missing, dup_gt), DataError);
}

TEST_CASE("macro recall matches a naive double loop on random sets") {
  csrel::Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int c = 1 + static_cast<int>(rng.uniform_int(10));
    const int n = 1 + static_cast<int>(rng.uniform_int(200));
    const auto set = random_eval_set(rng, c, n);
    CHECK(csrel::mpcr(set.preds, set.gt) ==
          doctest::Approx(mpcr_oracle(set.preds, set.gt)).epsilon(1e-12));
  }
}

TEST_CASE("macro and micro recall coincide on balanced ground truth") {
  csrel::Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 2 + static_cast<int>(rng.uniform_int(5));
    const int per_class = 1 + static_cast<int>(rng.uniform_int(12));
    std::vector<RelInstance> gt;
    std::vector<RelInstance> preds;
    int pair = 0;
    for (int cls = 1; cls <= c; ++cls) {
      for (int m = 0; m < per_class; ++m, ++pair) {
        gt.push_back(ri(0, pair, pair + 50000, cls));
        const double roll = rng.uniform01();
        const int predicted =
            roll < 0.5 ? cls : static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(c + 1)));
        preds.push_back(ri(0, pair, pair + 50000, predicted));
      }
    }
    const double macro = csrel::mpcr(preds, gt);
    const double micro = csrel::micro_recall_at_k(preds, gt, 1000);
    CHECK(macro == doctest::Approx(micro).epsilon(1e-12));
  }
}

TEST_CASE("top-k micro recall counts exact triplet matches") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(1, 1, 2, 1)};
  // Two retained predictions, one of them an exact match.
  std::vector<RelInstance> retained = {ri(0, 1, 2, 1), ri(0, 3, 4, 1)};
  CHECK(csrel::micro_recall_at_k(retained, gt, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(csrel::micro_recall_at_k(gt, gt, 100) == 1.0);
  CHECK(csrel::micro_recall_at_k({}, gt, 100) == 0.0);
  CHECK_THROWS_AS(csrel::micro_recall_at_k(retained, gt, 0), ValidationError);
  CHECK_THROWS_AS(csrel::micro_recall_at_k(retained, {}, 10), ValidationError);
}

TEST_CASE("precision, recall, and F1 match the hand-worked example") {
  std::vector<RelInstance> gt;
  for (int p = 0; p < 20; ++p) gt.push_back(ri(0, p, p + 1000, 1));
  std::vector<RelInstance> retained;
  for (int p = 0; p < 4; ++p) retained.push_back(ri(0, p, p + 1000, 1));      // matches
  for (int p = 4; p < 8; ++p) retained.push_back(ri(0, p, p + 1000, 2));      // wrong class
  for (int p = 0; p < 2; ++p) retained.push_back(ri(0, p + 500, p + 1500, 1));  // no such pair
  const auto prf = csrel::precision_recall_f1(retained, gt);
  CHECK(prf.precision == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(prf.recall == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(prf.f1 == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
  CHECK(prf.f1 == doctest::Approx(0.266667).epsilon(1e-5));
}

TEST_CASE("precision edge conventions") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 2)};
  const auto perfect = csrel::precision_recall_f1(gt, gt);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const auto nothing = csrel::precision_recall_f1({}, gt);
  CHECK(nothing.precision == 0.0);
  CHECK(nothing.recall == 0.0);
  CHECK(nothing.f1 == 0.0);

  CHECK_THROWS_AS(csrel::precision_recall_f1(gt, {}), ValidationError);
}

TEST_CASE("matched count ties precision and recall together") {
  csrel::Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + static_cast<int>(rng.uniform_int(6));
    const int n = 1 + static_cast<int>(rng.uniform_int(60));
    auto set = random_eval_set(rng, c, n);
    // Drop background decisions to mimic a retained set.
    std::vector<RelInstance> retained;
    for (const auto& p : set.preds) {
      if (p.predicate != 0) retained.push_back(p);
    }
    const auto prf = csrel::precision_recall_f1(retained, set.gt);
    const double matched_p = prf.precision * static_cast<double>(retained.size());
    const double matched_r = prf.recall * static_cast<double>(set.gt.size());
    CHECK(matched_p == doctest::Approx(matched_r).epsilon(1e-9));
    CHECK(matched_p == doctest::Approx(std::round(matched_p)).epsilon(1e-9));
  }
}

TEST_CASE("recall at k never decreases with k on nested retained sets") {
  // Retaining more of the same ranking can only add matches.
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(0, 5, 6, 1)};
  std::vector<RelInstance> top1 = {ri(0, 1, 2, 1)};
  std::vector<RelInstance> top3 = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(0, 5, 6, 2)};
  CHECK(csrel::micro_recall_at_k(top1, gt, 1) <= csrel::micro_recall_at_k(top3, gt, 3));
}

TEST_CASE("calibration error matches the hand-worked binning example") {
  const std::vector<double> scores = {0.9, 0.9, 0.6, 0.6};
  const std::vector<bool> correct = {true, false, true, true};
  CHECK(csrel::expected_calibration_error(scores, correct, 10) ==
        doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("calibration error is zero when every bin is exact") {
  CHECK(csrel::expected_calibration_error({1.0, 1.0, 1.0}, {true, true, true}, 10) == 0.0);
  // Four scores of 0.25 with exactly one correct: the single occupied bin
  // has accuracy = confidence = 0.25.
  CHECK(csrel::expected_calibration_error({0.25, 0.25, 0.25, 0.25},
                                          {true, false, false, false}, 4) == 0.0);
}

TEST_CASE("a calibrated synthetic stream has small calibration error") {
  csrel::Rng rng(44);
  std::vector<double> scores;
  std::vector<bool> correct;
  for (int i = 0; i < 10000; ++i) {
    const double s = rng.uniform01();
    scores.push_back(s);
    correct.push_back(rng.bernoulli(s));
  }
  CHECK(csrel::expected_calibration_error(scores, correct, 10) < 0.02);
}

TEST_CASE("calibration error input validation") {
  CHECK_THROWS_AS(csrel::expected_calibration_error({}, {}, 10), ValidationError);
  CHECK_THROWS_AS(csrel::expected_calibration_error({0.5}, {true, false}, 10), ValidationError);
  CHECK_THROWS_AS(csrel::expected_calibration_error({0.5}, {true}, 0), ValidationError);
  CHECK_THROWS_AS(csrel::expected_calibration_error({1.5}, {true}, 10), ValidationError);
}

TEST_CASE("bins partition the half-open unit interval") {
  CHECK(csrel::calibration_bin(0.0, 10) == 0);  // score 0 joins the first bin
  CHECK(csrel::calibration_bin(0.05, 10) == 0);
  CHECK(csrel::calibration_bin(0.1, 10) == 0);   // right edge belongs to the bin
  CHECK(csrel::calibration_bin(0.11, 10) == 1);
  CHECK(csrel::calibration_bin(0.95, 10) == 9);
  CHECK(csrel::calibration_bin(1.0, 10) == 9);
  CHECK(csrel::calibration_bin(0.7, 1) == 0);
  CHECK_THROWS_AS(csrel::calibration_bin(0.5, 0), ValidationError);
  CHECK_THROWS_AS(csrel::calibration_bin(-0.1, 10), ValidationError);
  CHECK_THROWS_AS(csrel::calibration_bin(1.1, 10), ValidationError);
}

TEST_CASE("confusion counts land on the frequency-sorted grid") {
  // Frequencies: class 2 three times, class 3 twice, class 1 once.
  std::vector<RelInstance> gt = {
      ri(0, 1, 2, 2), ri(0, 3, 4, 2), ri(0, 5, 6, 2),
      ri(0, 7, 8, 3), ri(0, 9, 10, 3),
      ri(0, 11, 12, 1),
  };
  const auto cm = csrel::confusion(gt, gt, false);
  REQUIRE(cm.class_order == std::vector<int>{2, 3, 1});
  CHECK(cm.total() == 6);
  CHECK(cm.at(0, 0) == 3);
  CHECK(cm.at(1, 1) == 2);
  CHECK(cm.at(2, 2) == 1);
  CHECK(cm.row_sum(0) == 3);

  const auto with_bg = csrel::confusion(gt, gt, true);
  REQUIRE(with_bg.class_order == std::vector<int>{2, 3, 1, 0});
  CHECK(with_bg.total() == 6);
}

TEST_CASE("a single confused pair produces one off-diagonal count") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1)};
  std::vector<RelInstance> preds = {ri(0, 1, 2, 2)};
  const auto cm = csrel::confusion(preds, gt, false);
  // Order: class 1 (frequency 1) before class 2 (prediction-only).
  REQUIRE(cm.class_order == std::vector<int>{1, 2});
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(0, 0) == 0);
  CHECK(cm.total() == 1);
}

TEST_CASE("background predictions need the background slot") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1)};
  std::vector<RelInstance> preds = {ri(0, 1, 2, 0)};
  CHECK_THROWS_AS(csrel::confusion(preds, gt, false), ValidationError);
  const auto cm = csrel::confusion(preds, gt, true);
  REQUIRE(cm.class_order == std::vector<int>{1, 0});
  CHECK(cm.at(0, 1) == 1);  // true class 1 predicted background
}

TEST_CASE("confusion totals are conserved on random sets") {
  csrel::Rng rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + static_cast<int>(rng.uniform_int(6));
    const int n = 1 + static_cast<int>(rng.uniform_int(80));
    const auto set = random_eval_set(rng, c, n);
    const auto cm = csrel::confusion(set.preds, set.gt, true);
    CHECK(cm.total() == static_cast<std::int64_t>(set.gt.size()));
    // Row sums equal per-class ground-truth counts.
    std::map<int, std::int64_t> freq;
    for (const auto& g : set.gt) ++freq[g.predicate];
    for (int row = 0; row < cm.size(); ++row) {
      const int cls = cm.class_order[static_cast<std::size_t>(row)];
      const std::int64_t expected = freq.count(cls) ? freq.at(cls) : 0;
      CHECK(cm.row_sum(row) == expected);
    }
  }
}

TEST_CASE("confusion requires a prediction for every ground-truth pair") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 1)};
  std::vector<RelInstance> preds = {ri(0, 1, 2, 1)};
  CHECK_THROWS_AS(csrel::confusion(preds, gt, true), DataError);
}

TEST_CASE("per-class recall reads the confusion diagonal") {
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 1), ri(0, 5, 6, 2)};
  std::vector<RelInstance> preds = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(0, 5, 6, 2)};
  const auto cm = csrel::confusion(preds, gt, false);
  const auto recall = csrel::per_class_recall(cm);
  REQUIRE(recall.size() == 2);
  CHECK(recall.at(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(recall.at(2) == 1.0);
}

TEST_CASE("macro recall equals the mean of per-class recalls") {
  csrel::Rng rng(46);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + static_cast<int>(rng.uniform_int(8));
    const int n = 1 + static_cast<int>(rng.uniform_int(100));
    const auto set = random_eval_set(rng, c, n);
    const auto recall = csrel::per_class_recall(csrel::confusion(set.preds, set.gt, true));
    double sum = 0.0;
    for (const auto& [cls, r] : recall) sum += r;
    CHECK(csrel::mpcr(set.preds, set.gt) ==
          doctest::Approx(sum / static_cast<double>(recall.size())).epsilon(1e-12));
  }
}

TEST_CASE("zero-recall fraction counts never-correct classes") {
  // Class 3 has instances but an empty diagonal cell.
  std::vector<RelInstance> gt = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(0, 5, 6, 3)};
  std::vector<RelInstance> preds = {ri(0, 1, 2, 1), ri(0, 3, 4, 2), ri(0, 5, 6, 1)};
  const auto cm = csrel::confusion(preds, gt, false);
  CHECK(csrel::zero_recall_fraction(cm) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const auto perfect = csrel::confusion(gt, gt, false);
  CHECK(csrel::zero_recall_fraction(perfect) == 0.0);

  // Fully off-diagonal: everything misclassified.
  std::vector<RelInstance> swapped = {ri(0, 1, 2, 2), ri(0, 3, 4, 3), ri(0, 5, 6, 1)};
  CHECK(csrel::zero_recall_fraction(csrel::confusion(swapped, gt, false)) == 1.0);
}

TEST_CASE("zero-recall fraction rejects a matrix with no true instances") {
  ConfusionMatrix empty;
  empty.class_order = {1, 2};
  empty.counts.assign(4, 0);
  CHECK_THROWS_AS(csrel::zero_recall_fraction(empty), ValidationError);
}

TEST_CASE("identical samples with internal variance give t = 0") {
  const std::vector<double> a = {1.0, 1.1, 0.9, 1.0, 1.05};
  const auto result = csrel::welch_t_test(a, a);
  CHECK(result.t == 0.0);
  CHECK(result.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(result.significant);
}

TEST_CASE("clearly separated samples are significant") {
  const std::vector<double> a = {1.0, 1.1, 0.9, 1.0, 1.05};
  const std::vector<double> b = {2.0, 2.1, 1.9, 2.0, 2.05};
  const auto result = csrel::welch_t_test(a, b);
  // Reference values from an independent statistics package.
  CHECK(result.t == doctest::Approx(-21.3200716356).epsilon(1e-9));
  CHECK(result.dof == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(result.p_value == doctest::Approx(2.46392349177e-08).epsilon(1e-6));
  CHECK(result.significant);

  const auto flipped = csrel::welch_t_test(b, a);
  CHECK(flipped.t == doctest::Approx(21.3200716356).epsilon(1e-9));
  CHECK(flipped.p_value == doctest::Approx(result.p_value).epsilon(1e-12));
}

TEST_CASE("overlapping samples with unequal variances are not significant") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> b = {2.0, 4.0, 6.0, 8.0, 10.0};
  const auto result = csrel::welch_t_test(a, b);
  // Reference values from an independent statistics package.
  CHECK(result.t == doctest::Approx(-1.8973665961).epsilon(1e-9));
  CHECK(result.dof == doctest::Approx(5.88235294118).epsilon(1e-9));
  CHECK(result.p_value == doctest::Approx(0.107531194931).epsilon(1e-9));
  CHECK_FALSE(result.significant);
}

TEST_CASE("degenerate and undersized samples are rejected") {
  const std::vector<double> constant = {2.0, 2.0, 2.0};
  CHECK_THROWS_AS(csrel::welch_t_test(constant, constant), ValidationError);
  CHECK_THROWS_AS(csrel::welch_t_test(std::vector<double>{1.0}, constant), ValidationError);
  CHECK_THROWS_AS(csrel::welch_t_test(constant, std::vector<double>{}), ValidationError);
  // One constant sample is fine as long as the other varies.
  const std::vector<double> varying = {1.0, 2.0, 3.0};
  const auto result = csrel::welch_t_test(constant, varying);
  CHECK(std::isfinite(result.t));
}

TEST_CASE("one-sample test against a matching reference is not significant") {
  const std::vector<double> values = {0.52, 0.53, 0.51, 0.52, 0.52};
  const auto result = csrel::one_sample_t_test(values, 0.52);
  CHECK(result.t == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_FALSE(result.significant);
}

TEST_CASE("one-sample test detects a clear mean shift") {
  const std::vector<double> values = {0.60, 0.61, 0.59, 0.60, 0.60};
  const auto result = csrel::one_sample_t_test(values, 0.52);
  // Reference values from an independent statistics package.
  CHECK(result.t == doctest::Approx(25.2982212813).epsilon(1e-9));
  CHECK(result.dof == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(result.p_value == doctest::Approx(1.44970919859e-05).epsilon(1e-6));
  CHECK(result.significant);

  CHECK_THROWS_AS(csrel::one_sample_t_test(std::vector<double>{2.0, 2.0, 2.0}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(csrel::one_sample_t_test(std::vector<double>{2.0}, 1.0), ValidationError);
}

}  // TEST_SUITE
