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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "csrel/cost_model.hpp"
#include "csrel/data_io.hpp"
#include "csrel/error.hpp"
#include "csrel/format.hpp"
#include "csrel/loss.hpp"
#include "csrel/metrics.hpp"
#include "csrel/model.hpp"
#include "csrel/pipeline.hpp"

namespace {

using namespace csrel;

// Exit codes: 0 success, 1 usage error, 2 runtime or data error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void echo(const std::string& key, const std::string& value) {
  std::cout << "config " << key << " " << value << "\n";
}
void echo(const std::string& key, double value) { echo(key, format_double(value)); }
void echo(const std::string& key, std::int64_t value) { echo(key, std::to_string(value)); }
void echo(const std::string& key, int value) { echo(key, std::to_string(value)); }
void echo(const std::string& key, std::uint64_t value) { echo(key, std::to_string(value)); }
void echo(const std::string& key, bool value) { echo(key, std::string(value ? "on" : "off")); }

TrainMode mode_from_flag(const std::string& flag) {
  if (flag == "bce") return TrainMode::kPlainBce;
  if (flag == "csl") return TrainMode::kCostSensitive;
  if (flag == "softmax") return TrainMode::kSoftmaxCe;
  throw ValidationError("unknown mode '" + flag + "' (choices: bce, csl, softmax)");
}

std::vector<int> select_rows(const Dataset& dataset, const std::string& split,
                             std::uint64_t seed) {
  if (split == "all") {
    return all_rows(dataset);
  }
  SplitRows rows = split_rows(dataset.size(), seed);
  if (split == "train") {
    return std::move(rows.train);
  }
  if (split == "holdout") {
    return std::move(rows.holdout);
  }
  throw ValidationError("unknown split '" + split + "' (choices: all, train, holdout)");
}

struct GenDataArgs {
  SynthConfig config;
  std::string out;
};

int run_gen_data(const GenDataArgs& args) {
  echo("command", std::string("gen-data"));
  echo("classes", args.config.num_classes);
  echo("zipf-s", args.config.zipf_exponent);
  echo("images", args.config.num_images);
  echo("pairs-per-image", args.config.pairs_per_image);
  echo("fg-fraction", args.config.fg_fraction);
  echo("dim", args.config.feature_dim);
  echo("center-scale", args.config.center_scale);
  echo("noise-scale", args.config.noise_scale);
  echo("seed", args.config.seed);
  echo("out", args.out);

  const Dataset dataset = generate_synthetic(args.config);
  write_dataset(dataset, args.out);

  const std::vector<std::int64_t> counts = dataset.label_counts();
  std::vector<int> order;
  for (int j = 1; j <= dataset.num_classes; ++j) {
    order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(), [&counts](int a, int b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });
  std::cout << "pairs " << dataset.size() << "\n";
  std::cout << "background " << counts[0] << "\n";
  std::cout << "class count\n";
  for (int j : order) {
    std::cout << j << " " << counts[static_cast<std::size_t>(j)] << "\n";
  }
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string mode = "csl";
  double lr = 0.0;  // 0 = pick the architecture default
  int epochs = 50;
  int batch = 0;
  int hidden = 0;
  std::uint64_t seed = 1;
  double clamp_eps = kDefaultScoreClamp;
  std::string out_model;
  std::string out_history;
};

int run_train(const TrainArgs& args) {
  TrainConfig config;
  config.mode = mode_from_flag(args.mode);
  config.learning_rate = args.lr > 0.0 ? args.lr : (args.hidden > 0 ? 0.05 : 0.1);
  config.epochs = args.epochs;
  config.batch_size = args.batch;
  config.hidden_dim = args.hidden;
  config.seed = args.seed;
  config.clamp_eps = args.clamp_eps;
  const std::string history_path =
      args.out_history.empty() ? args.out_model + ".history.csv" : args.out_history;

  echo("command", std::string("train"));
  echo("data", args.data);
  echo("mode", args.mode);
  echo("lr", config.learning_rate);
  echo("epochs", config.epochs);
  echo("batch", config.batch_size);
  echo("hidden", config.hidden_dim);
  echo("seed", config.seed);
  echo("clamp-eps", config.clamp_eps);
  echo("out-model", args.out_model);
  echo("out-history", history_path);

  const Dataset dataset = load_dataset(args.data);
  std::optional<ClassStats> stats;
  if (config.mode == TrainMode::kCostSensitive) {
    stats = ClassStats::from_counts(dataset.label_counts());
  }
  const TrainResult result =
      train(dataset.features, dataset.labels, dataset.num_classes, config, stats);
  save_model(result.model, args.out_model);

  std::string csv = "epoch,train_loss,holdout_loss,holdout_mpcr,holdout_micro_recall\n";
  for (const auto& row : result.history) {
    csv += std::to_string(row.epoch) + "," + format_double(row.train_loss) + "," +
           format_double(row.holdout_loss) + "," + format_double(row.holdout_mpcr) + "," +
           format_double(row.holdout_micro_recall) + "\n";
  }
  atomic_write(history_path, csv);

  const EpochStats& last = result.history.back();
  std::cout << "final epoch " << last.epoch << " train_loss " << format_double(last.train_loss)
            << " holdout_loss " << format_double(last.holdout_loss) << " holdout_mpcr "
            << format_double(last.holdout_mpcr) << " holdout_micro_recall "
            << format_double(last.holdout_micro_recall) << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split = "all";
  EvalOptions options;
  std::string out_report;
  std::string out_predictions;
};

int run_eval(const EvalArgs& args) {
  echo("command", std::string("eval"));
  echo("model", args.model);
  echo("data", args.data);
  echo("split", args.split);
  echo("k", args.options.k);
  echo("theta", args.options.theta);
  echo("nrf", args.options.nrf);
  echo("bins", args.options.bins);
  echo("out-report", args.out_report);
  if (!args.out_predictions.empty()) {
    echo("out-predictions", args.out_predictions);
  }

  const Model model = load_model(args.model);
  const Dataset dataset = load_dataset(args.data);
  const std::vector<int> rows = select_rows(dataset, args.split, model.config.seed);
  const EvalReport report = evaluate_model(model, dataset, rows, args.options);
  write_report(report, args.out_report);
  if (!args.out_predictions.empty()) {
    write_predictions(rank_dataset(model, dataset, rows, args.options), args.out_predictions);
  }

  std::cout << "recall@" << args.options.k << " mpcr precision f1\n";
  std::cout << format_double(report.recall_at_k) << " " << format_double(report.mpcr) << " "
            << format_double(report.precision) << " " << format_double(report.f1) << "\n";
  std::cout << "ece " << format_double(report.ece) << "\n";
  std::cout << "zero_recall_fraction " << format_double(report.zero_recall_fraction) << "\n";
  return kExitOk;
}

struct CompareArgs {
  std::string data;
  std::vector<std::string> modes{"bce", "csl"};
  int seeds = 5;
  EvalOptions options;
  double lr = 0.0;
  int epochs = 50;
  int batch = 0;
  int hidden = 0;
  double clamp_eps = kDefaultScoreClamp;
  std::string out;
};

int run_compare(const CompareArgs& args) {
  if (args.seeds < 2) {
    throw ValidationError("compare needs at least 2 seeds");
  }
  if (args.modes.size() < 2) {
    throw ValidationError("compare needs at least 2 modes");
  }
  std::string modes_flat;
  for (const auto& m : args.modes) {
    modes_flat += (modes_flat.empty() ? "" : ",") + m;
  }
  echo("command", std::string("compare"));
  echo("data", args.data);
  echo("modes", modes_flat);
  echo("seeds", args.seeds);
  echo("k", args.options.k);
  echo("theta", args.options.theta);
  echo("nrf", args.options.nrf);
  echo("bins", args.options.bins);
  echo("lr", args.lr > 0.0 ? args.lr : (args.hidden > 0 ? 0.05 : 0.1));
  echo("epochs", args.epochs);
  echo("batch", args.batch);
  echo("hidden", args.hidden);

  const Dataset dataset = load_dataset(args.data);
  const std::vector<std::string> metric_names{"recall_at_k", "mpcr",
                                              "precision",   "f1",
                                              "ece",         "zero_recall_fraction"};

  // Metric values per listed mode, in seed order 1..S. Keyed by list
  // position so a mode listed twice yields two independent (identical)
  // sample sets, the self-comparison degenerate case.
  std::vector<std::map<std::string, std::vector<double>>> samples(args.modes.size());
  for (std::size_t mode_index = 0; mode_index < args.modes.size(); ++mode_index) {
    const std::string& mode_flag = args.modes[mode_index];
    for (int s = 1; s <= args.seeds; ++s) {
      TrainConfig config;
      config.mode = mode_from_flag(mode_flag);
      config.learning_rate = args.lr > 0.0 ? args.lr : (args.hidden > 0 ? 0.05 : 0.1);
      config.epochs = args.epochs;
      config.batch_size = args.batch;
      config.hidden_dim = args.hidden;
      config.seed = static_cast<std::uint64_t>(s);
      config.clamp_eps = args.clamp_eps;
      std::optional<ClassStats> stats;
      if (config.mode == TrainMode::kCostSensitive) {
        stats = ClassStats::from_counts(dataset.label_counts());
      }
      const TrainResult result =
          train(dataset.features, dataset.labels, dataset.num_classes, config, stats);
      const std::vector<int> rows = select_rows(dataset, "holdout", config.seed);
      const EvalReport report = evaluate_model(result.model, dataset, rows, args.options);
      auto& per_metric = samples[mode_index];
      per_metric["recall_at_k"].push_back(report.recall_at_k);
      per_metric["mpcr"].push_back(report.mpcr);
      per_metric["precision"].push_back(report.precision);
      per_metric["f1"].push_back(report.f1);
      per_metric["ece"].push_back(report.ece);
      per_metric["zero_recall_fraction"].push_back(report.zero_recall_fraction);
    }
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto std_of = [&mean_of](const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
  };

  // Welch's test against the first listed mode; a trailing * marks a
  // non-significant delta. Identical samples have no variance to test,
  // which counts as not significant.
  const std::string& base = args.modes.front();
  std::string table = "mode,metric,mean,std,delta_vs_" + base + ",t,p,significant\n";
  for (std::size_t mode_index = 0; mode_index < args.modes.size(); ++mode_index) {
    const std::string& mode_flag = args.modes[mode_index];
    for (const auto& metric : metric_names) {
      const std::vector<double>& vals = samples[mode_index].at(metric);
      const double mean = mean_of(vals);
      const double sd = std_of(vals);
      std::string line = mode_flag + "," + metric + "," + format_double(mean) + "," +
                         format_double(sd) + ",";
      if (mode_index == 0) {
        line += ",,,";
      } else {
        const std::vector<double>& ref = samples[0].at(metric);
        const double delta = mean - mean_of(ref);
        double t = 0.0;
        double p = 1.0;
        bool significant = false;
        try {
          const TTestResult r =
              welch_t_test(std::span<const double>(vals), std::span<const double>(ref));
          t = r.t;
          p = r.p_value;
          significant = r.significant;
        } catch (const Error&) {
          significant = delta != 0.0;
          p = significant ? 0.0 : 1.0;
        }
        line += format_double(delta) + "," + format_double(t) + "," + format_double(p) + "," +
                (significant ? "yes" : "no*");
      }
      table += line + "\n";
    }
  }
  std::cout << table;
  if (!args.out.empty()) {
    atomic_write(args.out, table);
  }
  return kExitOk;
}

struct CalibrateArgs {
  std::string model;
  std::string data;
  std::string split = "all";
  int bins = 10;
  std::string out;
};

int run_calibrate(const CalibrateArgs& args) {
  echo("command", std::string("calibrate"));
  echo("model", args.model);
  echo("data", args.data);
  echo("split", args.split);
  echo("bins", args.bins);
  echo("out", args.out);

  const Model model = load_model(args.model);
  const Dataset dataset = load_dataset(args.data);
  const std::vector<int> rows = select_rows(dataset, args.split, model.config.seed);
  const CalibrationReport report = calibrate_model(model, dataset, rows, args.bins);

  std::string reliability = "bin_lo,bin_hi,count,mean_confidence,accuracy\n";
  std::string histogram = "bin_lo,bin_hi,count\n";
  for (const auto& bin : report.reliability) {
    reliability += format_double(bin.lo) + "," + format_double(bin.hi) + "," +
                   std::to_string(bin.count) + "," + format_double(bin.mean_confidence) + "," +
                   format_double(bin.accuracy) + "\n";
    histogram += format_double(bin.lo) + "," + format_double(bin.hi) + "," +
                 std::to_string(bin.count) + "\n";
  }
  atomic_write(args.out + ".reliability.csv", reliability);
  atomic_write(args.out + ".histogram.csv", histogram);

  std::cout << "count " << report.count << "\n";
  std::cout << "ece " << format_double(report.ece) << "\n";
  std::cout << "accuracy " << format_double(report.accuracy) << "\n";
  std::cout << "mean_confidence " << format_double(report.mean_confidence) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost-sensitive relationship classification toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic long-tail dataset");
  gen->add_option("--classes", gen_args.config.num_classes, "foreground predicate classes");
  gen->add_option("--zipf-s", gen_args.config.zipf_exponent, "Zipf exponent (> 0)");
  gen->add_option("--images", gen_args.config.num_images, "number of images");
  gen->add_option("--pairs-per-image", gen_args.config.pairs_per_image, "candidate pairs per image");
  gen->add_option("--fg-fraction", gen_args.config.fg_fraction, "share of pairs with a relationship");
  gen->add_option("--dim", gen_args.config.feature_dim, "feature dimension");
  gen->add_option("--center-scale", gen_args.config.center_scale, "class-center spread");
  gen->add_option("--noise-scale", gen_args.config.noise_scale, "within-class noise");
  gen->add_option("--seed", gen_args.config.seed, "generator seed");
  gen->add_option("--out", gen_args.out, "output file prefix")->required();

  TrainArgs train_args;
  CLI::App* tr = app.add_subcommand("train", "train a classifier");
  tr->add_option("--data", train_args.data, "dataset prefix (from gen-data)")->required();
  tr->add_option("--mode", train_args.mode, "training mode")
      ->check(CLI::IsMember({"bce", "csl", "softmax"}));
  tr->add_option("--lr", train_args.lr, "learning rate (default 0.1 linear, 0.05 hidden)");
  tr->add_option("--epochs", train_args.epochs, "training epochs");
  tr->add_option("--batch", train_args.batch, "batch size (0 = full training split)");
  tr->add_option("--hidden", train_args.hidden, "hidden width (0 = linear)");
  tr->add_option("--seed", train_args.seed, "shuffle and init seed");
  tr->add_option("--clamp-eps", train_args.clamp_eps, "score clamp epsilon");
  tr->add_option("--out-model", train_args.out_model, "checkpoint path")->required();
  tr->add_option("--out-history", train_args.out_history,
                 "history CSV path (default <out-model>.history.csv)");

  EvalArgs eval_args;
  CLI::App* ev = app.add_subcommand("eval", "evaluate a trained model");
  ev->add_option("--model", eval_args.model, "checkpoint path")->required();
  ev->add_option("--data", eval_args.data, "dataset prefix")->required();
  ev->add_option("--split", eval_args.split, "rows to evaluate (all, train, holdout)")
      ->check(CLI::IsMember({"all", "train", "holdout"}));
  ev->add_option("--k", eval_args.options.k, "retained triplets per image");
  ev->add_option("--theta", eval_args.options.theta, "background threshold");
  ev->add_flag("--nrf", eval_args.options.nrf, "route low-confidence pairs to background");
  ev->add_option("--bins", eval_args.options.bins, "calibration bins");
  ev->add_option("--out-report", eval_args.out_report, "report file prefix")->required();
  ev->add_option("--out-predictions", eval_args.out_predictions, "retained-triplet file");

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand("compare", "train modes over seeds and test the deltas");
  cmp->add_option("--data", cmp_args.data, "dataset prefix")->required();
  cmp->add_option("--modes", cmp_args.modes, "training modes, first is the baseline")
      ->delimiter(',')
      ->check(CLI::IsMember({"bce", "csl", "softmax"}));
  cmp->add_option("--seeds", cmp_args.seeds, "number of seeds (1..N)");
  cmp->add_option("--k", cmp_args.options.k, "retained triplets per image");
  cmp->add_option("--theta", cmp_args.options.theta, "background threshold");
  cmp->add_flag("--nrf", cmp_args.options.nrf, "evaluate with filtering on");
  cmp->add_option("--bins", cmp_args.options.bins, "calibration bins");
  cmp->add_option("--lr", cmp_args.lr, "learning rate");
  cmp->add_option("--epochs", cmp_args.epochs, "training epochs");
  cmp->add_option("--batch", cmp_args.batch, "batch size (0 = full training split)");
  cmp->add_option("--hidden", cmp_args.hidden, "hidden width (0 = linear)");
  cmp->add_option("--out", cmp_args.out, "table CSV path");

  CalibrateArgs cal_args;
  CLI::App* cal = app.add_subcommand("calibrate", "reliability table and calibration error");
  cal->add_option("--model", cal_args.model, "checkpoint path")->required();
  cal->add_option("--data", cal_args.data, "dataset prefix")->required();
  cal->add_option("--split", cal_args.split, "rows to evaluate (all, train, holdout)")
      ->check(CLI::IsMember({"all", "train", "holdout"}));
  cal->add_option("--bins", cal_args.bins, "calibration bins");
  cal->add_option("--out", cal_args.out, "output file prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gen_data(gen_args);
    if (tr->parsed()) return run_train(train_args);
    if (ev->parsed()) return run_eval(eval_args);
    if (cmp->parsed()) return run_compare(cmp_args);
    if (cal->parsed()) return run_calibrate(cal_args);
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
