#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "credal/errors.hpp"
#include "credal/estimators.hpp"
#include "credal/mathutil.hpp"
#include "credal/metalearner.hpp"
#include "credal/parallel.hpp"
#include "credal/rng.hpp"
#include "credal/simplex.hpp"

namespace credal {

struct TestConfig {
  double alpha = 0.05;
  int bootstrap_iters = 100;  // D
  CalEstimatorKind estimator;
  std::uint64_t seed = 0;
  // Algorithm-1 ambiguity switch: with-replacement instance resampling per
  // bootstrap round (default) vs pure label resampling on the original rows.
  bool resample_instances = true;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw usage_error("TestConfig: alpha outside (0,1)");
    if (bootstrap_iters < 20) throw usage_error("TestConfig: need D >= 20");
  }
};

struct TestResult {
  double statistic = 0.0;
  std::vector<double> null_samples;  // sorted ascending
  double quantile = 0.0;             // type-7 (1 - alpha) quantile of the null samples
  double p_value = 1.0;              // (1 + #{t0 >= t}) / (D + 1)
  bool reject = false;
  double alpha = 0.05;
  CalEstimatorKind estimator;
  int bootstrap_iters = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["statistic"] = statistic;
    j["p_value"] = p_value;
    j["quantile"] = quantile;
    j["alpha"] = alpha;
    j["reject"] = reject;
    j["estimator"] = to_string(estimator.kind);
    j["bandwidth"] = estimator.bandwidth;
    j["kernel_scale"] = estimator.kernel_scale;
    j["D"] = bootstrap_iters;
    j["seed"] = seed;
    j["null_samples"] = null_samples;
    return j;
  }
};

namespace detail {

// Consistency-resampling null distribution for a fixed predictor: per round,
// draw a bootstrap index sample (optional), sample labels from the predictor's
// own rows, evaluate g-hat. Negative U-statistic values pass through
// unclamped; sorting makes the aggregate independent of execution order.
inline TestResult consistency_bootstrap(const Eigen::MatrixXd& preds,
                                        std::span<const int> labels, const TestConfig& cfg,
                                        int threads) {
  cfg.validate();
  const int n = static_cast<int>(preds.rows());
  const CalEstimatorKind resolved = resolve_estimator(cfg.estimator, preds);
  const FixedPredictorEvaluator evaluator(resolved, preds);

  TestResult res;
  res.alpha = cfg.alpha;
  res.estimator = resolved;
  res.bootstrap_iters = cfg.bootstrap_iters;
  res.seed = cfg.seed;
  res.statistic = evaluator.value(labels);

  res.null_samples.assign(static_cast<std::size_t>(cfg.bootstrap_iters), 0.0);
  RngStream root(cfg.seed, 0xb007ULL);
  parallel_for(cfg.bootstrap_iters, threads, [&](int d) {
    RngStream rng = root.split(static_cast<std::uint64_t>(d));
    std::vector<int> resampled_labels(static_cast<std::size_t>(n));
    if (cfg.resample_instances) {
      std::vector<int> idx(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_u64() % n);
      Eigen::MatrixXd boot(n, preds.cols());
      for (int i = 0; i < n; ++i) boot.row(i) = preds.row(idx[static_cast<std::size_t>(i)]);
      for (int i = 0; i < n; ++i)
        resampled_labels[static_cast<std::size_t>(i)] = sample_categorical_row(boot.row(i), rng);
      const FixedPredictorEvaluator round_eval(resolved, boot);
      res.null_samples[static_cast<std::size_t>(d)] = round_eval.value(resampled_labels);
    } else {
      for (int i = 0; i < n; ++i)
        resampled_labels[static_cast<std::size_t>(i)] = sample_categorical_row(preds.row(i), rng);
      res.null_samples[static_cast<std::size_t>(d)] = evaluator.value(resampled_labels);
    }
  });
  std::sort(res.null_samples.begin(), res.null_samples.end());

  res.quantile = quantile_type7(res.null_samples, 1.0 - cfg.alpha);
  int ge = 0;
  for (double t0 : res.null_samples)
    if (t0 >= res.statistic) ++ge;
  res.p_value = (1.0 + ge) / (cfg.bootstrap_iters + 1.0);
  res.reject = res.statistic > res.quantile;
  return res;
}

}  // namespace detail

// Nonparametric bootstrap calibration test applied to one fixed predictor
// (used with the ensemble mean for the "Avg. + npbe" baseline).
inline TestResult run_npbe_on_fixed_predictor(const Eigen::MatrixXd& preds,
                                              std::span<const int> labels, const TestConfig& cfg,
                                              int threads = 1) {
  return detail::consistency_bootstrap(preds, labels, cfg, threads);
}

struct CredalTestOutput {
  TestResult result;
  WeightNet net;
  WeightMatrix weights;        // Lambda* on val-data
  Eigen::MatrixXd predictions; // f_{Lambda*} on val-data
};

// The full instance-dependent credal calibration test: learn lambda* on
// opt-data, evaluate the combined predictor on val-data, then run the
// consistency-resampling bootstrap on it.
inline CredalTestOutput run_credal_test(const CredalDataset& opt_data,
                                        const CredalDataset& val_data,
                                        const TrainConfig& train_cfg, const TestConfig& test_cfg,
                                        int threads = 1) {
  test_cfg.validate();
  if (!opt_data.labeled() || !val_data.labeled())
    throw domain_error("run_credal_test: both datasets must be labeled");
  if (opt_data.m() != val_data.m() || opt_data.k() != val_data.k())
    throw dimension_error("run_credal_test: opt/val shape mismatch");

  WeightNet net = train_weight_net(opt_data, train_cfg);
  WeightMatrix lambda = evaluate_weights(net, val_data);
  Eigen::MatrixXd preds = combine_dataset(val_data, lambda);
  TestResult res = detail::consistency_bootstrap(preds, val_data.labels, test_cfg, threads);
  return {std::move(res), std::move(net), std::move(lambda), std::move(preds)};
}

// Sampling-based baseline: the statistic is the minimum g-hat over constant
// weight vectors drawn uniformly from the weight simplex; the null
// distribution re-runs that minimization on labels resampled from the
// minimizing combination.
inline TestResult run_mortier_baseline(const CredalDataset& val_data, const TestConfig& cfg,
                                       int sample_count = 1000, int threads = 1) {
  cfg.validate();
  if (!val_data.labeled()) throw domain_error("run_mortier_baseline: data must be labeled");
  if (sample_count < 100) throw usage_error("run_mortier_baseline: need sample-count >= 100");

  const int n = val_data.n();
  const int m = val_data.m();
  const int d_iters = cfg.bootstrap_iters;

  if (m == 1) {
    return run_npbe_on_fixed_predictor(val_data.members.front(), val_data.labels, cfg, threads);
  }

  RngStream root(cfg.seed, 0x304f52ULL);
  RngStream lambda_rng = root.split(0);
  const Eigen::MatrixXd lambdas = sample_weight_simplex(m, sample_count, lambda_rng);

  const CalEstimatorKind resolved = resolve_estimator(cfg.estimator, mean_predictor(val_data));

  // Pass 1: find the minimizing constant combination on the real labels.
  std::vector<double> stat(static_cast<std::size_t>(sample_count));
  parallel_for(sample_count, threads, [&](int s) {
    const Eigen::MatrixXd preds =
        combine_dataset(val_data, WeightMatrix::constant(n, lambdas.row(s).transpose()));
    stat[static_cast<std::size_t>(s)] = FixedPredictorEvaluator(resolved, preds).value(
        val_data.labels);
  });
  int argmin = 0;
  for (int s = 1; s < sample_count; ++s)
    if (stat[static_cast<std::size_t>(s)] < stat[static_cast<std::size_t>(argmin)]) argmin = s;

  // Null labels resampled once from the minimizing combination.
  const Eigen::MatrixXd best_preds =
      combine_dataset(val_data, WeightMatrix::constant(n, lambdas.row(argmin).transpose()));
  RngStream label_rng = root.split(1);
  std::vector<std::vector<int>> null_labels(static_cast<std::size_t>(d_iters));
  for (int d = 0; d < d_iters; ++d) {
    RngStream rng = label_rng.split(static_cast<std::uint64_t>(d));
    auto& lab = null_labels[static_cast<std::size_t>(d)];
    lab.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      lab[static_cast<std::size_t>(i)] = sample_categorical_row(best_preds.row(i), rng);
  }

  // Pass 2: re-run the minimization per bootstrap round over the same
  // candidate set. Loop candidates outermost so each candidate's evaluator is
  // built once.
  std::vector<std::vector<double>> round_values(
      static_cast<std::size_t>(sample_count),
      std::vector<double>(static_cast<std::size_t>(d_iters)));
  parallel_for(sample_count, threads, [&](int s) {
    const Eigen::MatrixXd preds =
        combine_dataset(val_data, WeightMatrix::constant(n, lambdas.row(s).transpose()));
    const FixedPredictorEvaluator evaluator(resolved, preds);
    for (int d = 0; d < d_iters; ++d)
      round_values[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)] =
          evaluator.value(null_labels[static_cast<std::size_t>(d)]);
  });

  TestResult res;
  res.alpha = cfg.alpha;
  res.estimator = resolved;
  res.bootstrap_iters = d_iters;
  res.seed = cfg.seed;
  res.statistic = stat[static_cast<std::size_t>(argmin)];
  res.null_samples.assign(static_cast<std::size_t>(d_iters),
                          std::numeric_limits<double>::infinity());
  for (int d = 0; d < d_iters; ++d)
    for (int s = 0; s < sample_count; ++s)
      res.null_samples[static_cast<std::size_t>(d)] =
          std::min(res.null_samples[static_cast<std::size_t>(d)],
                   round_values[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)]);
  std::sort(res.null_samples.begin(), res.null_samples.end());
  res.quantile = quantile_type7(res.null_samples, 1.0 - cfg.alpha);
  int ge = 0;
  for (double t0 : res.null_samples)
    if (t0 >= res.statistic) ++ge;
  res.p_value = (1.0 + ge) / (d_iters + 1.0);
  res.reject = res.statistic > res.quantile;
  return res;
}

}  // namespace credal
