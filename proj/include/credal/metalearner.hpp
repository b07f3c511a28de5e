#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "credal/errors.hpp"
#include "credal/estimators.hpp"
#include "credal/rng.hpp"
#include "credal/simplex.hpp"

namespace credal {

// Small feed-forward network mapping features to a point in the (M-1)-simplex:
// rectifier hidden layers, softmax output. The final layer starts at zero so
// an untrained net is the mean predictor.
class WeightNet {
public:
  WeightNet() = default;

  static WeightNet init(const std::vector<int>& layer_sizes, RngStream rng) {
    if (layer_sizes.size() < 2) throw dimension_error("WeightNet: need input and output layers");
    WeightNet net;
    net.sizes_ = layer_sizes;
    const std::size_t layers = layer_sizes.size() - 1;
    net.w_.resize(layers);
    net.b_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = layer_sizes[l], out = layer_sizes[l + 1];
      net.w_[l].resize(out, in);
      net.b_[l] = Eigen::VectorXd::Zero(out);
      if (l + 1 == layers) {
        net.w_[l].setZero();
      } else {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (int r = 0; r < out; ++r)
          for (int c = 0; c < in; ++c) net.w_[l](r, c) = rng.next_uniform(-bound, bound);
      }
    }
    return net;
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l)
      n += static_cast<std::size_t>(w_[l].size()) + static_cast<std::size_t>(b_[l].size());
    return n;
  }

  // Rows of x -> rows in the simplex. Deterministic.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != sizes_.front()) throw dimension_error("WeightNet: feature dimension mismatch");
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      h = (h * w_[l].transpose()).rowwise() + b_[l].transpose();
      if (l + 1 < w_.size()) h = h.cwiseMax(0.0);
    }
    return softmax_rows(h);
  }

  // Forward pass keeping pre-activations for backprop.
  struct ForwardCache {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[l+1] = post-activation of layer l
    Eigen::MatrixXd probs;
  };

  ForwardCache forward_cached(const Eigen::MatrixXd& x) const {
    ForwardCache cache;
    cache.acts.reserve(w_.size() + 1);
    cache.acts.push_back(x);
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      h = (h * w_[l].transpose()).rowwise() + b_[l].transpose();
      if (l + 1 < w_.size()) h = h.cwiseMax(0.0);
      cache.acts.push_back(h);
    }
    cache.probs = softmax_rows(h);
    return cache;
  }

  // Gradients of a scalar loss given d(loss)/d(softmax output), laid out to
  // match params(). Backpropagates softmax, rectifiers and affine layers.
  std::vector<double> backward(const ForwardCache& cache, const Eigen::MatrixXd& dprobs) const {
    const std::size_t layers = w_.size();
    // softmax jacobian: dlogits = probs .* (dprobs - rowwise dot(dprobs, probs))
    Eigen::MatrixXd delta = cache.probs.array() *
                            (dprobs.array().colwise() -
                             (dprobs.array() * cache.probs.array()).rowwise().sum());
    std::vector<Eigen::MatrixXd> gw(layers);
    std::vector<Eigen::VectorXd> gb(layers);
    for (std::size_t l = layers; l-- > 0;) {
      gw[l] = delta.transpose() * cache.acts[l];
      gb[l] = delta.colwise().sum();
      if (l > 0) {
        delta = delta * w_[l];
        delta = delta.array() * (cache.acts[l].array() > 0.0).cast<double>();
      }
    }
    std::vector<double> flat;
    flat.reserve(param_count());
    for (std::size_t l = 0; l < layers; ++l) {
      flat.insert(flat.end(), gw[l].data(), gw[l].data() + gw[l].size());
      flat.insert(flat.end(), gb[l].data(), gb[l].data() + gb[l].size());
    }
    return flat;
  }

  std::vector<double> params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (std::size_t l = 0; l < w_.size(); ++l) {
      flat.insert(flat.end(), w_[l].data(), w_[l].data() + w_[l].size());
      flat.insert(flat.end(), b_[l].data(), b_[l].data() + b_[l].size());
    }
    return flat;
  }

  void set_params(const std::vector<double>& flat) {
    if (flat.size() != param_count()) throw dimension_error("WeightNet: parameter count mismatch");
    std::size_t off = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), w_[l].size(), w_[l].data());
      off += static_cast<std::size_t>(w_[l].size());
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), b_[l].size(), b_[l].data());
      off += static_cast<std::size_t>(b_[l].size());
    }
  }

  // Checkpoint: self-describing JSON, round-trips bit-exactly (doubles are
  // serialized with shortest-exact decimal representation).
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "credal-weightnet-v1";
    j["layer_sizes"] = sizes_;
    j["params"] = params();
    return j;
  }

  static WeightNet from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j.at("format") != "credal-weightnet-v1")
      throw data_error("WeightNet checkpoint: unknown format");
    WeightNet net = init(j.at("layer_sizes").get<std::vector<int>>(), RngStream(0));
    net.set_params(j.at("params").get<std::vector<double>>());
    return net;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw data_error("WeightNet: cannot write " + path);
    out << to_json().dump(1) << "\n";
  }

  static WeightNet load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("WeightNet: cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

private:
  static Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd z = logits.colwise() - logits.rowwise().maxCoeff();
    z = z.array().exp();
    return z.array().colwise() / z.array().rowwise().sum();
  }

  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
};

struct TrainConfig {
  CalEstimatorKind loss_estimator;                     // the calibration penalty g-hat
  EstimatorKind scoring_rule = EstimatorKind::Brier;   // Brier or LogLoss
  double gamma = 0.01;
  double learning_rate = 5e-3;
  int batch_size = 0;  // 0 = full batch
  int epochs = 400;
  int patience = 10;
  std::uint64_t seed = 0;
  std::vector<int> hidden = {16, 16, 16};

  void validate() const {
    if (gamma < 0.0) throw usage_error("TrainConfig: gamma must be non-negative");
    if (scoring_rule != EstimatorKind::Brier && scoring_rule != EstimatorKind::LogLoss)
      throw usage_error("TrainConfig: scoring rule must be brier or logloss");
    if (loss_estimator.needs_population() && batch_size > 0 && batch_size < 8)
      throw usage_error("TrainConfig: batch size must be >= 8 for KDE/kernel estimators");
    if (epochs < 1) throw usage_error("TrainConfig: epochs must be >= 1");
  }
};

inline WeightMatrix evaluate_weights(const WeightNet& net, const CredalDataset& data) {
  if (net.input_dim() != data.dim())
    throw dimension_error("evaluate_weights: feature dimension mismatch");
  return WeightMatrix(net.forward(data.features));
}

namespace detail {

struct TrainState {
  std::vector<double> m, v;
  int step = 0;
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& grad,
                      TrainState& st, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(b1, st.step);
  const double c2 = 1.0 - std::pow(b2, st.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * grad[i];
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
  }
}

// Combined loss l(f_Lambda, y) + gamma * g(f_Lambda) on rows `idx`, with the
// gradient mapped back onto the network output (d loss / d Lambda).
struct BatchLoss {
  double value = 0.0;
  Eigen::MatrixXd dlambda;  // |idx| x M
};

inline BatchLoss combined_loss(const CredalDataset& data, const std::vector<int>& idx,
                               const Eigen::MatrixXd& lambda_rows, const TrainConfig& cfg,
                               bool want_gradient) {
  const int m = data.m();
  const int k = data.k();
  const Eigen::Index b = static_cast<Eigen::Index>(idx.size());

  Eigen::MatrixXd preds = Eigen::MatrixXd::Zero(b, k);
  std::vector<Eigen::MatrixXd> member_rows(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    auto& mr = member_rows[static_cast<std::size_t>(j)];
    mr.resize(b, k);
    for (Eigen::Index r = 0; r < b; ++r)
      mr.row(r) = data.members[static_cast<std::size_t>(j)].row(idx[static_cast<std::size_t>(r)]);
    preds.array() += mr.array().colwise() * lambda_rows.col(j).array();
  }
  std::vector<int> batch_labels(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    batch_labels[r] = data.labels[static_cast<std::size_t>(idx[r])];

  const CalEstimatorKind score{cfg.scoring_rule, 0.0, 0.0};
  CalEstimate sr = estimate(score, preds, batch_labels, want_gradient);
  CalEstimate cal = estimate(cfg.loss_estimator, preds, batch_labels, want_gradient);

  BatchLoss out;
  out.value = sr.value + cfg.gamma * cal.value;
  if (want_gradient) {
    Eigen::MatrixXd dpreds = *sr.gradient + cfg.gamma * *cal.gradient;
    out.dlambda.resize(b, m);
    for (int j = 0; j < m; ++j)
      out.dlambda.col(j) =
          (dpreds.array() * member_rows[static_cast<std::size_t>(j)].array()).rowwise().sum();
  }
  return out;
}

}  // namespace detail

// Mini-batch Adam on the combined proper-scoring-rule + calibration loss.
// Early stopping monitors the combined loss on the last 20% of opt-data; the
// parameters achieving the best held-out loss are returned.
inline WeightNet train_weight_net(const CredalDataset& opt_data, TrainConfig cfg) {
  cfg.validate();
  if (!opt_data.labeled()) throw domain_error("train_weight_net: opt-data must be labeled");

  std::vector<int> layers;
  layers.push_back(opt_data.dim());
  for (int h : cfg.hidden) layers.push_back(h);
  layers.push_back(opt_data.m());
  RngStream rng(cfg.seed, 0x6d65746100000000ULL);
  WeightNet net = WeightNet::init(layers, rng.split(0));

  // A single member admits only the trivial combination.
  if (opt_data.m() == 1) return net;

  const int n = opt_data.n();
  const int n_holdout = std::max(1, n / 5);
  const int n_train = n - n_holdout;
  if (cfg.batch_size > 0 && n < 2 * cfg.batch_size)
    throw domain_error("train_weight_net: need N >= 2 * batch size");
  if (n_train < 2) throw domain_error("train_weight_net: opt-data too small");

  std::vector<int> train_idx(static_cast<std::size_t>(n_train));
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<int> holdout_idx(static_cast<std::size_t>(n_holdout));
  std::iota(holdout_idx.begin(), holdout_idx.end(), n_train);

  // Smoothing parameters are resolved once, from the mean-predictor
  // combination on the training slice (the training start point).
  if (cfg.loss_estimator.needs_population()) {
    const Eigen::MatrixXd start =
        mean_predictor(opt_data.subset(train_idx));
    cfg.loss_estimator = resolve_estimator(cfg.loss_estimator, start);
  }

  const int batch = cfg.batch_size > 0 ? std::min(cfg.batch_size, n_train) : n_train;
  std::vector<double> params = net.params();
  std::vector<double> best_params = params;
  double best_holdout = std::numeric_limits<double>::infinity();
  int since_best = 0;
  detail::TrainState adam;
  RngStream shuffle_rng = rng.split(1);

  std::vector<int> order = train_idx;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n_train) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
    }
    for (int start = 0; start + batch <= n_train; start += batch) {
      std::vector<int> idx(order.begin() + start, order.begin() + start + batch);
      const Eigen::MatrixXd feats = [&] {
        Eigen::MatrixXd f(batch, opt_data.dim());
        for (int r = 0; r < batch; ++r)
          f.row(r) = opt_data.features.row(idx[static_cast<std::size_t>(r)]);
        return f;
      }();
      const auto cache = net.forward_cached(feats);
      auto loss = detail::combined_loss(opt_data, idx, cache.probs, cfg, true);
      if (!std::isfinite(loss.value))
        throw numeric_error("train_weight_net: non-finite loss at epoch " +
                            std::to_string(epoch));
      const std::vector<double> grad = net.backward(cache, loss.dlambda);
      detail::adam_step(params, grad, adam, cfg.learning_rate);
      net.set_params(params);
    }

    const Eigen::MatrixXd hfeats = [&] {
      Eigen::MatrixXd f(n_holdout, opt_data.dim());
      for (int r = 0; r < n_holdout; ++r)
        f.row(r) = opt_data.features.row(holdout_idx[static_cast<std::size_t>(r)]);
      return f;
    }();
    const double holdout =
        detail::combined_loss(opt_data, holdout_idx, net.forward(hfeats), cfg, false).value;
    if (!std::isfinite(holdout))
      throw numeric_error("train_weight_net: non-finite held-out loss");
    if (holdout < best_holdout - 1e-12) {
      best_holdout = holdout;
      best_params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  net.set_params(best_params);
  return net;
}

// Exhaustive minimization of g-hat over constant weights on a simplex lattice
// of the given spacing. Brute-force oracle for the constant-lambda case.
inline std::pair<Eigen::VectorXd, double> grid_search_constant_lambda(
    const CredalDataset& data, const CalEstimatorKind& estimator, double step) {
  if (!data.labeled()) throw domain_error("grid_search_constant_lambda: data must be labeled");
  const int m = data.m();
  if (m > 4) throw usage_error("grid_search_constant_lambda: M > 4 unsupported");
  if (!(step > 0.0 && step <= 1.0)) throw usage_error("grid_search_constant_lambda: bad step");

  const CalEstimatorKind resolved = resolve_estimator(estimator, mean_predictor(data));

  if (m == 1) {
    Eigen::VectorXd lambda = Eigen::VectorXd::Ones(1);
    const double v =
        estimate(resolved, data.members.front(), data.labels).value;
    return {lambda, v};
  }

  const int ticks = static_cast<int>(std::llround(1.0 / step));
  Eigen::VectorXd best_lambda;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<int> counts(static_cast<std::size_t>(m), 0);

  // Enumerate lattice points (c_1, ..., c_M) with sum c = ticks.
  std::function<void(int, int)> recurse = [&](int pos, int remaining) {
    if (pos == m - 1) {
      counts[static_cast<std::size_t>(pos)] = remaining;
      Eigen::VectorXd lambda(m);
      for (int j = 0; j < m; ++j)
        lambda[j] = static_cast<double>(counts[static_cast<std::size_t>(j)]) / ticks;
      const Eigen::MatrixXd preds = combine_dataset(data, WeightMatrix::constant(data.n(), lambda));
      const double v = estimate(resolved, preds, data.labels).value;
      if (v < best_value) {
        best_value = v;
        best_lambda = lambda;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<std::size_t>(pos)] = c;
      recurse(pos + 1, remaining - c);
    }
  };
  recurse(0, ticks);
  return {best_lambda, best_value};
}

}  // namespace credal
