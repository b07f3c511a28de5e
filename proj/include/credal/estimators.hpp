#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "credal/errors.hpp"
#include "credal/mathutil.hpp"
#include "credal/simplex.hpp"

namespace credal {

enum class EstimatorKind { Brier, LogLoss, Ce2Kde, CeklKde, CekKernel, CeMmd };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Brier: return "brier";
    case EstimatorKind::LogLoss: return "logloss";
    case EstimatorKind::Ce2Kde: return "ce2";
    case EstimatorKind::CeklKde: return "cekl";
    case EstimatorKind::CekKernel: return "cek";
    case EstimatorKind::CeMmd: return "cemmd";
  }
  return "?";
}

inline EstimatorKind estimator_kind_from_string(const std::string& s) {
  if (s == "brier") return EstimatorKind::Brier;
  if (s == "logloss") return EstimatorKind::LogLoss;
  if (s == "ce2") return EstimatorKind::Ce2Kde;
  if (s == "cekl") return EstimatorKind::CeklKde;
  if (s == "cek") return EstimatorKind::CekKernel;
  if (s == "cemmd") return EstimatorKind::CeMmd;
  throw usage_error("unknown estimator '" + s + "'");
}

// Estimator selection plus its smoothing parameter. bandwidth applies to the
// KDE kinds, kernel_scale to the kernel kinds; 0 means "resolve from the
// predictions" (LOO likelihood grid / median heuristic) before estimating.
struct CalEstimatorKind {
  EstimatorKind kind = EstimatorKind::Ce2Kde;
  double bandwidth = 0.0;
  double kernel_scale = 0.0;

  bool is_kde() const { return kind == EstimatorKind::Ce2Kde || kind == EstimatorKind::CeklKde; }
  bool is_kernel() const {
    return kind == EstimatorKind::CekKernel || kind == EstimatorKind::CeMmd;
  }
  bool needs_population() const { return is_kde() || is_kernel(); }
};

struct CalEstimate {
  double value = 0.0;
  std::optional<Eigen::MatrixXd> gradient;  // N x K, d value / d preds
  bool kde_fallback = false;                // some KDE rows fell back to the global frequency
};

namespace detail {

inline void check_labeled_shape(const Eigen::MatrixXd& preds, std::span<const int> labels,
                                int min_n) {
  if (preds.rows() < min_n)
    throw domain_error("estimator: need at least " + std::to_string(min_n) + " instances");
  if (static_cast<Eigen::Index>(labels.size()) != preds.rows())
    throw dimension_error("estimator: labels length mismatch");
  for (int y : labels)
    if (y < 0 || y >= preds.cols()) throw data_error("estimator: label out of range");
}

inline Eigen::MatrixXd one_hot_matrix(std::span<const int> labels, int num_classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return y;
}

inline Eigen::RowVectorXd label_frequency(std::span<const int> labels, int num_classes) {
  Eigen::RowVectorXd f = Eigen::RowVectorXd::Zero(num_classes);
  for (int y : labels) f[y] += 1.0;
  return f / static_cast<double>(labels.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Proper scoring rules
// ---------------------------------------------------------------------------

inline CalEstimate brier_score(const Eigen::MatrixXd& preds, std::span<const int> labels,
                               bool want_gradient = false) {
  detail::check_labeled_shape(preds, labels, 1);
  const double n = static_cast<double>(preds.rows());
  const Eigen::MatrixXd y = detail::one_hot_matrix(labels, static_cast<int>(preds.cols()));
  CalEstimate out;
  out.value = (preds - y).squaredNorm() / n;
  if (want_gradient) out.gradient = 2.0 * (preds - y) / n;
  return out;
}

inline CalEstimate log_loss(const Eigen::MatrixXd& preds, std::span<const int> labels,
                            bool want_gradient = false) {
  detail::check_labeled_shape(preds, labels, 1);
  const double n = static_cast<double>(preds.rows());
  CalEstimate out;
  Eigen::MatrixXd grad;
  if (want_gradient) grad = Eigen::MatrixXd::Zero(preds.rows(), preds.cols());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < preds.rows(); ++i) {
    const double p = preds(i, labels[static_cast<std::size_t>(i)]);
    acc -= std::log(std::max(p, kLogClamp));
    if (want_gradient && p > kLogClamp)
      grad(i, labels[static_cast<std::size_t>(i)]) = -1.0 / (n * p);
  }
  out.value = acc / n;
  if (want_gradient) out.gradient = std::move(grad);
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet-kernel conditional mean (leave-one-out)
// ---------------------------------------------------------------------------

namespace detail {

// Row-normalized leave-one-out kernel weights for the Dirichlet KDE
// K(u; c) = Dir(u; c/h + 1), evaluated in log space. A row falls back (all
// weights treated as underflowed) when its best unnormalized log-weight is
// below what exp() can represent.
struct KdeCache {
  Eigen::MatrixXd weights;        // N x N, zero diagonal, rows sum to 1 (or 0 when fallback)
  std::vector<std::uint8_t> fallback;
  bool any_fallback = false;
  double bandwidth = 0.0;
};

inline constexpr double kKdeUnderflowLog = -700.0;

inline KdeCache build_kde_cache(const Eigen::MatrixXd& preds, double bandwidth) {
  if (!(bandwidth > 0.0)) throw domain_error("kde: bandwidth must be positive");
  const Eigen::Index n = preds.rows();
  const Eigen::Index k = preds.cols();
  const double h = bandwidth;

  Eigen::MatrixXd logp = preds.array().max(kLogClamp).log().matrix();  // N x K
  // log K(f_i; f_j) = a_j + (1/h) * sum_k f_jk * log f_ik
  Eigen::VectorXd a(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = 0.0, lg = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      s += preds(j, c);
      lg += std::lgamma(preds(j, c) / h + 1.0);
    }
    a[j] = std::lgamma(s / h + static_cast<double>(k)) - lg;
  }
  Eigen::MatrixXd logw = (preds / h) * logp.transpose();  // (j, i) cross term
  logw.colwise() += a;

  KdeCache cache;
  cache.bandwidth = h;
  cache.fallback.assign(static_cast<std::size_t>(n), 0);
  cache.weights.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) best = std::max(best, logw(j, i));
    if (!(best > kKdeUnderflowLog)) {
      cache.fallback[static_cast<std::size_t>(j)] = 1;
      cache.any_fallback = true;
      cache.weights.row(j).setZero();
      continue;
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = (i == j) ? 0.0 : std::exp(logw(j, i) - best);
      cache.weights(j, i) = w;
      sum += w;
    }
    cache.weights.row(j) /= sum;
  }
  return cache;
}

// E-hat = weights * onehot(labels); fallback rows use the global frequency.
inline Eigen::MatrixXd kde_conditional_means(const KdeCache& cache, std::span<const int> labels,
                                             int num_classes) {
  Eigen::MatrixXd e = cache.weights * one_hot_matrix(labels, num_classes);
  if (cache.any_fallback) {
    const Eigen::RowVectorXd freq = label_frequency(labels, num_classes);
    for (std::size_t j = 0; j < cache.fallback.size(); ++j)
      if (cache.fallback[j]) e.row(static_cast<Eigen::Index>(j)) = freq;
  }
  return e;
}

// Backpropagates d(loss)/d(E-hat) through the leave-one-out Dirichlet kernel
// weights onto the predictions, accumulating into grad.
inline void kde_chain_gradient(const Eigen::MatrixXd& preds, std::span<const int> labels,
                               const KdeCache& cache, const Eigen::MatrixXd& e_hat,
                               const Eigen::MatrixXd& dloss_dehat, Eigen::MatrixXd& grad) {
  const Eigen::Index n = preds.rows();
  const Eigen::Index k = preds.cols();
  const double h = cache.bandwidth;

  // s(j,i) = dloss_dehat[j, y_i] - <dloss_dehat[j], e_hat[j]>; a = weights .* s
  Eigen::MatrixXd s = dloss_dehat * one_hot_matrix(labels, static_cast<int>(k)).transpose();
  const Eigen::VectorXd dots = (dloss_dehat.array() * e_hat.array()).rowwise().sum();
  s.colwise() -= dots;
  Eigen::MatrixXd a = cache.weights.array() * s.array();
  for (std::size_t j = 0; j < cache.fallback.size(); ++j)
    if (cache.fallback[j]) a.row(static_cast<Eigen::Index>(j)).setZero();

  const Eigen::VectorXd row_sum = a.rowwise().sum();
  const Eigen::MatrixXd logp = preds.array().max(kLogClamp).log().matrix();

  // d logK(f_i; f_j) / d f_jk = (1/h) (psi(S_j/h + K) - psi(f_jk/h + 1) + log f_ik)
  for (Eigen::Index j = 0; j < n; ++j) {
    if (cache.fallback[static_cast<std::size_t>(j)]) continue;
    const double psi_s = digamma(preds.row(j).sum() / h + static_cast<double>(k));
    for (Eigen::Index c = 0; c < k; ++c)
      grad(j, c) += row_sum[j] * (psi_s - digamma(preds(j, c) / h + 1.0)) / h;
  }
  grad.noalias() += (a * logp) / h;

  // d logK(f_i; f_j) / d f_ik = (f_jk/h) / f_ik (clamped; flat below the clamp)
  const Eigen::MatrixXd t = a.transpose() * preds;  // (i, k) = sum_j a(j,i) f_jk
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      if (preds(i, c) > kLogClamp) grad(i, c) += t(i, c) / (h * preds(i, c));
}

}  // namespace detail

struct KdeConditionalMean {
  ProbVector estimate;
  bool fallback = false;
};

// Nadaraya-Watson estimate of E[y | f(x_j)] with the Dirichlet kernel,
// leaving instance j out.
inline KdeConditionalMean kde_conditional_mean(const Eigen::MatrixXd& preds,
                                               std::span<const int> labels, double bandwidth,
                                               int at) {
  detail::check_labeled_shape(preds, labels, 2);
  if (at < 0 || at >= preds.rows()) throw dimension_error("kde_conditional_mean: index range");
  const auto cache = detail::build_kde_cache(preds, bandwidth);
  const Eigen::MatrixXd e =
      detail::kde_conditional_means(cache, labels, static_cast<int>(preds.cols()));
  return {ProbVector(e.row(at).transpose()),
          cache.fallback[static_cast<std::size_t>(at)] != 0};
}

// ---------------------------------------------------------------------------
// CE_2 and CE_KL via the Dirichlet KDE
// ---------------------------------------------------------------------------

inline CalEstimate ce2_kde(const Eigen::MatrixXd& preds, std::span<const int> labels,
                           double bandwidth, bool want_gradient = false) {
  detail::check_labeled_shape(preds, labels, 2);
  const double n = static_cast<double>(preds.rows());
  const auto cache = detail::build_kde_cache(preds, bandwidth);
  const Eigen::MatrixXd e =
      detail::kde_conditional_means(cache, labels, static_cast<int>(preds.cols()));
  const double v = std::max((e - preds).squaredNorm() / n, 0.0);

  CalEstimate out;
  out.value = std::sqrt(v);
  out.kde_fallback = cache.any_fallback;
  if (want_gradient) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(preds.rows(), preds.cols());
    if (out.value > 0.0) {
      const Eigen::MatrixXd dv_de = (e - preds) / (n * out.value);
      grad -= dv_de;  // direct -f_j term
      detail::kde_chain_gradient(preds, labels, cache, e, dv_de, grad);
    }
    out.gradient = std::move(grad);
  }
  return out;
}

inline CalEstimate cekl_kde(const Eigen::MatrixXd& preds, std::span<const int> labels,
                            double bandwidth, bool want_gradient = false) {
  detail::check_labeled_shape(preds, labels, 2);
  const Eigen::Index n = preds.rows();
  const Eigen::Index k = preds.cols();
  const double dn = static_cast<double>(n);
  const auto cache = detail::build_kde_cache(preds, bandwidth);
  const Eigen::MatrixXd e = detail::kde_conditional_means(cache, labels, static_cast<int>(k));

  double acc = 0.0;
  Eigen::MatrixXd dloss_de;
  Eigen::MatrixXd grad;
  if (want_gradient) {
    dloss_de = Eigen::MatrixXd::Zero(n, k);
    grad = Eigen::MatrixXd::Zero(n, k);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index c = 0; c < k; ++c) {
      const double ev = e(j, c);
      const double q = std::max(preds(j, c), kLogClamp);
      const double lr = std::log(std::max(ev, kLogClamp)) - std::log(q);
      acc += ev * lr;
      if (want_gradient) {
        dloss_de(j, c) = (lr + (ev > kLogClamp ? 1.0 : 0.0)) / dn;
        if (preds(j, c) > kLogClamp) grad(j, c) = -ev / (dn * q);
      }
    }
  }
  CalEstimate out;
  out.value = std::max(acc / dn, 0.0);
  out.kde_fallback = cache.any_fallback;
  if (want_gradient) {
    detail::kde_chain_gradient(preds, labels, cache, e, dloss_de, grad);
    out.gradient = std::move(grad);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel calibration error (unbiased consecutive-pair U-statistic)
// ---------------------------------------------------------------------------

inline CalEstimate cek_unbiased(const Eigen::MatrixXd& preds, std::span<const int> labels,
                                double kernel_scale, bool want_gradient = false) {
  detail::check_labeled_shape(preds, labels, 2);
  if (!(kernel_scale > 0.0)) throw domain_error("cek: kernel scale must be positive");
  const Eigen::Index n = preds.rows();
  const Eigen::Index k = preds.cols();
  const Eigen::Index pairs = n / 2;
  const double dp = static_cast<double>(pairs);

  CalEstimate out;
  Eigen::MatrixXd grad;
  if (want_gradient) grad = Eigen::MatrixXd::Zero(n, k);
  double acc = 0.0;
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const Eigen::Index i = 2 * p, j = 2 * p + 1;
    const double kappa = std::exp(-(preds.row(i) - preds.row(j)).lpNorm<1>() / kernel_scale);
    Eigen::RowVectorXd ri = -preds.row(i);
    ri[labels[static_cast<std::size_t>(i)]] += 1.0;
    Eigen::RowVectorXd rj = -preds.row(j);
    rj[labels[static_cast<std::size_t>(j)]] += 1.0;
    const double dot = ri.dot(rj);
    acc += kappa * dot;
    if (want_gradient) {
      for (Eigen::Index c = 0; c < k; ++c) {
        const double diff = preds(i, c) - preds(j, c);
        const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        const double dk = -kappa * sgn / kernel_scale;
        grad(i, c) += (dk * dot - kappa * rj[c]) / dp;
        grad(j, c) += (-dk * dot - kappa * ri[c]) / dp;
      }
    }
  }
  out.value = acc / dp;
  if (want_gradient) out.gradient = std::move(grad);
  return out;
}

// ---------------------------------------------------------------------------
// MMD calibration error (label-delta x RBF joint kernel, z_i = f(x_i))
// ---------------------------------------------------------------------------

inline CalEstimate cemmd(const Eigen::MatrixXd& preds, std::span<const int> labels,
                         double kernel_scale, bool want_gradient = false) {
  detail::check_labeled_shape(preds, labels, 2);
  if (!(kernel_scale > 0.0)) throw domain_error("cemmd: kernel scale must be positive");
  const Eigen::Index n = preds.rows();
  const Eigen::Index k = preds.cols();
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
  const double inv_s2 = 1.0 / (kernel_scale * kernel_scale);

  CalEstimate out;
  Eigen::MatrixXd grad;
  if (want_gradient) grad = Eigen::MatrixXd::Zero(n, k);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int yi = labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int yj = labels[static_cast<std::size_t>(j)];
      const double d2 = (preds.row(i) - preds.row(j)).squaredNorm();
      const double kappa = std::exp(-0.5 * d2 * inv_s2);
      const double bracket = (yi == yj ? 1.0 : 0.0) + preds.row(i).dot(preds.row(j)) -
                             preds(i, yj) - preds(j, yi);
      acc += 2.0 * kappa * bracket;
      if (want_gradient) {
        const double w = 2.0 * norm;
        for (Eigen::Index c = 0; c < k; ++c) {
          const double diff = preds(i, c) - preds(j, c);
          const double dki = -kappa * diff * inv_s2;
          double dbi = preds(j, c) - (c == yj ? 1.0 : 0.0);
          double dbj = preds(i, c) - (c == yi ? 1.0 : 0.0);
          grad(i, c) += w * (dki * bracket + kappa * dbi);
          grad(j, c) += w * (-dki * bracket + kappa * dbj);
        }
      }
    }
  }
  out.value = acc * norm;
  if (want_gradient) out.gradient = std::move(grad);
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing-parameter resolution
// ---------------------------------------------------------------------------

inline const std::vector<double>& bandwidth_grid() {
  static const std::vector<double> grid{1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
  return grid;
}

struct BandwidthSelection {
  double bandwidth = 1.0;
  bool degenerate = false;  // all predictions identical; grid maximum returned
};

// Bandwidth maximizing the leave-one-out log pseudo-likelihood of the
// Dirichlet KDE over the prediction cloud.
inline BandwidthSelection select_bandwidth(const Eigen::MatrixXd& preds,
                                           const std::vector<double>& grid = bandwidth_grid()) {
  if (grid.empty()) throw domain_error("select_bandwidth: empty grid");
  if (preds.rows() < 10) throw domain_error("select_bandwidth: need N >= 10");
  const Eigen::Index n = preds.rows();
  const Eigen::Index k = preds.cols();

  double spread = 0.0;
  for (Eigen::Index i = 1; i < n; ++i)
    spread = std::max(spread, (preds.row(i) - preds.row(0)).lpNorm<Eigen::Infinity>());
  if (spread < 1e-12)
    return {*std::max_element(grid.begin(), grid.end()), true};

  const Eigen::MatrixXd logp = preds.array().max(kLogClamp).log().matrix();
  const Eigen::MatrixXd cross = preds * logp.transpose();  // (j, i) = sum_k f_jk log f_ik

  double best_h = grid.front();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double h : grid) {
    Eigen::VectorXd a(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0, lg = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) {
        s += preds(j, c);
        lg += std::lgamma(preds(j, c) / h + 1.0);
      }
      a[j] = std::lgamma(s / h + static_cast<double>(k)) - lg;
    }
    double ll = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) m = std::max(m, a[i] + cross(i, j) / h);
      double lse = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) lse += std::exp(a[i] + cross(i, j) / h - m);
      ll += m + std::log(lse) - std::log(static_cast<double>(n - 1));
    }
    if (ll > best_ll) {
      best_ll = ll;
      best_h = h;
    }
  }
  return {best_h, false};
}

inline double median_pairwise_distance(const Eigen::MatrixXd& preds, int p_norm) {
  const Eigen::Index n = preds.rows();
  if (n < 2) throw domain_error("median_pairwise_distance: need N >= 2");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d.push_back(p_norm == 1 ? (preds.row(i) - preds.row(j)).lpNorm<1>()
                              : (preds.row(i) - preds.row(j)).norm());
  const double med = median(std::move(d));
  return med > 0.0 ? med : 1.0;
}

// Fills in bandwidth / kernel scale from the prediction cloud when left at 0.
inline CalEstimatorKind resolve_estimator(CalEstimatorKind spec, const Eigen::MatrixXd& preds) {
  if (spec.is_kde() && spec.bandwidth <= 0.0)
    spec.bandwidth = select_bandwidth(preds).bandwidth;
  if (spec.is_kernel() && spec.kernel_scale <= 0.0)
    spec.kernel_scale =
        median_pairwise_distance(preds, spec.kind == EstimatorKind::CekKernel ? 1 : 2);
  return spec;
}

inline CalEstimate estimate(const CalEstimatorKind& spec, const Eigen::MatrixXd& preds,
                            std::span<const int> labels, bool want_gradient = false) {
  switch (spec.kind) {
    case EstimatorKind::Brier: return brier_score(preds, labels, want_gradient);
    case EstimatorKind::LogLoss: return log_loss(preds, labels, want_gradient);
    case EstimatorKind::Ce2Kde: return ce2_kde(preds, labels, spec.bandwidth, want_gradient);
    case EstimatorKind::CeklKde: return cekl_kde(preds, labels, spec.bandwidth, want_gradient);
    case EstimatorKind::CekKernel:
      return cek_unbiased(preds, labels, spec.kernel_scale, want_gradient);
    case EstimatorKind::CeMmd: return cemmd(preds, labels, spec.kernel_scale, want_gradient);
  }
  throw domain_error("estimate: unknown estimator kind");
}

// ---------------------------------------------------------------------------
// Fixed-predictor evaluator: precomputes everything label-independent so the
// bootstrap loops pay only the label-dependent part per round.
// ---------------------------------------------------------------------------

class FixedPredictorEvaluator {
public:
  FixedPredictorEvaluator(CalEstimatorKind spec, Eigen::MatrixXd preds)
      : spec_(std::move(spec)), preds_(std::move(preds)) {
    if (spec_.is_kde()) {
      kde_ = detail::build_kde_cache(preds_, spec_.bandwidth);
    } else if (spec_.kind == EstimatorKind::CekKernel) {
      if (!(spec_.kernel_scale > 0.0)) throw domain_error("cek: kernel scale must be positive");
      const Eigen::Index pairs = preds_.rows() / 2;
      pair_kappa_.resize(pairs);
      for (Eigen::Index p = 0; p < pairs; ++p)
        pair_kappa_[p] = std::exp(-(preds_.row(2 * p) - preds_.row(2 * p + 1)).lpNorm<1>() /
                                  spec_.kernel_scale);
    } else if (spec_.kind == EstimatorKind::CeMmd) {
      if (!(spec_.kernel_scale > 0.0)) throw domain_error("cemmd: kernel scale must be positive");
      const Eigen::Index n = preds_.rows();
      const double inv_s2 = 1.0 / (spec_.kernel_scale * spec_.kernel_scale);
      kappa_.resize(n, n);
      inner_ = preds_ * preds_.transpose();
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          kappa_(i, j) =
              std::exp(-0.5 * (inner_(i, i) + inner_(j, j) - 2.0 * inner_(i, j)) * inv_s2);
    }
  }

  const CalEstimatorKind& spec() const { return spec_; }
  const Eigen::MatrixXd& preds() const { return preds_; }

  double value(std::span<const int> labels) const {
    const Eigen::Index n = preds_.rows();
    const int k = static_cast<int>(preds_.cols());
    detail::check_labeled_shape(preds_, labels, spec_.needs_population() ? 2 : 1);
    switch (spec_.kind) {
      case EstimatorKind::Brier: return brier_score(preds_, labels).value;
      case EstimatorKind::LogLoss: return log_loss(preds_, labels).value;
      case EstimatorKind::Ce2Kde: {
        const Eigen::MatrixXd e = detail::kde_conditional_means(*kde_, labels, k);
        return std::sqrt(std::max((e - preds_).squaredNorm() / static_cast<double>(n), 0.0));
      }
      case EstimatorKind::CeklKde: {
        const Eigen::MatrixXd e = detail::kde_conditional_means(*kde_, labels, k);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index c = 0; c < k; ++c)
            acc += e(j, c) * (std::log(std::max(e(j, c), kLogClamp)) -
                              std::log(std::max(preds_(j, c), kLogClamp)));
        return std::max(acc / static_cast<double>(n), 0.0);
      }
      case EstimatorKind::CekKernel: {
        const Eigen::Index pairs = n / 2;
        double acc = 0.0;
        for (Eigen::Index p = 0; p < pairs; ++p) {
          const Eigen::Index i = 2 * p, j = 2 * p + 1;
          const int yi = labels[static_cast<std::size_t>(i)];
          const int yj = labels[static_cast<std::size_t>(j)];
          // (e_yi - f_i) . (e_yj - f_j) without materializing residuals
          const double dot = (yi == yj ? 1.0 : 0.0) - preds_(i, yj) - preds_(j, yi) +
                             inner_dot(i, j);
          acc += pair_kappa_[p] * dot;
        }
        return acc / static_cast<double>(pairs);
      }
      case EstimatorKind::CeMmd: {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const int yi = labels[static_cast<std::size_t>(i)];
          for (Eigen::Index j = i + 1; j < n; ++j) {
            const int yj = labels[static_cast<std::size_t>(j)];
            const double bracket =
                (yi == yj ? 1.0 : 0.0) + inner_(i, j) - preds_(i, yj) - preds_(j, yi);
            acc += 2.0 * kappa_(i, j) * bracket;
          }
        }
        return acc / (static_cast<double>(n) * static_cast<double>(n - 1));
      }
    }
    throw domain_error("FixedPredictorEvaluator: unknown kind");
  }

private:
  double inner_dot(Eigen::Index i, Eigen::Index j) const {
    return preds_.row(i).dot(preds_.row(j));
  }

  CalEstimatorKind spec_;
  Eigen::MatrixXd preds_;
  std::optional<detail::KdeCache> kde_;
  Eigen::VectorXd pair_kappa_;
  Eigen::MatrixXd kappa_;
  Eigen::MatrixXd inner_;
};

}  // namespace credal
