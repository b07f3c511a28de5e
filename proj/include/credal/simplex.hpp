#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "credal/errors.hpp"
#include "credal/rng.hpp"

namespace credal {

inline constexpr double kSimplexSumTol = 1e-9;
inline constexpr double kSimplexRepairTol = 1e-6;

// Repairs a raw row in place to simplex membership: clamps tiny negative noise,
// renormalizes drift up to kSimplexRepairTol, rejects anything worse.
// `where` feeds the error message (CSV row index, dataset slot, ...).
inline void repair_simplex_row(Eigen::Ref<Eigen::RowVectorXd> row, const std::string& where) {
  if (row.size() < 2) throw dimension_error(where + ": need K >= 2 classes");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < row.size(); ++k) {
    double v = row[k];
    if (!std::isfinite(v)) throw data_error(where + ": non-finite probability");
    if (v < 0.0) {
      if (v < -kSimplexRepairTol) throw data_error(where + ": negative probability");
      v = 0.0;
      row[k] = 0.0;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexRepairTol)
    throw data_error(where + ": probabilities sum to " + std::to_string(sum));
  row /= sum;
}

// A point on the (K-1)-simplex. Construction renormalizes drift within 1e-6
// and rejects anything beyond; entries land in [0,1] with sum 1 within 1e-9.
class ProbVector {
public:
  explicit ProbVector(Eigen::VectorXd values) : v_(std::move(values)) {
    Eigen::RowVectorXd row = v_.transpose();
    repair_simplex_row(row, "ProbVector");
    v_ = row.transpose();
  }

  ProbVector(std::initializer_list<double> values)
      : ProbVector(Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                     static_cast<Eigen::Index>(values.size()))) {}

  static ProbVector one_hot(int k, int num_classes) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(num_classes);
    v[k] = 1.0;
    return ProbVector(std::move(v));
  }

  static ProbVector uniform(int num_classes) {
    return ProbVector(Eigen::VectorXd::Constant(num_classes, 1.0 / num_classes));
  }

  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int k) const { return v_[k]; }
  const Eigen::VectorXd& values() const { return v_; }

private:
  Eigen::VectorXd v_;
};

// N x M row-stochastic matrix of evaluated weight functions.
class WeightMatrix {
public:
  explicit WeightMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
      double sum = 0.0;
      for (Eigen::Index m = 0; m < rows_.cols(); ++m) {
        const double v = rows_(i, m);
        if (!std::isfinite(v) || v < -kSimplexSumTol || v > 1.0 + kSimplexSumTol)
          throw data_error("WeightMatrix: entry outside [0,1] at row " + std::to_string(i));
        sum += v;
      }
      if (std::abs(sum - 1.0) > kSimplexSumTol)
        throw data_error("WeightMatrix: row " + std::to_string(i) + " sums to " +
                         std::to_string(sum));
    }
  }

  static WeightMatrix constant(int n, const Eigen::VectorXd& lambda) {
    return WeightMatrix(lambda.transpose().replicate(n, 1));
  }

  int n() const { return static_cast<int>(rows_.rows()); }
  int m() const { return static_cast<int>(rows_.cols()); }
  const Eigen::MatrixXd& rows() const { return rows_; }
  Eigen::RowVectorXd row(int i) const { return rows_.row(i); }

private:
  Eigen::MatrixXd rows_;
};

// N instances x M predictors x K classes, plus features and optional labels.
// Prediction rows are simplex-repaired on construction. Labels are 0-based
// internally; the CSV interface speaks 1-based.
struct CredalDataset {
  Eigen::MatrixXd features;              // N x d
  std::vector<Eigen::MatrixXd> members;  // M matrices, each N x K
  std::vector<int> labels;               // empty when unlabeled

  static CredalDataset create(Eigen::MatrixXd features, std::vector<Eigen::MatrixXd> members,
                              std::vector<int> labels = {}) {
    if (members.empty()) throw dimension_error("CredalDataset: need at least one member");
    const Eigen::Index n = members.front().rows();
    const Eigen::Index k = members.front().cols();
    if (n < 1) throw dimension_error("CredalDataset: need at least one instance");
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (members[m].rows() != n || members[m].cols() != k)
        throw dimension_error("CredalDataset: member " + std::to_string(m) + " shape mismatch");
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::RowVectorXd row = members[m].row(i);
        repair_simplex_row(row, "CredalDataset member " + std::to_string(m) + " row " +
                                    std::to_string(i));
        members[m].row(i) = row;
      }
    }
    if (features.rows() != n)
      throw dimension_error("CredalDataset: features row count mismatch");
    if (!labels.empty()) {
      if (static_cast<Eigen::Index>(labels.size()) != n)
        throw dimension_error("CredalDataset: labels length mismatch");
      for (int y : labels)
        if (y < 0 || y >= k) throw data_error("CredalDataset: label out of range");
    }
    return CredalDataset{std::move(features), std::move(members), std::move(labels)};
  }

  int n() const { return static_cast<int>(members.front().rows()); }
  int m() const { return static_cast<int>(members.size()); }
  int k() const { return static_cast<int>(members.front().cols()); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool labeled() const { return !labels.empty(); }

  // Member predictions at a single instance as an M x K matrix.
  Eigen::MatrixXd instance_set(int i) const {
    Eigen::MatrixXd out(m(), k());
    for (int j = 0; j < m(); ++j) out.row(j) = members[j].row(i);
    return out;
  }

  CredalDataset subset(const std::vector<int>& idx) const {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(idx.size()), features.cols());
    std::vector<Eigen::MatrixXd> mem(members.size());
    for (auto& mm : mem) mm.resize(static_cast<Eigen::Index>(idx.size()), k());
    std::vector<int> lab;
    lab.reserve(labeled() ? idx.size() : 0);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      f.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
      for (std::size_t j = 0; j < members.size(); ++j)
        mem[j].row(static_cast<Eigen::Index>(r)) = members[j].row(idx[r]);
      if (labeled()) lab.push_back(labels[static_cast<std::size_t>(idx[r])]);
    }
    return CredalDataset{std::move(f), std::move(mem), std::move(lab)};
  }
};

// f_lambda = sum_m w_m * preds_m. Closure of the simplex under convex
// combination keeps the result a valid ProbVector.
inline ProbVector convex_combine(const std::vector<ProbVector>& preds,
                                 const Eigen::VectorXd& weights) {
  if (preds.empty()) throw dimension_error("convex_combine: empty prediction set");
  if (static_cast<std::size_t>(weights.size()) != preds.size())
    throw dimension_error("convex_combine: weight length mismatch");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(preds.front().size());
  for (std::size_t m = 0; m < preds.size(); ++m) {
    if (preds[m].size() != acc.size())
      throw dimension_error("convex_combine: prediction size mismatch");
    acc += weights[static_cast<Eigen::Index>(m)] * preds[m].values();
  }
  return ProbVector(std::move(acc));
}

// Row i of the result is the Lambda[i]-weighted combination of the M member
// predictions at instance i.
inline Eigen::MatrixXd combine_dataset(const CredalDataset& data, const WeightMatrix& lambda) {
  if (lambda.n() != data.n() || lambda.m() != data.m())
    throw dimension_error("combine_dataset: weight matrix shape mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(data.n(), data.k());
  for (int m = 0; m < data.m(); ++m)
    out.array() += data.members[static_cast<std::size_t>(m)].array().colwise() *
                   lambda.rows().col(m).array();
  return out;
}

inline Eigen::MatrixXd mean_predictor(const CredalDataset& data) {
  return combine_dataset(
      data, WeightMatrix::constant(data.n(), Eigen::VectorXd::Constant(data.m(),
                                                                       1.0 / data.m())));
}

inline ProbVector sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng) {
  if (alpha.size() < 2) throw domain_error("sample_dirichlet: need K >= 2");
  for (Eigen::Index k = 0; k < alpha.size(); ++k)
    if (!(alpha[k] > 0.0)) throw domain_error("sample_dirichlet: alpha must be positive");
  Eigen::VectorXd g(alpha.size());
  for (;;) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      g[k] = rng.next_gamma(alpha[k]);
      sum += g[k];
    }
    if (sum > 0.0) return ProbVector(g / sum);
    // All gammas underflowed (extreme small alpha); the counter has advanced,
    // so redrawing stays deterministic.
  }
}

// 0-based class index drawn with probability p_k.
inline int sample_categorical(const ProbVector& p, RngStream& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return k;
  }
  return p.size() - 1;
}

inline int sample_categorical_row(const Eigen::RowVectorXd& p, RngStream& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(p.size()) - 1;
}

// i.i.d. draws from the flat Dirichlet over the (M-1)-simplex, rows of the result.
inline Eigen::MatrixXd sample_weight_simplex(int m, int count, RngStream& rng) {
  if (m < 2) throw domain_error("sample_weight_simplex: need M >= 2");
  Eigen::MatrixXd out(count, m);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < count; ++i) out.row(i) = sample_dirichlet(ones, rng).values().transpose();
  return out;
}

}  // namespace credal
