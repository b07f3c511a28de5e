#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "credal/errors.hpp"
#include "credal/simplex.hpp"

namespace credal {

struct HullProjection {
  bool inside = false;
  double distance = 0.0;
  Eigen::VectorXd point;    // closest point of the hull, length K
  Eigen::VectorXd weights;  // convex weights over the M vertices achieving it
};

namespace detail {

// Affine minimizer of ||sum_i u_i q_i|| subject to sum u_i = 1 over the active
// set; the KKT system stays tiny (corral size <= M+1).
inline Eigen::VectorXd affine_min_norm(const Eigen::MatrixXd& gram,
                                       const std::vector<int>& corral) {
  const int s = static_cast<int>(corral.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) kkt(a, b) = gram(corral[a], corral[b]);
  kkt.col(s).head(s).setOnes();
  kkt.row(s).head(s).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs[s] = 1.0;
  Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
  return sol.head(s);
}

}  // namespace detail

// Exact projection of `point` onto the convex hull of the vertex rows via
// Wolfe's minimum-norm-point algorithm on the shifted vertices. M <= 20 in
// every use here, so the active-set solves are negligible.
inline HullProjection project_onto_hull(const Eigen::VectorXd& point,
                                        const Eigen::MatrixXd& vertices, double tol = 1e-9) {
  const int m = static_cast<int>(vertices.rows());
  const int k = static_cast<int>(vertices.cols());
  if (m < 1) throw dimension_error("project_onto_hull: need at least one vertex");
  if (point.size() != k) throw dimension_error("project_onto_hull: point dimension mismatch");

  // Shift so the query point is the origin.
  Eigen::MatrixXd q = vertices.rowwise() - point.transpose();
  Eigen::MatrixXd gram = q * q.transpose();

  // Start from the vertex closest to the origin.
  int best = 0;
  for (int j = 1; j < m; ++j)
    if (gram(j, j) < gram(best, best)) best = j;

  std::vector<int> corral{best};
  Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd x = q.row(best).transpose();

  const double slack = 1e-13 * (1.0 + gram.diagonal().maxCoeff());
  const int max_major = 16 * m + 64;
  for (int iter = 0; iter < max_major; ++iter) {
    // Vertex with the most negative directional derivative.
    int jstar = 0;
    double dstar = x.dot(q.row(0).transpose());
    for (int j = 1; j < m; ++j) {
      const double d = x.dot(q.row(j).transpose());
      if (d < dstar) {
        dstar = d;
        jstar = j;
      }
    }
    const double xx = x.squaredNorm();
    if (dstar >= xx - slack) break;  // optimality
    bool already = false;
    for (int c : corral)
      if (c == jstar) already = true;
    if (already) break;
    corral.push_back(jstar);
    Eigen::VectorXd wext(corral.size());
    wext.head(w.size()) = w;
    wext[static_cast<Eigen::Index>(corral.size()) - 1] = 0.0;
    w = wext;

    // Minor cycle: pull the affine minimizer back into the relative interior.
    for (;;) {
      Eigen::VectorXd u = detail::affine_min_norm(gram, corral);
      if ((u.array() > 1e-12).all()) {
        w = u;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < u.size(); ++i)
        if (u[i] <= 1e-12 && w[i] > u[i]) theta = std::min(theta, w[i] / (w[i] - u[i]));
      w = (1.0 - theta) * w + theta * u;
      std::vector<int> next_corral;
      std::vector<double> next_w;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] > 1e-12) {
          next_corral.push_back(corral[static_cast<std::size_t>(i)]);
          next_w.push_back(w[i]);
        }
      }
      if (next_corral.empty()) {  // numerical corner: keep the largest weight
        Eigen::Index imax;
        w.maxCoeff(&imax);
        next_corral.push_back(corral[static_cast<std::size_t>(imax)]);
        next_w.push_back(1.0);
      }
      corral = next_corral;
      w = Eigen::Map<Eigen::VectorXd>(next_w.data(), static_cast<Eigen::Index>(next_w.size()));
      w /= w.sum();
    }
    x.setZero();
    for (std::size_t i = 0; i < corral.size(); ++i)
      x += w[static_cast<Eigen::Index>(i)] * q.row(corral[i]).transpose();
  }

  HullProjection out;
  out.weights = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < corral.size(); ++i)
    out.weights[corral[i]] = w[static_cast<Eigen::Index>(i)];
  out.point = point + x;
  out.distance = x.norm();
  out.inside = out.distance <= tol;
  return out;
}

inline HullProjection point_in_hull(const ProbVector& point,
                                    const std::vector<ProbVector>& vertices,
                                    double tol = 1e-9) {
  if (vertices.empty()) throw dimension_error("point_in_hull: need at least one vertex");
  Eigen::MatrixXd v(static_cast<Eigen::Index>(vertices.size()), point.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].size() != point.size())
      throw dimension_error("point_in_hull: vertex dimension mismatch");
    v.row(static_cast<Eigen::Index>(i)) = vertices[i].values().transpose();
  }
  return project_onto_hull(point.values(), v, tol);
}

}  // namespace credal
