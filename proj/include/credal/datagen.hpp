#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "credal/errors.hpp"
#include "credal/hull.hpp"
#include "credal/rng.hpp"
#include "credal/simplex.hpp"

namespace credal {

enum class ScenarioFamily { BinaryGP, MulticlassDirichlet };
enum class ScenarioCase { H01, H02, H11, H12, H13 };

inline std::string to_string(ScenarioFamily f) {
  return f == ScenarioFamily::BinaryGP ? "binary" : "multiclass";
}

inline std::string to_string(ScenarioCase c) {
  switch (c) {
    case ScenarioCase::H01: return "H01";
    case ScenarioCase::H02: return "H02";
    case ScenarioCase::H11: return "H11";
    case ScenarioCase::H12: return "H12";
    case ScenarioCase::H13: return "H13";
  }
  return "?";
}

inline ScenarioCase scenario_case_from_string(const std::string& s) {
  if (s == "H01") return ScenarioCase::H01;
  if (s == "H02") return ScenarioCase::H02;
  if (s == "H11") return ScenarioCase::H11;
  if (s == "H12") return ScenarioCase::H12;
  if (s == "H13") return ScenarioCase::H13;
  throw usage_error("unknown scenario case '" + s + "'");
}

inline bool is_null_case(ScenarioCase c) {
  return c == ScenarioCase::H01 || c == ScenarioCase::H02;
}

struct ScenarioSpec {
  ScenarioFamily family = ScenarioFamily::BinaryGP;
  ScenarioCase scenario = ScenarioCase::H01;
  int n = 400;
  int m = 2;
  int k = 2;
  double u = 0.5;             // Dirichlet spread (multiclass)
  double delta = -1.0;        // H1 mixing (multiclass); -1 = per-case default
  double epsilon_max = 0.02;  // H11 offset bound (binary)
  int poly_degree = 2;        // H02 polynomial degree
  double gp_length_scale = 1.0;
  std::uint64_t seed = 0;

  double resolved_delta() const {
    if (delta >= 0.0) return delta;
    switch (scenario) {
      case ScenarioCase::H11: return 0.01;
      case ScenarioCase::H12: return 0.1;
      case ScenarioCase::H13: return 0.2;
      default: return 0.0;
    }
  }

  void validate() const {
    if (n < 2) throw usage_error("ScenarioSpec: need N >= 2");
    if (family == ScenarioFamily::BinaryGP) {
      if (k != 2 || m != 2) throw usage_error("ScenarioSpec: binary scenario requires K=2, M=2");
    } else {
      if (k < 3) throw usage_error("ScenarioSpec: multiclass scenario requires K >= 3");
      if (m < 1) throw usage_error("ScenarioSpec: need M >= 1");
    }
    if (!(u > 0.0)) throw usage_error("ScenarioSpec: u must be positive");
    if (delta > 1.0) throw usage_error("ScenarioSpec: delta must lie in [0,1]");
    if (epsilon_max <= 0.0) throw usage_error("ScenarioSpec: epsilon-max must be positive");
    if (poly_degree < 0) throw usage_error("ScenarioSpec: polynomial degree must be >= 0");
  }
};

struct GroundTruth {
  Eigen::MatrixXd f_star;                   // N x K true conditional distribution
  std::optional<WeightMatrix> lambda_star;  // present under H0
  int regenerated_instances = 0;            // multiclass H1 corner fallbacks
};

// ---------------------------------------------------------------------------
// Gaussian-process path sampling
// ---------------------------------------------------------------------------

// GP path with RBF covariance, unscaled. Jitter starts at 1e-8 and escalates
// to 1e-4 before giving up on the Cholesky factorization.
inline Eigen::VectorXd gp_sample_raw(const Eigen::VectorXd& xs, double length_scale,
                                     RngStream& rng) {
  const Eigen::Index n = xs.size();
  if (n < 2) throw domain_error("gp_sample: need N >= 2");
  if (!(length_scale > 0.0)) throw domain_error("gp_sample: length scale must be positive");

  Eigen::MatrixXd cov(n, n);
  const double inv = 1.0 / (2.0 * length_scale * length_scale);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double d = xs[i] - xs[j];
      cov(i, j) = cov(j, i) = std::exp(-d * d * inv);
    }

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 1e-8;
  for (;;) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) break;
    jitter *= 10.0;
    if (jitter > 1e-4) throw numeric_error("gp_sample: Cholesky failed up to jitter 1e-4");
  }

  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_normal();
  return llt.matrixL() * z;
}

// Min-max scaled to [0,1]; the scaled path attains 0 and 1 exactly.
inline Eigen::VectorXd gp_sample(const Eigen::VectorXd& xs, double length_scale, RngStream& rng) {
  Eigen::VectorXd path = gp_sample_raw(xs, length_scale, rng);
  const double lo = path.minCoeff();
  const double hi = path.maxCoeff();
  if (hi - lo <= 0.0) throw numeric_error("gp_sample: exactly constant path");
  return (path.array() - lo) / (hi - lo);
}

// ---------------------------------------------------------------------------
// Scaled random polynomials onto the weight simplex (multiclass H02)
// ---------------------------------------------------------------------------

inline WeightMatrix random_scaled_polynomials(int m, int degree, const Eigen::VectorXd& xs,
                                              RngStream& rng) {
  if (degree < 0) throw domain_error("random_scaled_polynomials: degree must be >= 0");
  if (m < 1) throw domain_error("random_scaled_polynomials: need M >= 1");
  const Eigen::Index n = xs.size();
  Eigen::MatrixXd vals(n, m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd beta(degree + 1);
    for (int d = 0; d <= degree; ++d) beta[d] = rng.next_uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0, pw = 1.0;
      for (int d = 0; d <= degree; ++d) {
        acc += beta[d] * pw;
        pw *= xs[i];
      }
      vals(i, j) = acc;
    }
    vals.col(j).array() -= vals.col(j).minCoeff();
  }
  vals.array() += 1e-6;
  vals.array().colwise() /= vals.rowwise().sum().array();
  return WeightMatrix(std::move(vals));
}

// ---------------------------------------------------------------------------
// Binary GP scenarios
// ---------------------------------------------------------------------------

namespace detail {

// Places the class-1 probability at signed scalar offset `off` beyond the
// nearer interval endpoint, flipping sides / shrinking when [0,1] leaves no
// room. Returns the placed value or nullopt when no outside placement exists.
inline std::optional<double> place_outside(double lo, double hi, bool below, double off) {
  constexpr double kMinOff = 1e-7;
  off = std::max(off, kMinOff);
  const double room_below = lo;
  const double room_above = 1.0 - hi;
  for (int attempt = 0; attempt < 2; ++attempt, below = !below) {
    const double room = below ? room_below : room_above;
    if (room >= kMinOff) {
      const double use = std::min(off, room);
      return below ? lo - use : hi + use;
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline std::pair<CredalDataset, GroundTruth> generate_binary(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.family != ScenarioFamily::BinaryGP)
    throw usage_error("generate_binary: spec family must be BinaryGP");
  const int n = spec.n;
  const RngStream root(spec.seed, 0xb117a57ULL);

  for (int attempt = 0; attempt < 64; ++attempt) {
    RngStream r = root.split(static_cast<std::uint64_t>(attempt));
    RngStream xs_rng = r.split(0);
    Eigen::VectorXd xs(n);
    for (int i = 0; i < n; ++i) xs[i] = xs_rng.next_uniform(0.0, 5.0);

    RngStream g1_rng = r.split(1), g2_rng = r.split(2);
    const Eigen::VectorXd g1 = gp_sample(xs, spec.gp_length_scale, g1_rng);
    const Eigen::VectorXd g2 = gp_sample(xs, spec.gp_length_scale, g2_rng);

    RngStream case_rng = r.split(3);
    Eigen::VectorXd p_star(n);
    std::optional<WeightMatrix> lambda_star;
    bool ok = true;

    switch (spec.scenario) {
      case ScenarioCase::H01: {
        const double c = case_rng.next_double();
        p_star = c * g1 + (1.0 - c) * g2;
        lambda_star = WeightMatrix::constant(n, Eigen::Vector2d(c, 1.0 - c));
        break;
      }
      case ScenarioCase::H02: {
        Eigen::VectorXd beta(spec.poly_degree + 1);
        for (int d = 0; d <= spec.poly_degree; ++d) beta[d] = case_rng.next_uniform(-1.0, 1.0);
        Eigen::VectorXd lam(n);
        for (int i = 0; i < n; ++i) {
          double acc = 0.0, pw = 1.0;
          for (int d = 0; d <= spec.poly_degree; ++d) {
            acc += beta[d] * pw;
            pw *= xs[i];
          }
          lam[i] = acc;
        }
        const double lo = lam.minCoeff(), hi = lam.maxCoeff();
        if (hi - lo < 1e-12)
          lam.setConstant(0.5);
        else
          lam = (lam.array() - lo) / (hi - lo);
        p_star = lam.array() * g1.array() + (1.0 - lam.array()) * g2.array();
        Eigen::MatrixXd rows(n, 2);
        rows.col(0) = lam;
        rows.col(1) = (1.0 - lam.array()).matrix();
        lambda_star = WeightMatrix(std::move(rows));
        break;
      }
      case ScenarioCase::H11: {
        // One scalar epsilon per dataset; offsets are divided by sqrt(2) so
        // the L2 hull distance in the simplex equals epsilon.
        const double eps = case_rng.next_uniform(0.0, spec.epsilon_max);
        for (int i = 0; i < n && ok; ++i) {
          const double lo = std::min(g1[i], g2[i]), hi = std::max(g1[i], g2[i]);
          const bool below = case_rng.next_double() < 0.5;
          const auto placed = detail::place_outside(lo, hi, below, eps / std::sqrt(2.0));
          if (!placed) ok = false;
          else p_star[i] = *placed;
        }
        break;
      }
      case ScenarioCase::H12:
      case ScenarioCase::H13: {
        // Independent GP exceedance magnitude, scaled per instance so the
        // maximum exceedance is a fraction of the local interval gap; the side
        // follows a second GP reference path for spatial coherence.
        const double frac = spec.scenario == ScenarioCase::H12 ? 0.05 : 0.15;
        RngStream e_rng = r.split(4), ref_rng = r.split(5);
        const Eigen::VectorXd exceed = gp_sample(xs, spec.gp_length_scale, e_rng);
        const Eigen::VectorXd ref = gp_sample(xs, spec.gp_length_scale, ref_rng);
        for (int i = 0; i < n && ok; ++i) {
          const double lo = std::min(g1[i], g2[i]), hi = std::max(g1[i], g2[i]);
          const double gap = hi - lo;
          const bool below = std::abs(ref[i] - lo) <= std::abs(ref[i] - hi);
          const auto placed = detail::place_outside(lo, hi, below, exceed[i] * frac * gap);
          if (!placed) ok = false;
          else p_star[i] = *placed;
        }
        break;
      }
    }
    if (!ok) continue;  // no room outside [0,1] somewhere; redraw everything

    RngStream label_rng = r.split(6);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Eigen::MatrixXd f_star(n, 2);
    for (int i = 0; i < n; ++i) {
      f_star(i, 0) = p_star[i];
      f_star(i, 1) = 1.0 - p_star[i];
      labels[static_cast<std::size_t>(i)] = label_rng.next_double() < p_star[i] ? 0 : 1;
    }

    Eigen::MatrixXd m1(n, 2), m2(n, 2);
    m1.col(0) = g1;
    m1.col(1) = (1.0 - g1.array()).matrix();
    m2.col(0) = g2;
    m2.col(1) = (1.0 - g2.array()).matrix();
    Eigen::MatrixXd features = xs;

    GroundTruth truth;
    truth.f_star = std::move(f_star);
    truth.lambda_star = std::move(lambda_star);
    return {CredalDataset::create(std::move(features), {std::move(m1), std::move(m2)},
                                  std::move(labels)),
            std::move(truth)};
  }
  throw numeric_error("generate_binary: no dataset with valid outside placement in 64 attempts");
}

// ---------------------------------------------------------------------------
// Multiclass Dirichlet scenarios
// ---------------------------------------------------------------------------

inline std::pair<CredalDataset, GroundTruth> generate_multiclass(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.family != ScenarioFamily::MulticlassDirichlet)
    throw usage_error("generate_multiclass: spec family must be MulticlassDirichlet");
  const int n = spec.n, m = spec.m, k = spec.k;
  const double delta = spec.resolved_delta();
  const RngStream root(spec.seed, 0xd112c1e7ULL);

  RngStream xs_rng = root.split(0);
  Eigen::VectorXd xs(n);
  for (int i = 0; i < n; ++i) xs[i] = xs_rng.next_uniform(0.0, 5.0);

  std::vector<Eigen::MatrixXd> members(static_cast<std::size_t>(m));
  for (auto& mm : members) mm.resize(n, k);

  std::optional<WeightMatrix> lambda_star;
  if (spec.scenario == ScenarioCase::H01) {
    RngStream lrng = root.split(1);
    lambda_star =
        WeightMatrix::constant(n, m == 1 ? Eigen::VectorXd::Ones(1).eval()
                                         : sample_dirichlet(Eigen::VectorXd::Ones(m), lrng).values());
  } else if (spec.scenario == ScenarioCase::H02) {
    RngStream lrng = root.split(1);
    lambda_star = random_scaled_polynomials(m, spec.poly_degree, xs, lrng);
  }

  Eigen::MatrixXd f_star(n, k);
  int regenerated = 0;
  const Eigen::VectorXd ones_k = Eigen::VectorXd::Ones(k);

  for (int i = 0; i < n; ++i) {
    for (int inst_attempt = 0;; ++inst_attempt) {
      if (inst_attempt >= 256)
        throw numeric_error("generate_multiclass: instance regeneration did not converge");
      RngStream ri = root.split(1000 + static_cast<std::uint64_t>(i))
                         .split(static_cast<std::uint64_t>(inst_attempt));
      const ProbVector prior = sample_dirichlet(ones_k, ri);
      const Eigen::VectorXd alpha = prior.values() * static_cast<double>(k) / spec.u;
      Eigen::MatrixXd inst(m, k);
      for (int j = 0; j < m; ++j) inst.row(j) = sample_dirichlet(alpha, ri).values().transpose();

      if (is_null_case(spec.scenario)) {
        for (int j = 0; j < m; ++j) members[static_cast<std::size_t>(j)].row(i) = inst.row(j);
        f_star.row(i) = lambda_star->row(i) * inst;
        break;
      }

      // H1: random corner strictly outside the member hull, then mix toward
      // its hull projection.
      std::vector<int> corner_order(static_cast<std::size_t>(k));
      std::iota(corner_order.begin(), corner_order.end(), 0);
      for (std::size_t c = corner_order.size(); c > 1; --c)
        std::swap(corner_order[c - 1], corner_order[ri.next_u64() % c]);

      bool found = false;
      for (int attempt = 0; attempt < k && !found; ++attempt) {
        Eigen::VectorXd corner = Eigen::VectorXd::Zero(k);
        corner[corner_order[static_cast<std::size_t>(attempt)]] = 1.0;
        const HullProjection proj = project_onto_hull(corner, inst, 1e-9);
        if (!proj.inside && proj.distance > 1e-5) {
          f_star.row(i) = (delta * corner + (1.0 - delta) * proj.point).transpose();
          found = true;
        }
      }
      if (found) {
        for (int j = 0; j < m; ++j) members[static_cast<std::size_t>(j)].row(i) = inst.row(j);
        break;
      }
      ++regenerated;
    }
  }

  RngStream label_rng = root.split(2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = sample_categorical_row(f_star.row(i), label_rng);

  GroundTruth truth;
  truth.f_star = std::move(f_star);
  truth.lambda_star = std::move(lambda_star);
  truth.regenerated_instances = regenerated;
  Eigen::MatrixXd features = xs;
  return {CredalDataset::create(std::move(features), std::move(members), std::move(labels)),
          std::move(truth)};
}

inline std::pair<CredalDataset, GroundTruth> generate_scenario(const ScenarioSpec& spec) {
  return spec.family == ScenarioFamily::BinaryGP ? generate_binary(spec)
                                                 : generate_multiclass(spec);
}

}  // namespace credal
