#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "credal/hull.hpp"
#include "credal/rng.hpp"
#include "credal/simplex.hpp"

using namespace credal;

TEST_CASE("vertex membership", "[hull]") {
  const std::vector<ProbVector> v{ProbVector({0.2, 0.8}), ProbVector({0.6, 0.4})};
  const auto proj = point_in_hull(v[0], v);
  REQUIRE(proj.inside);
  REQUIRE(proj.distance == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("segment endpoint projection in the 1-simplex", "[hull]") {
  const std::vector<ProbVector> v{ProbVector({0.2, 0.8}), ProbVector({0.6, 0.4})};
  const auto proj = point_in_hull(ProbVector({0.7, 0.3}), v);
  REQUIRE_FALSE(proj.inside);
  REQUIRE(proj.distance == Catch::Approx(std::sqrt(0.02)).epsilon(1e-9));
  REQUIRE(proj.point[0] == Catch::Approx(0.6).margin(1e-9));
}

TEST_CASE("mean of vertices is inside", "[hull]") {
  RngStream rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ProbVector> v;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (int j = 0; j < 5; ++j) {
      v.push_back(sample_dirichlet(Eigen::VectorXd::Ones(4), rng));
      mean += v.back().values();
    }
    const auto proj = point_in_hull(ProbVector(mean / 5.0), v, 1e-8);
    REQUIRE(proj.inside);
  }
}

TEST_CASE("random convex combinations project inside", "[hull]") {
  RngStream rng(32);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<ProbVector> v;
    for (int j = 0; j < 6; ++j) v.push_back(sample_dirichlet(Eigen::VectorXd::Ones(3), rng));
    const Eigen::VectorXd w = sample_dirichlet(Eigen::VectorXd::Ones(6), rng).values();
    const ProbVector combo = convex_combine(v, w);
    const auto proj = point_in_hull(combo, v, 1e-8);
    REQUIRE(proj.inside);
  }
}

TEST_CASE("projection distance matches a dense grid search", "[hull]") {
  // Independent oracle: exhaustive search over the weight simplex lattice.
  RngStream rng(33);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd vertices(3, 3);
    for (int j = 0; j < 3; ++j)
      vertices.row(j) = sample_dirichlet(Eigen::Vector3d::Ones(), rng).values().transpose();
    const Eigen::VectorXd point = sample_dirichlet(Eigen::Vector3d::Ones(), rng).values();

    double best = std::numeric_limits<double>::infinity();
    const int ticks = 200;
    for (int a = 0; a <= ticks; ++a)
      for (int b = 0; a + b <= ticks; ++b) {
        const double w0 = static_cast<double>(a) / ticks;
        const double w1 = static_cast<double>(b) / ticks;
        const double w2 = 1.0 - w0 - w1;
        const Eigen::VectorXd cand =
            w0 * vertices.row(0) + w1 * vertices.row(1) + w2 * vertices.row(2);
        best = std::min(best, (cand - point.transpose()).norm());
      }
    const auto proj = project_onto_hull(point, vertices);
    REQUIRE(proj.distance <= best + 1e-9);
    REQUIRE(proj.distance >= best - 2.0 / ticks);
  }
}

TEST_CASE("single vertex hull", "[hull]") {
  Eigen::MatrixXd vertices(1, 2);
  vertices << 0.4, 0.6;
  const auto proj = project_onto_hull(Eigen::Vector2d(0.5, 0.5), vertices);
  REQUIRE_FALSE(proj.inside);
  REQUIRE(proj.distance == Catch::Approx(std::sqrt(0.02)).epsilon(1e-9));
}

TEST_CASE("weights returned by the projection reproduce the projection point", "[hull]") {
  RngStream rng(34);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd vertices(4, 3);
    for (int j = 0; j < 4; ++j)
      vertices.row(j) = sample_dirichlet(Eigen::Vector3d::Ones(), rng).values().transpose();
    Eigen::VectorXd corner = Eigen::Vector3d::Zero();
    corner[0] = 1.0;
    const auto proj = project_onto_hull(corner, vertices);
    REQUIRE(proj.weights.sum() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(proj.weights.minCoeff() >= -1e-12);
    const Eigen::VectorXd rebuilt = vertices.transpose() * proj.weights;
    REQUIRE((rebuilt - proj.point).norm() < 1e-9);
  }
}

TEST_CASE("centroid concentration of Dirichlet-weight sampling exceeds uniform", "[hull]") {
  // Six vertices (corners + edge midpoints) span the whole 2-simplex, so the
  // uniform-measure baseline can be drawn by rejection from the flat
  // Dirichlet. Weight-space sampling must pile up near the centroid.
  Eigen::MatrixXd vertices(6, 3);
  vertices << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0.5, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0.5;
  const Eigen::Vector3d centroid(1.0 / 3, 1.0 / 3, 1.0 / 3);
  const double radius = 0.15;
  const int n = 20000;

  RngStream wrng(35), urng(36);
  int hits_weighted = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd w = sample_dirichlet(Eigen::VectorXd::Ones(6), wrng).values();
    const Eigen::Vector3d pt = vertices.transpose() * w;
    if ((pt - centroid).norm() <= radius) ++hits_weighted;
  }
  int hits_uniform = 0, accepted = 0;
  while (accepted < n) {
    const Eigen::Vector3d pt = sample_dirichlet(Eigen::Vector3d::Ones(), urng).values();
    if (!project_onto_hull(pt, vertices, 1e-7).inside) continue;  // rejection step
    ++accepted;
    if ((pt - centroid).norm() <= radius) ++hits_uniform;
  }
  REQUIRE(hits_weighted > hits_uniform);
}
