#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "credal/rng.hpp"
#include "credal/simplex.hpp"

using namespace credal;

TEST_CASE("ProbVector renormalizes small drift and rejects large drift", "[simplex]") {
  ProbVector p({0.5 + 4e-7, 0.5});
  REQUIRE(std::abs(p[0] + p[1] - 1.0) < 1e-12);
  REQUIRE_THROWS_AS(ProbVector({0.5, 0.6}), data_error);
  REQUIRE_THROWS_AS(ProbVector({-0.1, 1.1}), data_error);
  REQUIRE_THROWS_AS(ProbVector(Eigen::VectorXd::Ones(1)), dimension_error);
}

TEST_CASE("one-hot vectors are valid ProbVectors", "[simplex]") {
  const ProbVector e = ProbVector::one_hot(2, 4);
  REQUIRE(e[2] == 1.0);
  REQUIRE(e[0] == 0.0);
}

TEST_CASE("convex_combine hand examples", "[simplex]") {
  SECTION("symmetric mixture of opposing one-hots") {
    const ProbVector out = convex_combine({ProbVector({1.0, 0.0}), ProbVector({0.0, 1.0})},
                                          Eigen::Vector2d(0.5, 0.5));
    REQUIRE(out[0] == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("unit weight selects that member") {
    const ProbVector p2({0.3, 0.2, 0.5});
    const ProbVector out =
        convex_combine({ProbVector({0.1, 0.8, 0.1}), p2, ProbVector({0.6, 0.2, 0.2})},
                       Eigen::Vector3d(0.0, 1.0, 0.0));
    for (int k = 0; k < 3; ++k) REQUIRE(out[k] == Catch::Approx(p2[k]).margin(1e-15));
  }
  SECTION("hand arithmetic 0.25*0.2 + 0.75*0.6") {
    const ProbVector out = convex_combine({ProbVector({0.2, 0.8}), ProbVector({0.6, 0.4})},
                                          Eigen::Vector2d(0.25, 0.75));
    REQUIRE(out[0] == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(out[1] == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("length mismatch") {
    REQUIRE_THROWS_AS(
        convex_combine({ProbVector({0.2, 0.8})}, Eigen::Vector2d(0.5, 0.5)),
        dimension_error);
  }
}

namespace {

CredalDataset tiny_dataset() {
  Eigen::MatrixXd m1(1, 2), m2(1, 2);
  m1 << 0.9, 0.1;
  m2 << 0.1, 0.9;
  return CredalDataset::create(Eigen::MatrixXd::Zero(1, 1), {m1, m2});
}

}  // namespace

TEST_CASE("combine_dataset identities", "[simplex]") {
  SECTION("uniform rows give the mean predictor") {
    auto data = tiny_dataset();
    const auto mean = combine_dataset(
        data, WeightMatrix::constant(1, Eigen::Vector2d(0.5, 0.5)));
    REQUIRE(mean(0, 0) == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("one-hot row selects member exactly") {
    auto data = tiny_dataset();
    const auto out = combine_dataset(data, WeightMatrix::constant(1, Eigen::Vector2d(0.0, 1.0)));
    REQUIRE(out(0, 0) == data.members[1](0, 0));
    REQUIRE(out(0, 1) == data.members[1](0, 1));
  }
  SECTION("shape mismatch") {
    auto data = tiny_dataset();
    REQUIRE_THROWS_AS(
        combine_dataset(data, WeightMatrix::constant(2, Eigen::Vector2d(0.5, 0.5))),
        dimension_error);
  }
}

TEST_CASE("sample_dirichlet moments and concentration", "[simplex]") {
  RngStream rng(2024, 1);
  SECTION("draws live on the simplex") {
    for (int i = 0; i < 100; ++i) {
      const ProbVector d = sample_dirichlet(Eigen::Vector3d(0.5, 2.0, 1.0), rng);
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) {
        REQUIRE(d[k] >= 0.0);
        sum += d[k];
      }
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    }
  }
  SECTION("flat Dirichlet mean is the barycenter") {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    const int n = 100000;
    for (int i = 0; i < n; ++i)
      acc += sample_dirichlet(Eigen::Vector3d::Ones(), rng).values();
    for (int k = 0; k < 3; ++k) REQUIRE(std::abs(acc[k] / n - 1.0 / 3.0) < 0.01);
  }
  SECTION("large alpha concentrates") {
    const ProbVector d = sample_dirichlet(Eigen::Vector3d(1e6, 1.0, 1.0), rng);
    REQUIRE(d[0] > 0.99);
  }
  SECTION("rejects non-positive alpha") {
    REQUIRE_THROWS_AS(sample_dirichlet(Eigen::Vector3d(1.0, 0.0, 1.0), rng), domain_error);
  }
}

TEST_CASE("sample_categorical", "[simplex]") {
  SECTION("degenerate distribution always returns its class") {
    RngStream rng(7);
    const ProbVector e = ProbVector::one_hot(1, 3);
    for (int i = 0; i < 50; ++i) REQUIRE(sample_categorical(e, rng) == 1);
  }
  SECTION("fair coin frequency") {
    RngStream rng(8);
    const ProbVector p({0.5, 0.5});
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
      if (sample_categorical(p, rng) == 0) ++ones;
    REQUIRE(std::abs(static_cast<double>(ones) / n - 0.5) < 0.01);
  }
  SECTION("fixed seed repeats the sequence") {
    RngStream a(99), b(99);
    const ProbVector p({0.3, 0.3, 0.4});
    for (int i = 0; i < 100; ++i) REQUIRE(sample_categorical(p, a) == sample_categorical(p, b));
  }
}

TEST_CASE("sample_weight_simplex marginals", "[simplex]") {
  SECTION("rows sum to one") {
    RngStream rng(11);
    const Eigen::MatrixXd w = sample_weight_simplex(5, 200, rng);
    for (int i = 0; i < w.rows(); ++i)
      REQUIRE(w.row(i).sum() == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("M=3 empirical mean is the barycenter") {
    RngStream rng(12);
    const Eigen::MatrixXd w = sample_weight_simplex(3, 100000, rng);
    for (int m = 0; m < 3; ++m) REQUIRE(std::abs(w.col(m).mean() - 1.0 / 3.0) < 0.01);
  }
  SECTION("M=2 first coordinate is U(0,1): Kolmogorov-Smirnov") {
    RngStream rng(13);
    const int n = 100000;
    const Eigen::MatrixXd w = sample_weight_simplex(2, n, rng);
    std::vector<double> xs(w.col(0).data(), w.col(0).data() + n);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = xs[static_cast<std::size_t>(i)];
      ks = std::max(ks, std::abs(u - static_cast<double>(i) / n));
      ks = std::max(ks, std::abs(u - static_cast<double>(i + 1) / n));
    }
    REQUIRE(ks < 0.01);
  }
}
