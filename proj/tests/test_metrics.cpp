#include <doctest.h>

#include <cmath>
#include <random>

#include "appca/error.hpp"
#include "appca/linalg.hpp"
#include "appca/metrics.hpp"
#include "test_support.hpp"

using namespace appca;
using appca::testing::Gen;
using appca::testing::max_abs;
using appca::testing::projector;

namespace {

// Brute-force minimiser of ||A H - B||_F over 2x2 H: coarse grid, then
// coordinate descent with shrinking steps. Shares no code with the library.
double brute_force_alignment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto cost = [&](const Eigen::Matrix2d& h) { return (a * h - b).norm(); };
  Eigen::Matrix2d best = Eigen::Matrix2d::Zero();
  double best_cost = cost(best);
  const double span = 4.0 * b.norm() / std::max(1e-12, a.norm()) * std::sqrt(a.rows());
  const int steps = 8;
  for (int i0 = -steps; i0 <= steps; ++i0)
    for (int i1 = -steps; i1 <= steps; ++i1)
      for (int i2 = -steps; i2 <= steps; ++i2)
        for (int i3 = -steps; i3 <= steps; ++i3) {
          Eigen::Matrix2d h;
          h << i0, i1, i2, i3;
          h *= span / steps;
          const double c = cost(h);
          if (c < best_cost) {
            best_cost = c;
            best = h;
          }
        }
  double step = span / steps;
  while (step > 1e-12) {
    bool improved = false;
    for (int k = 0; k < 4; ++k)
      for (double dir : {-1.0, 1.0}) {
        Eigen::Matrix2d h = best;
        h(k / 2, k % 2) += dir * step;
        const double c = cost(h);
        if (c < best_cost) {
          best_cost = c;
          best = h;
          improved = true;
        }
      }
    if (!improved) step /= 2;
  }
  return best_cost;
}

}  // namespace

TEST_CASE("alignment error absorbs invertible transforms") {
  Gen gen(3);
  const Eigen::MatrixXd theta = gen.matrix(20, 3);
  CHECK(alignment_error(theta, theta).normalized <= 1e-12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd h = gen.matrix(3, 3);
    CHECK(alignment_error(Eigen::MatrixXd(theta * h), theta).normalized <= 1e-9);
  }
  Eigen::MatrixXd permuted = theta;
  permuted.col(0).swap(permuted.col(2));
  CHECK(alignment_error(permuted, theta).normalized <= 1e-9);
}

TEST_CASE("alignment error matches a brute-force search") {
  Gen gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = gen.matrix(5, 2), b = gen.matrix(5, 2);
    const double raw = alignment_error(a, b).raw_error;
    CHECK(raw == doctest::Approx(brute_force_alignment(a, b)).epsilon(1e-6));
  }
}

TEST_CASE("alignment error properties") {
  Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = gen.integer(4, 30), r = gen.integer(1, 4);
    const Eigen::MatrixXd theta = gen.matrix(n, r);
    const Eigen::MatrixXd hat = gen.matrix(n, r);
    const ErrorReport base = alignment_error(hat, theta);
    CHECK(base.normalized >= 0.0);
    CHECK(base.normalized <= 1.0 + 1e-9);
    const Eigen::MatrixXd h = gen.matrix(r, r) + 3.0 * Eigen::MatrixXd::Identity(r, r);
    const ErrorReport moved = alignment_error(Eigen::MatrixXd(hat * h), theta);
    CHECK(std::abs(moved.raw_error - base.raw_error) <= 1e-8 * (1.0 + base.raw_error));
  }
}

TEST_CASE("projector form agrees for sqrt(n)-scaled orthonormal embeddings") {
  Gen gen(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = gen.integer(6, 40), r = gen.integer(1, 5);
    const Eigen::MatrixXd u = gen.orthonormal(n, r);
    const Eigen::MatrixXd theta = gen.matrix(n, r);
    const ErrorReport rep = alignment_error(Eigen::MatrixXd(std::sqrt(double(n)) * u), theta);
    REQUIRE(rep.projector_form);
    const double explicit_form =
        ((Eigen::MatrixXd::Identity(n, n) - projector(u)) * theta).norm();
    CHECK(std::abs(*rep.projector_form - explicit_form) <= 1e-10 * (1.0 + theta.norm()));
    CHECK(std::abs(rep.raw_error - *rep.projector_form) <= 1e-8 * (1.0 + theta.norm()));
  }
  CHECK_FALSE(alignment_error(gen.matrix(8, 2), gen.matrix(8, 2)).projector_form);
}

TEST_CASE("alignment error input checks") {
  Gen gen(7);
  CHECK_THROWS_AS(alignment_error(gen.matrix(5, 2), gen.matrix(4, 2)), DomainError);
}

TEST_CASE("subspace distance") {
  Gen gen(8);
  const Eigen::MatrixXd u = gen.orthonormal(6, 2);
  CHECK(subspace_distance(u, u) <= 1e-12);
  const Eigen::MatrixXd e1 = Eigen::Vector2d(1, 0), e2 = Eigen::Vector2d(0, 1);
  CHECK(subspace_distance(e1, e2) == doctest::Approx(std::sqrt(2.0)));
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = gen.integer(3, 12);
    const Eigen::MatrixXd a = gen.orthonormal(n, gen.integer(1, n));
    const Eigen::MatrixXd b = gen.orthonormal(n, gen.integer(1, n));
    const Eigen::MatrixXd c = gen.orthonormal(n, gen.integer(1, n));
    const double dab = subspace_distance(a, b);
    CHECK(std::abs(dab - (projector(a) - projector(b)).norm()) <= 1e-10);
    CHECK(dab == subspace_distance(b, a));
    CHECK(dab <= subspace_distance(a, c) + subspace_distance(c, b) + 1e-10);
  }
  CHECK_THROWS_AS(subspace_distance(gen.matrix(4, 2), gen.orthonormal(4, 2)), DomainError);
}

TEST_CASE("information criterion rank selection") {
  Gen gen(9);
  SUBCASE("exact low rank") {
    const Eigen::MatrixXd x = gen.matrix(40, 3) * gen.matrix(3, 30);
    CHECK(rank_select_ic(x, 8) == 3);
  }
  SUBCASE("strong signal plus noise") {
    const Eigen::MatrixXd x = 2.0 * gen.matrix(200, 4) * gen.matrix(4, 150) + gen.matrix(200, 150);
    CHECK(rank_select_ic(x, 10) == 4);
    CHECK(rank_ic_curve(x, 10).size() == 10);
  }
  SUBCASE("pure noise selects one in most seeds") {
    int ones = 0;
    for (int seed = 0; seed < 50; ++seed) {
      Gen g(1000 + static_cast<std::uint64_t>(seed));
      ones += rank_select_ic(g.matrix(60, 40), 5) == 1;
    }
    CHECK(ones > 25);
  }
  SUBCASE("r_max bounds") {
    CHECK_THROWS_AS(rank_select_ic(gen.matrix(10, 8), 5), DomainError);
    CHECK_THROWS_AS(rank_select_ic(gen.matrix(10, 8), 0), DomainError);
  }
}

TEST_CASE("log-log slope fits") {
  std::vector<std::pair<double, double>> pts;
  for (double p : {100.0, 200.0, 400.0, 800.0}) pts.emplace_back(p, 3.0 / std::sqrt(p));
  CHECK(fit_loglog_slope(pts).slope == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::exp(fit_loglog_slope(pts).intercept) == doctest::Approx(3.0).epsilon(1e-10));
  pts.clear();
  for (double p : {100.0, 200.0, 400.0, 800.0}) pts.emplace_back(p, 2.0 * std::pow(p, -0.25));
  CHECK(fit_loglog_slope(pts).slope == doctest::Approx(-0.25).epsilon(1e-10));

  std::mt19937_64 eng(77);
  std::normal_distribution<double> noise(0.0, 0.02);
  int within = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::vector<std::pair<double, double>> q;
    for (int k = 0; k < 6; ++k) {
      const double p = 100.0 * std::pow(10.0, k / 5.0);
      q.emplace_back(p, std::pow(p, -0.5) * (1.0 + noise(eng)));
    }
    within += std::abs(fit_loglog_slope(q).slope + 0.5) <= 0.05;
  }
  CHECK(within == 100);

  CHECK_THROWS_AS(fit_loglog_slope({{1.0, 1.0}, {2.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(fit_loglog_slope({{1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}}), DomainError);
  CHECK_THROWS_AS(fit_loglog_slope({{1.0, 1.0}, {2.0, -2.0}, {3.0, 3.0}}), DomainError);
}
