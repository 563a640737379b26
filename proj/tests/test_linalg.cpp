#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "appca/error.hpp"
#include "appca/linalg.hpp"
#include "appca/metrics.hpp"
#include "test_support.hpp"

using namespace appca;
using appca::testing::Gen;
using appca::testing::max_abs;
using appca::testing::projector;

namespace {

// Leading r eigenvectors of X X^T from the symmetric eigensolver.
Eigen::MatrixXd eigen_oracle(const Eigen::MatrixXd& x, Index r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x * x.transpose());
  const Index m = x.rows();
  Eigen::MatrixXd out(m, r);
  for (Index j = 0; j < r; ++j) out.col(j) = es.eigenvectors().col(m - 1 - j);
  return out;
}

void check_svd_invariants(const TruncatedSVD& s, Index r) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(r, r);
  CHECK(max_abs(s.U.transpose() * s.U - I) <= 1e-10);
  CHECK(max_abs(s.V.transpose() * s.V - I) <= 1e-10);
  for (Index j = 0; j + 1 < r; ++j) CHECK(s.S(j) >= s.S(j + 1));
  for (Index j = 0; j < r; ++j) {
    Index arg = 0;
    s.U.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(s.U(arg, j) > 0.0);
  }
}

}  // namespace

TEST_CASE("svd of a diagonal matrix") {
  Eigen::MatrixXd x = Eigen::Vector3d(3, 2, 1).asDiagonal();
  const TruncatedSVD s = svd_top_r(x, 2);
  CHECK(s.S(0) == doctest::Approx(3.0));
  CHECK(s.S(1) == doctest::Approx(2.0));
  CHECK(max_abs(s.U - Eigen::MatrixXd::Identity(3, 2)) <= 1e-14);
}

TEST_CASE("svd of a rank-one matrix follows the sign convention") {
  Eigen::VectorXd u(4), v(3);
  u << 1, -3, 2, 0.5;
  v << -2, 1, 1;
  const TruncatedSVD s = svd_top_r(u * v.transpose(), 1);
  // Largest-magnitude entry of u is negative, so the convention flips it.
  CHECK(max_abs(s.U.col(0) + u.normalized()) <= 1e-12);
  CHECK(max_abs(s.V.col(0) + v.normalized()) <= 1e-12);
  CHECK(s.S(0) == doctest::Approx(u.norm() * v.norm()));
}

TEST_CASE("svd matches the eigendecomposition oracle on random matrices") {
  Gen gen(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = gen.matrix(8, 6);
    const Index r = gen.integer(1, 5);
    const TruncatedSVD s = svd_top_r(x, r);
    check_svd_invariants(s, r);
    CHECK(subspace_distance(s.U, eigen_oracle(x, r)) <= 1e-8);
  }
}

TEST_CASE("top singular values match a Jacobi SVD") {
  Gen gen(102);
  for (int trial = 0; trial < 30; ++trial) {
    const Index rows = gen.integer(2, 40), cols = gen.integer(2, 40);
    const Eigen::MatrixXd x = gen.matrix(rows, cols);
    const Index k = gen.integer(1, std::min(rows, cols));
    const Eigen::VectorXd s = top_singular_values(x, k);
    const Eigen::VectorXd ref = Eigen::JacobiSVD<Eigen::MatrixXd>(x).singularValues().head(k);
    CHECK((s - ref).cwiseAbs().maxCoeff() <= 1e-8 * ref(0));
  }
  CHECK_THROWS_AS(top_singular_values(gen.matrix(4, 3), 4), DomainError);
}

TEST_CASE("iterative and dense paths agree") {
  Gen gen(7);
  for (Index rows : {320, 400}) {
    const Index cols = 350;
    const Index r = 6;
    Eigen::MatrixXd x = gen.matrix(rows, r) * gen.matrix(r, cols) * 3.0 + gen.matrix(rows, cols);
    TruncatedSVD it;
    REQUIRE(detail::svd_top_r_iterative(x, r, 300, it));
    const TruncatedSVD dense = detail::svd_top_r_dense(x, r);
    check_svd_invariants(it, r);
    CHECK(max_abs(it.S - dense.S) <= 1e-9 * dense.S(0));
    CHECK(max_abs(it.U - dense.U) <= 1e-8);
    CHECK(max_abs(it.V - dense.V) <= 1e-8);
    const TruncatedSVD chosen = svd_top_r(x, r);
    CHECK(subspace_distance(chosen.U, dense.U) <= 1e-8);
  }
}

TEST_CASE("svd input checks") {
  CHECK_THROWS_AS(svd_top_r(Eigen::MatrixXd::Ones(3, 2), 3), DomainError);
  CHECK_THROWS_AS(svd_top_r(Eigen::MatrixXd::Ones(3, 2), 0), DomainError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(svd_top_r(bad, 1), DataError);
}

TEST_CASE("svd is deterministic and invariant to right rotations (property)") {
  Gen gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = gen.integer(4, 20), k = gen.integer(4, 15);
    const Index r = gen.integer(1, std::min<Index>(5, std::min(m, k)));
    const Eigen::MatrixXd x = gen.matrix(m, k);
    const TruncatedSVD a = svd_top_r(x, r);
    const TruncatedSVD b = svd_top_r(x, r);
    CHECK(a.U == b.U);
    CHECK(a.S == b.S);
    const Eigen::MatrixXd q = gen.orthonormal(k, k);
    CHECK(subspace_distance(a.U, svd_top_r(x * q, r).U) <= 1e-8);
  }
}

TEST_CASE("project_rows") {
  Gen gen(21);
  const Eigen::MatrixXd x = gen.matrix(6, 4);
  SUBCASE("full basis is the identity") {
    CHECK(max_abs(project_rows(Projector(Eigen::MatrixXd::Identity(6, 6)), x) - x) <= 1e-14);
  }
  SUBCASE("columns inside the span are fixed") {
    const Eigen::MatrixXd q = gen.orthonormal(6, 2);
    const Eigen::MatrixXd y = q * gen.matrix(2, 4);
    CHECK(max_abs(project_rows(Projector(q), y) - y) <= 1e-10 * y.norm());
  }
  SUBCASE("explicit projector oracle") {
    const Eigen::MatrixXd q = gen.orthonormal(6, 2);
    CHECK(max_abs(project_rows(Projector(q), x) - projector(q) * x) <= 1e-12);
  }
  SUBCASE("idempotent and norm nonincreasing (property)") {
    for (int trial = 0; trial < 30; ++trial) {
      const Eigen::MatrixXd q = gen.orthonormal(6, gen.integer(1, 5));
      const Eigen::MatrixXd y = gen.matrix(6, gen.integer(1, 7));
      const Projector p(q);
      const Eigen::MatrixXd once = project_rows(p, y);
      CHECK((project_rows(p, once) - once).norm() <= 1e-10 * (1.0 + once.norm()));
      CHECK(once.norm() <= y.norm() + 1e-12);
    }
  }
  CHECK_THROWS_AS(project_rows(Projector(Eigen::MatrixXd::Identity(5, 2)), x), DomainError);
}

TEST_CASE("ls_transform") {
  Gen gen(33);
  SUBCASE("A = B gives the identity") {
    const Eigen::MatrixXd b = gen.matrix(10, 3);
    CHECK(max_abs(ls_transform(b, b) - Eigen::MatrixXd::Identity(3, 3)) <= 1e-12);
  }
  SUBCASE("exact solution for orthonormal B") {
    const Eigen::MatrixXd b = gen.orthonormal(10, 3);
    const Eigen::MatrixXd r = gen.matrix(3, 3);
    CHECK(max_abs(ls_transform(b, b * r) - r) <= 1e-10);
  }
  SUBCASE("local optimality probe") {
    const Eigen::MatrixXd a = gen.matrix(10, 3), b = gen.matrix(10, 3);
    const Eigen::MatrixXd w = ls_transform(b, a);
    const double best = (b * w - a).norm();
    for (int k = 0; k < 100; ++k) {
      const Eigen::MatrixXd w2 = w + gen.uniform(1e-6, 1e-1) * gen.matrix(3, 3);
      CHECK(best <= (b * w2 - a).norm() + 1e-9);
    }
  }
  SUBCASE("residual orthogonal to span(B) (property)") {
    for (int trial = 0; trial < 50; ++trial) {
      const Index n = gen.integer(4, 20), r = gen.integer(1, std::min<Index>(5, n));
      const Eigen::MatrixXd a = gen.matrix(n, r), b = gen.matrix(n, r);
      const Eigen::MatrixXd w = ls_transform(b, a);
      CHECK(max_abs(b.transpose() * (b * w - a)) <= 1e-8 * a.norm());
    }
  }
  SUBCASE("rank-deficient B") {
    Eigen::MatrixXd b = gen.matrix(6, 2);
    b.col(1) = b.col(0);
    const Eigen::MatrixXd a = gen.matrix(6, 2);
    const Eigen::MatrixXd w = ls_transform(b, a);
    CHECK(w.allFinite());
    CHECK(max_abs(b.transpose() * (b * w - a)) <= 1e-8 * a.norm());
    CHECK_THROWS_AS(ls_transform(b, a, false), ConditioningError);
  }
}

TEST_CASE("orthonormal_basis") {
  Gen gen(44);
  SUBCASE("orthonormal input keeps its span") {
    const Eigen::MatrixXd q = gen.orthonormal(8, 3);
    CHECK((projector(orthonormal_basis(q)) - projector(q)).norm() <= 1e-10);
  }
  SUBCASE("badly scaled columns") {
    const Eigen::MatrixXd q = gen.orthonormal(8, 2);
    const Eigen::MatrixXd x = q * Eigen::Vector2d(5.0, 1e-3).asDiagonal();
    CHECK((projector(orthonormal_basis(x)) - projector(q)).norm() <= 1e-10);
  }
  SUBCASE("normal-equations oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd x = gen.matrix(12, 4);
      const Eigen::MatrixXd u = orthonormal_basis(x);
      CHECK(max_abs(u.transpose() * u - Eigen::MatrixXd::Identity(4, 4)) <= 1e-10);
      CHECK(max_abs(projector(u) - appca::testing::span_projector(x)) <= 1e-9);
    }
  }
  SUBCASE("rank deficiency is reported") {
    Eigen::MatrixXd x = gen.matrix(6, 3);
    x.col(2) = x.col(0) + x.col(1);
    CHECK_THROWS_AS(orthonormal_basis(x), ConditioningError);
  }
}
