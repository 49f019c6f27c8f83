#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "bp/errors.hpp"
#include "bp/operators.hpp"
#include "test_util.hpp"

using bp::Matrix;
using bp::Vector;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("soft_threshold hand values") {
  const Vector x = vec3(2.0, -0.5, 1.0);
  const Vector s = bp::soft_threshold(x, 1.0);
  CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s(1) == 0.0);
  CHECK(s(2) == 0.0);

  CHECK((bp::soft_threshold(x, 0.0) - x).cwiseAbs().maxCoeff() == 0.0);

  Vector m(1);
  m << -3.0;
  CHECK(bp::soft_threshold(m, 1.0)(0) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("soft_threshold rejects negative gamma") {
  CHECK_THROWS_AS(bp::soft_threshold(vec3(1, 2, 3), -0.5), bp::InvalidInput);
}

TEST_CASE("soft_threshold is firmly nonexpansive") {
  for (int t = 0; t < 100; ++t) {
    const Vector u = testutil::random_vector(6, 1000 + t);
    const Vector v = testutil::random_vector(6, 2000 + t);
    const Vector su = bp::soft_threshold(u, 0.7);
    const Vector sv = bp::soft_threshold(v, 0.7);
    const double lhs = (su - sv).squaredNorm();
    const double rhs = (u - v).dot(su - sv);
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("AffineConstraint validates its inputs") {
  Matrix dup(2, 3);
  dup << 1, 2, 3, 2, 4, 6;
  CHECK_THROWS_AS(bp::AffineConstraint(dup, Vector::Zero(2)), bp::InvalidInput);

  Matrix ok(1, 2);
  ok << 2, 1;
  CHECK_THROWS_AS(bp::AffineConstraint(ok, Vector::Zero(2)), bp::InvalidInput);

  Matrix tall(3, 2);
  tall << 1, 0, 0, 1, 1, 1;
  CHECK_THROWS_AS(bp::AffineConstraint(tall, Vector::Zero(3)), bp::InvalidInput);
}

TEST_CASE("project_affine hand values and feasibility") {
  Matrix A(1, 2);
  A << 1, 0;
  Vector b(1);
  b << 1;
  bp::AffineConstraint K(A, b);

  Vector x(2);
  x << 5, 7;
  const Vector p = bp::project_affine(x, K);
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p(1) == doctest::Approx(7.0).epsilon(1e-14));

  // A feasible point is a fixed point.
  Vector f(2);
  f << 1, -4;
  CHECK((bp::project_affine(f, K) - f).cwiseAbs().maxCoeff() < 1e-14);

  Matrix A2(1, 2);
  A2 << 2, 1;
  Vector b2(1);
  b2 << 2;
  bp::AffineConstraint K2(A2, b2);
  const Vector p2 = bp::project_affine(Vector::Zero(2), K2);
  CHECK(p2(0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(p2(1) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("project_affine is idempotent and feasible on random input") {
  const Matrix A = testutil::random_matrix(4, 9, 77);
  const Vector b = testutil::random_vector(4, 78);
  bp::AffineConstraint K(A, b);
  for (int t = 0; t < 20; ++t) {
    const Vector x = testutil::random_vector(9, 300 + t);
    const Vector p = bp::project_affine(x, K);
    CHECK((A * p - b).norm() <= 1e-10 * (1.0 + b.norm()));
    CHECK((bp::project_affine(p, K) - p).norm() < 1e-12);
    // Projection moves orthogonally to the constraint set: x - p lies in R(A^T).
    const Vector d = x - p;
    const Vector residual = d - A.transpose() * (A * A.transpose()).ldlt().solve(A * d);
    CHECK(residual.norm() < 1e-10);
  }
}

TEST_CASE("reflect_affine is an involution fixing the constraint set") {
  Matrix A(1, 2);
  A << 1, 0;
  Vector b(1);
  b << 1;
  bp::AffineConstraint K(A, b);

  Vector x(2);
  x << 5, 7;
  const Vector r = bp::reflect_affine(x, K);
  CHECK(r(0) == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(r(1) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK((bp::reflect_affine(r, K) - x).cwiseAbs().maxCoeff() < 1e-12);

  Vector f(2);
  f << 1, 3;
  CHECK((bp::reflect_affine(f, K) - f).cwiseAbs().maxCoeff() < 1e-14);

  const Matrix A3 = testutil::random_matrix(3, 7, 55);
  const Vector b3 = testutil::random_vector(3, 56);
  bp::AffineConstraint K3(A3, b3);
  const Vector y = testutil::random_vector(7, 57);
  CHECK((bp::reflect_affine(bp::reflect_affine(y, K3), K3) - y).norm() < 1e-10);
  CHECK((bp::project_affine(bp::reflect_affine(y, K3), K3) - bp::project_affine(y, K3)).norm() <
        1e-10);
}

TEST_CASE("ProxParams validation and shrink factor") {
  bp::ProxParams def;
  CHECK(!def.regularized());
  CHECK(def.shrink() == 1.0);
  def.validate();

  bp::ProxParams p{2.0, 6.0};
  CHECK(p.regularized());
  CHECK(p.shrink() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p.shrink() > 0.0);
  CHECK(p.shrink() <= 1.0);

  bp::ProxParams bad_gamma{0.0, kInf};
  CHECK_THROWS_AS(bad_gamma.validate(), bp::InvalidInput);
  bp::ProxParams neg_gamma{-1.0, kInf};
  CHECK_THROWS_AS(neg_gamma.validate(), bp::InvalidInput);
  bp::ProxParams bad_alpha{1.0, 0.0};
  CHECK_THROWS_AS(bad_alpha.validate(), bp::InvalidInput);
  bp::ProxParams neg_alpha{1.0, -2.0};
  CHECK_THROWS_AS(neg_alpha.validate(), bp::InvalidInput);
}

TEST_CASE("prox_l1_l2 reduces to soft_threshold at alpha = inf") {
  const Vector x = testutil::random_vector(12, 900);
  bp::ProxParams p{0.6, kInf};
  const Vector a = bp::prox_l1_l2(x, p);
  const Vector b = bp::soft_threshold(x, 0.6);
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(a(i) == b(i));
}

TEST_CASE("prox_l1_l2 hand values") {
  Vector x(1);
  x << 2.0;
  bp::ProxParams p{1.0, 1.0};  // c = 1/2
  CHECK(bp::prox_l1_l2(x, p)(0) == doctest::Approx(0.5).epsilon(1e-15));

  Vector y(1);
  y << 0.5;
  bp::ProxParams q{1.0, 7.0};
  CHECK(bp::prox_l1_l2(y, q)(0) == 0.0);
}

TEST_CASE("prox_l1_l2 matches a scalar grid-search oracle componentwise") {
  const double gammas[] = {0.3, 1.0, 2.5};
  const double alphas[] = {0.8, 5.0, kInf};
  int seed = 0;
  for (double g : gammas) {
    for (double al : alphas) {
      const Vector x = testutil::random_vector(8, 4242 + seed++) * 3.0;
      bp::ProxParams p{g, al};
      const Vector out = bp::prox_l1_l2(x, p);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double want = testutil::scalar_prox_oracle(x(i), g, al);
        // The value-based oracle resolves the argmin only to about sqrt(eps).
        CHECK(std::abs(out(i) - want) < 1e-7);
      }
    }
  }
}

TEST_CASE("prox_affine_l2 reduces to project_affine at alpha = inf") {
  const Matrix A = testutil::random_matrix(3, 7, 1234);
  const Vector b = testutil::random_vector(3, 1235);
  bp::AffineConstraint K(A, b);
  const Vector x = testutil::random_vector(7, 1236);
  bp::ProxParams p{1.0, kInf};
  const Vector a = bp::prox_affine_l2(x, p, K);
  const Vector q = bp::project_affine(x, K);
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(a(i) == q(i));
}

TEST_CASE("prox_affine_l2 hand values and feasibility") {
  Matrix A(1, 2);
  A << 1, 0;
  Vector b(1);
  b << 1;
  bp::AffineConstraint K(A, b);
  bp::ProxParams p{1.0, 1.0};  // c = 1/2

  Vector x(2);
  x << 4, 4;
  const Vector out = bp::prox_affine_l2(x, p, K);
  CHECK(out(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out(1) == doctest::Approx(2.0).epsilon(1e-14));

  // x = 0 maps to the minimum-norm solution regardless of c.
  const Vector z = bp::prox_affine_l2(Vector::Zero(2), p, K);
  CHECK(z(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z(1) == 0.0);

  const Matrix A2 = testutil::random_matrix(4, 10, 888);
  const Vector b2 = testutil::random_vector(4, 889);
  bp::AffineConstraint K2(A2, b2);
  for (int t = 0; t < 10; ++t) {
    const Vector y = testutil::random_vector(10, 500 + t);
    const Vector f = bp::prox_affine_l2(y, bp::ProxParams{0.9, 3.0}, K2);
    CHECK((A2 * f - b2).norm() <= 1e-10 * (1.0 + b2.norm()));
  }
}

TEST_CASE("Moreau identity for the l1 prox") {
  // x = prox_{gamma f}(x) + gamma * prox_{f*/gamma}(x/gamma) with f = ||.||_1,
  // whose conjugate is the indicator of the unit box, so the second prox is a
  // componentwise clip to [-1, 1].
  const double gamma = 0.8;
  for (int t = 0; t < 25; ++t) {
    const Vector x = testutil::random_vector(9, 7000 + t) * 2.0;
    const Vector s = bp::soft_threshold(x, gamma);
    Vector clip = x / gamma;
    for (Eigen::Index i = 0; i < clip.size(); ++i)
      clip(i) = std::min(1.0, std::max(-1.0, clip(i)));
    CHECK((x - (s + gamma * clip)).cwiseAbs().maxCoeff() < 1e-10);
  }
}
