#pragma once

#include <limits>

#include "bp/linalg.hpp"

namespace bp {

// The affine set { x : Ax = b } with the pseudoinverse of A cached so that
// projections and reflections cost two matrix-vector products.
class AffineConstraint {
 public:
  AffineConstraint(Matrix A, Vector b);

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const Matrix& pinv_A() const { return pinv_; }
  Eigen::Index rows() const { return A_.rows(); }
  Eigen::Index cols() const { return A_.cols(); }

 private:
  Matrix A_;
  Vector b_;
  Matrix pinv_;
};

// Parameters shared by the proximal operators: soft-threshold amount gamma > 0
// and quadratic weight alpha in (0, +inf]. alpha = +inf (the default) selects
// the unregularized path, for which shrink() is exactly 1.
struct ProxParams {
  double gamma = 1.0;
  double alpha = std::numeric_limits<double>::infinity();

  bool regularized() const { return std::isfinite(alpha); }
  // c = alpha / (alpha + gamma), the extra shrink factor of the l1 + l2 prox.
  double shrink() const { return regularized() ? alpha / (alpha + gamma) : 1.0; }
  void validate() const;
};

// Componentwise shrinkage sgn(x_i) * max(|x_i| - gamma, 0).
Vector soft_threshold(const Vector& x, double gamma);

// P(x) = x + pinv(A) (b - Ax), the orthogonal projection onto Ax = b.
Vector project_affine(const Vector& x, const AffineConstraint& K);

// R(x) = 2 P(x) - x, the reflection about Ax = b.
Vector reflect_affine(const Vector& x, const AffineConstraint& K);

// Prox of gamma ||.||_1 + (gamma / 2 alpha) ||.||^2: c * soft_threshold(x, gamma).
Vector prox_l1_l2(const Vector& x, const ProxParams& p);

// Prox of the affine indicator plus (gamma / 2 alpha) ||.||^2:
// c x + pinv(A) (b - c A x). Output is feasible.
Vector prox_affine_l2(const Vector& x, const ProxParams& p, const AffineConstraint& K);

}  // namespace bp
