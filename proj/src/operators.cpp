#include "bp/operators.hpp"

#include <cmath>

#include "bp/errors.hpp"

namespace bp {

AffineConstraint::AffineConstraint(Matrix A, Vector b)
    : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() == 0 || A_.cols() == 0)
    throw InvalidInput("AffineConstraint: empty matrix");
  if (A_.rows() > A_.cols())
    throw InvalidInput("AffineConstraint: more rows than columns");
  if (b_.size() != A_.rows())
    throw InvalidInput("AffineConstraint: rhs length does not match rows");
  pinv_ = pseudoinverse(A_);
  // Full row rank is required for P to project onto a nonempty affine set.
  if (((A_ * pinv_) - Matrix::Identity(A_.rows(), A_.rows())).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidInput("AffineConstraint: matrix is not full row rank");
}

void ProxParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw InvalidInput("ProxParams: gamma must be positive and finite");
  if (!(alpha > 0.0)) throw InvalidInput("ProxParams: alpha must be positive");
}

Vector soft_threshold(const Vector& x, double gamma) {
  if (gamma < 0.0) throw InvalidInput("soft_threshold: gamma must be nonnegative");
  return x.unaryExpr([gamma](double v) {
    const double mag = std::abs(v) - gamma;
    return mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
  });
}

Vector project_affine(const Vector& x, const AffineConstraint& K) {
  return x + K.pinv_A() * (K.b() - K.A() * x);
}

Vector reflect_affine(const Vector& x, const AffineConstraint& K) {
  return 2.0 * project_affine(x, K) - x;
}

Vector prox_l1_l2(const Vector& x, const ProxParams& p) {
  p.validate();
  return p.shrink() * soft_threshold(x, p.gamma);
}

Vector prox_affine_l2(const Vector& x, const ProxParams& p, const AffineConstraint& K) {
  p.validate();
  const double c = p.shrink();
  return c * x + K.pinv_A() * (K.b() - c * (K.A() * x));
}

}  // namespace bp
