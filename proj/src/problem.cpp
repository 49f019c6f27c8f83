#include "bp/problem.hpp"

#include <algorithm>
#include <cmath>

#include "bp/errors.hpp"

namespace bp {

void ProblemInstance::validate() const {
  if (A.rows() == 0 || A.cols() == 0) throw InvalidInput("instance: empty matrix");
  if (A.rows() > A.cols()) throw InvalidInput("instance: more rows than columns");
  if (!A.allFinite() || !b.allFinite()) throw InvalidInput("instance: non-finite entries");
  if (b.size() != A.rows()) throw InvalidInput("instance: rhs length mismatch");
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= default_rank_tol(A) * sv(0))
    throw InvalidInput("instance: matrix is not full row rank");
  if (x_star) {
    if (x_star->size() != A.cols()) throw InvalidInput("instance: x_star length mismatch");
    if ((A * (*x_star) - b).norm() > 1e-10 * (1.0 + b.norm()))
      throw InvalidInput("instance: x_star does not satisfy Ax = b");
  }
}

SupportInfo SupportInfo::from_vector(const Vector& x_star, double zero_tol) {
  SupportInfo info;
  const Eigen::Index n = x_star.size();
  info.sign_pattern = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(x_star(j)) > zero_tol) {
      info.support.push_back(j);
      info.sign_pattern(j) = x_star(j) > 0.0 ? 1.0 : -1.0;
    } else {
      info.zero_indices.push_back(j);
    }
  }
  info.r = static_cast<Eigen::Index>(info.zero_indices.size());
  info.B = Matrix::Zero(info.r, n);
  for (Eigen::Index i = 0; i < info.r; ++i) info.B(i, info.zero_indices[i]) = 1.0;
  return info;
}

SupportInfo SupportInfo::from_support(Eigen::Index n,
                                      const std::vector<Eigen::Index>& support,
                                      const Vector& signs_on_support) {
  if (static_cast<Eigen::Index>(support.size()) != signs_on_support.size())
    throw InvalidInput("SupportInfo: support/sign length mismatch");
  Vector x = Vector::Zero(n);
  for (size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= n) throw InvalidInput("SupportInfo: index out of range");
    const double s = signs_on_support(static_cast<Eigen::Index>(i));
    x(support[i]) = s >= 0.0 ? 1.0 : -1.0;
  }
  return from_vector(x);
}

}  // namespace bp
