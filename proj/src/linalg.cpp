#include "bp/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bp/errors.hpp"

namespace bp {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

double default_rank_tol(const Matrix& M) {
  return static_cast<double>(std::max(M.rows(), M.cols())) * kEps;
}

Matrix pseudoinverse(const Matrix& M, double tol) {
  if (!M.allFinite()) throw InvalidInput("pseudoinverse: matrix has non-finite entries");
  if (tol < 0.0) tol = default_rank_tol(M);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? tol * sv(0) : 0.0;
  Vector inv_sv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

// Right singular vectors of M split at the rank cutoff: the leading block
// spans R(M^T), the trailing block spans N(M).
std::pair<Matrix, Eigen::Index> full_v_and_rank(const Matrix& M, double tol) {
  if (!M.allFinite()) throw InvalidInput("subspace basis: matrix has non-finite entries");
  if (tol < 0.0) tol = default_rank_tol(M);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? tol * sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return {svd.matrixV(), rank};
}

}  // namespace

SubspaceBasis nullspace_basis(const Matrix& M, double tol) {
  auto [v, rank] = full_v_and_rank(M, tol);
  SubspaceBasis basis;
  basis.ambient_dim = M.cols();
  basis.vectors = v.rightCols(M.cols() - rank);
  return basis;
}

SubspaceBasis range_basis(const Matrix& M, double tol) {
  auto [v, rank] = full_v_and_rank(M, tol);
  SubspaceBasis basis;
  basis.ambient_dim = M.cols();
  basis.vectors = v.leftCols(rank);
  return basis;
}

PrincipalAngles principal_angles(const SubspaceBasis& U, const SubspaceBasis& V) {
  if (U.ambient_dim != V.ambient_dim)
    throw InvalidInput("principal_angles: ambient dimensions differ");
  PrincipalAngles out;
  if (U.empty() || V.empty()) return out;
  const bool swap = U.dim() > V.dim();
  const Matrix& small = swap ? V.vectors : U.vectors;
  const Matrix& big = swap ? U.vectors : V.vectors;
  Eigen::JacobiSVD<Matrix> svd(small.transpose() * big);
  const auto& sv = svd.singularValues();
  out.cosines.reserve(sv.size());
  out.angles.reserve(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double c = std::clamp(sv(i), 0.0, 1.0);
    out.cosines.push_back(c);
    out.angles.push_back(std::acos(c));
  }
  return out;
}

double smallest_eig_inverse_gram(const Matrix& A) {
  const Matrix gram = A * A.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalFailure("smallest_eig_inverse_gram: eigensolver failed");
  const auto& ev = eig.eigenvalues();  // ascending
  const double lam_max = ev(ev.size() - 1);
  const double lam_min = ev(0);
  if (lam_max <= 0.0 || lam_min <= default_rank_tol(A) * lam_max)
    throw InvalidInput("gram matrix singular");
  return 1.0 / lam_max;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& M) {
  if (M.rows() != M.cols()) throw InvalidInput("eigenvalues: matrix not square");
  if (M.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> eig(M, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) throw NumericalFailure("eigenvalues: solver failed");
  std::vector<std::complex<double>> out(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i) out[i] = eig.eigenvalues()(i);
  return out;
}

double spectral_radius(const Matrix& M) {
  double r = 0.0;
  for (const auto& lam : eigenvalues(M)) r = std::max(r, std::abs(lam));
  return r;
}

}  // namespace bp
