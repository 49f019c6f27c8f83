#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace bp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Orthonormal basis of a linear subspace; columns of `vectors` are the basis.
// An empty basis (0 columns) is valid and keeps its ambient dimension.
struct SubspaceBasis {
  Eigen::Index ambient_dim = 0;
  Matrix vectors;  // ambient_dim x dim, orthonormal columns

  Eigen::Index dim() const { return vectors.cols(); }
  bool empty() const { return vectors.cols() == 0; }
};

// Canonical angles between two subspaces, ascending in [0, pi/2], together
// with their cosines (descending, clamped into [0, 1]).
struct PrincipalAngles {
  std::vector<double> angles;
  std::vector<double> cosines;

  double first() const { return angles.empty() ? 0.0 : angles.front(); }
  double cos_first() const { return cosines.empty() ? 1.0 : cosines.front(); }
};

// Numerical-rank cutoff: singular values <= tol * sigma_max count as zero.
// Negative tol selects the default max(rows, cols) * machine epsilon.
double default_rank_tol(const Matrix& M);

// Moore-Penrose pseudoinverse via SVD. For full row rank M this equals
// M^T (M M^T)^{-1}. The all-zero matrix maps to the all-zero pseudoinverse.
Matrix pseudoinverse(const Matrix& M, double tol = -1.0);

// Orthonormal basis of N(M) = { x : Mx = 0 }.
SubspaceBasis nullspace_basis(const Matrix& M, double tol = -1.0);

// Orthonormal basis of the row space R(M^T).
SubspaceBasis range_basis(const Matrix& M, double tol = -1.0);

// Principal angles via SVD of U^T V (Bjorck-Golub). Bases must share the
// ambient dimension; the count is min(dim U, dim V).
PrincipalAngles principal_angles(const SubspaceBasis& U, const SubspaceBasis& V);

// d = 1 / lambda_max(A A^T), the smallest eigenvalue of (A A^T)^{-1}.
// Requires full row rank; otherwise throws InvalidInput("gram matrix singular").
double smallest_eig_inverse_gram(const Matrix& A);

// All eigenvalues (with multiplicity) of a square matrix, unordered.
std::vector<std::complex<double>> eigenvalues(const Matrix& M);

// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& M);

}  // namespace bp
