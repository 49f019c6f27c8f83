#pragma once

#include <optional>
#include <vector>

#include "bp/linalg.hpp"

namespace bp {

// One basis-pursuit instance: min ||x||_1 subject to Ax = b, with A full row
// rank (m <= n). x_star, when present, is the known unique minimizer.
struct ProblemInstance {
  Matrix A;
  Vector b;
  std::optional<Vector> x_star;

  Eigen::Index m() const { return A.rows(); }
  Eigen::Index n() const { return A.cols(); }

  // Checks shape, finiteness, full row rank, and A x_star = b when known.
  void validate() const;
};

// The zero pattern of x_star: the selector B picks out the r coordinates where
// x_star vanishes, so N(B) is the support subspace.
struct SupportInfo {
  std::vector<Eigen::Index> support;       // indices with x_star != 0, ascending
  std::vector<Eigen::Index> zero_indices;  // complement, ascending
  Matrix B;                                // r x n rows e_j^T for j in zero_indices
  Eigen::Index r = 0;
  Vector sign_pattern;                     // entries in {-1, 0, +1}

  Eigen::Index n() const { return B.cols(); }

  static SupportInfo from_vector(const Vector& x_star, double zero_tol = 0.0);
  static SupportInfo from_support(Eigen::Index n,
                                  const std::vector<Eigen::Index>& support,
                                  const Vector& signs_on_support);
};

}  // namespace bp
