#pragma once

#include <functional>
#include <vector>

#include "bp/linalg.hpp"

namespace bp {

enum class AngleMethod { ALT_PROJ, DR_FEAS };

// Estimate of the first principal angle from the decay of projected iterates.
// The fitted slope s of log ||x^k|| gives cos_theta1 = e^{s/2} (ALT_PROJ,
// two projections per step) or e^s (DR_FEAS, one reflection step).
struct AngleEstimate {
  double cos_theta1 = 1.0;
  AngleMethod method = AngleMethod::ALT_PROJ;
  long fit_window = 0;
  double residual = 0.0;        // RMS of the fit residuals
  std::vector<double> norms;    // recorded ||x^k||, k = 0, 1, ...
};

using LinearMap = std::function<Vector(const Vector&)>;

// Matrix-free estimation of theta_1 between N(A) and N(B) given the two
// orthogonal projectors. Requires N(A) cap N(B) = {0}; a plateau in the norms
// raises InvalidInput("subspaces intersect nontrivially").
AngleEstimate estimate_angle(const LinearMap& proj_null_A, const LinearMap& proj_null_B,
                             const Vector& x0, long iters = 2000,
                             AngleMethod method = AngleMethod::ALT_PROJ);

// Dense-path projector onto N(A): I - pinv(A) A applied matrix-free.
LinearMap make_nullspace_projector(const Matrix& A);

}  // namespace bp
