#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bp/operators.hpp"
#include "bp/problem.hpp"

namespace bp {

// Orthonormal bases of the four subspaces attached to (A, B) together with
// the principal angles between N(A) and N(B).
struct SubspaceGeometry {
  SubspaceBasis A0;  // N(A)
  SubspaceBasis A1;  // R(A^T)
  SubspaceBasis B0;  // N(B)
  SubspaceBasis B1;  // R(B^T)
  PrincipalAngles theta;
  Eigen::Index dim_intersection_ranges = 0;  // dim R(A^T) cap R(B^T) = m + r - n

  double theta1() const { return theta.first(); }
  double cos_theta1() const { return theta.cos_first(); }
};

SubspaceGeometry compute_geometry(const Matrix& A, const SupportInfo& S);

// Local linearization of the splitting around an interior fixed point:
//   T        = (I - B+B)(I - A+A) + B+B A+A
//   T(c)     = c T + (1 - c) A+A
//   T(c,l)   = (1 - l) I + l [c T + (1 - c) B+B]
Matrix build_T(const SupportInfo& S, const AffineConstraint& K);
Matrix build_T_c(const SupportInfo& S, const AffineConstraint& K, double c);
Matrix build_T_c_lambda(const SupportInfo& S, const AffineConstraint& K, double c,
                        double lambda);

// Orthonormal basis of R(A^T) cap R(B^T), the eigenvalue-1 eigenspace of T.
SubspaceBasis range_intersection_basis(const Matrix& A, const Matrix& B);

// Largest eigenvalue modulus of M restricted to the invariant complement of
// `excluded` (compression onto an orthonormal basis of the complement).
double spectral_radius_excluding(const Matrix& M, const SubspaceBasis& excluded);

// Closed-form asymptotic rates as functions of one principal angle.
// rho_closed_form is the lambda = 1 case. theta must lie in (0, pi/2); the
// parameter-tuning helpers below additionally require theta <= pi/4.
double rho_closed_form(double theta, double c);
double rho_gdr_closed_form(double theta, double c, double lambda);

struct OptimalParams {
  double c_star;   // argmin_c of rho(theta, c) = 1/(cos+sin)^2
  double c_sharp;  // solves rho(theta, c) = cos(theta)
  double c_bar;    // knee of lambda*: 1/(2 - cos 2theta)
  double c_tilde;  // below this, PR beats DR: 1/(2 - cos^2 theta)
};
OptimalParams optimal_parameters(double theta);
double lambda_star(double theta, double c);
double rho_at_lambda_star(double theta, double c);

enum class RateSource { CLOSED_FORM, SPECTRAL };

struct RatePrediction {
  double rho = 1.0;
  double theta1 = 0.0;
  double c = 1.0;
  double lambda = 1.0;
  double c_star = 0.0, c_sharp = 0.0, c_bar = 0.0;
  double lambda_star_at_c = 1.0;
  RateSource source = RateSource::CLOSED_FORM;
};

RatePrediction predict_rate(double theta1, double c, double lambda);
RatePrediction predict_rate_spectral(const SupportInfo& S, const AffineConstraint& K,
                                     double c, double lambda);

enum class FixedPointKind { INTERIOR, BOUNDARY };

// A converged fixed point y* with its certificate eta = (x* - y*)/gamma and
// the interior/boundary classification of the reflected point.
struct FixedPointInfo {
  Vector y_star;
  Vector eta;
  FixedPointKind kind = FixedPointKind::INTERIOR;
  std::vector<Eigen::Index> face_indices;  // empty for interior
  std::optional<double> theta_bar1;        // boundary rate angle when available
};

// Which side of the splitting carries the quadratic term; fixes the certificate
// structure checked for regularized fixed points. Irrelevant when alpha = inf.
enum class ProxPlacement { THRESHOLD_SIDE, CONSTRAINT_SIDE };

FixedPointInfo compute_fixed_point_info(
    const ProblemInstance& P, const SupportInfo& S, double gamma, const Vector& y_star,
    double alpha = std::numeric_limits<double>::infinity(),
    ProxPlacement placement = ProxPlacement::THRESHOLD_SIDE);

// First principal angle between N(A) and N(B-bar), where B-bar drops the
// selector rows listed in face_indices. Throws Unconverged("nongeneric face")
// when the two nullspaces intersect nontrivially.
double boundary_rate(const SupportInfo& S, const AffineConstraint& K,
                     const std::vector<Eigen::Index>& face_indices);

// Brute-force restricted-isometry constant delta_s over all (n choose s)
// supports, and the induced angle bound sqrt(1 - d(1 - delta_s)) clamped to
// [0, 1], with d = 1/lambda_max(A A^T). Columns must be unit norm.
std::pair<double, double> rip_bound(const Matrix& A_normalized, Eigen::Index s);

// Test geometry with exactly known principal angles: B stays a coordinate
// selector while N(A) is laid out pairwise against N(B) at the given angles,
// plus optional extra nullspace directions and R(A^T) cap R(B^T) dimensions.
// Columns are randomly permuted and A is mixed by a random invertible matrix.
struct SyntheticGeometry {
  Matrix A;
  Matrix B;
  Vector x_star;
  Vector b;
  std::vector<double> angles;
  SupportInfo support;
};

SyntheticGeometry make_synthetic_geometry(const std::vector<double>& angles,
                                          Eigen::Index extra_nullspace_dims,
                                          Eigen::Index intersection_dims,
                                          std::uint64_t seed);

}  // namespace bp
