#include "bp/rate_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bp/errors.hpp"

namespace bp {

namespace {
constexpr double kPi = 3.14159265358979323846;

// The per-angle closed forms are the eigenvalue magnitudes of one 2x2 block
// and stay valid on all of (0, pi/2); only the parameter-selection theory
// (optimal_parameters, lambda_star) requires theta <= pi/4.
void check_theta_c(double theta, double c) {
  if (!(theta > 0.0 && theta < kPi / 2.0))
    throw InvalidInput("rate: theta outside (0, pi/2)");
  if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("rate: c outside (0, 1]");
}
}  // namespace

SubspaceGeometry compute_geometry(const Matrix& A, const SupportInfo& S) {
  if (A.cols() != S.n()) throw InvalidInput("compute_geometry: dimension mismatch");
  SubspaceGeometry g;
  g.A0 = nullspace_basis(A);
  g.A1 = range_basis(A);
  g.B0 = nullspace_basis(S.B);
  g.B1 = range_basis(S.B);
  g.theta = principal_angles(g.A0, g.B0);
  g.dim_intersection_ranges = A.rows() + S.r - A.cols();
  return g;
}

namespace {

Matrix selector_projector(const SupportInfo& S) {
  // B+ B for a row-selector B is the diagonal 0/1 projector onto R(B^T).
  Matrix P = Matrix::Zero(S.n(), S.n());
  for (Eigen::Index j : S.zero_indices) P(j, j) = 1.0;
  return P;
}

}  // namespace

Matrix build_T(const SupportInfo& S, const AffineConstraint& K) {
  const Eigen::Index n = K.cols();
  if (S.n() != n) throw InvalidInput("build_T: dimension mismatch");
  const Matrix PA = K.pinv_A() * K.A();  // A+A, projector onto R(A^T)
  const Matrix PB = selector_projector(S);
  const Matrix I = Matrix::Identity(n, n);
  return (I - PB) * (I - PA) + PB * PA;
}

Matrix build_T_c(const SupportInfo& S, const AffineConstraint& K, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("build_T_c: c outside (0, 1]");
  const Matrix PA = K.pinv_A() * K.A();
  return c * build_T(S, K) + (1.0 - c) * PA;
}

Matrix build_T_c_lambda(const SupportInfo& S, const AffineConstraint& K, double c,
                        double lambda) {
  if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("build_T_c_lambda: c outside (0, 1]");
  if (!(lambda > 0.0 && lambda <= 2.0))
    throw InvalidInput("build_T_c_lambda: lambda outside (0, 2]");
  const Eigen::Index n = K.cols();
  const Matrix PB = selector_projector(S);
  const Matrix I = Matrix::Identity(n, n);
  return (1.0 - lambda) * I + lambda * (c * build_T(S, K) + (1.0 - c) * PB);
}

SubspaceBasis range_intersection_basis(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols()) throw InvalidInput("range_intersection_basis: dimension mismatch");
  const SubspaceBasis RA = range_basis(A);
  const SubspaceBasis RB = range_basis(B);
  SubspaceBasis out;
  out.ambient_dim = A.cols();
  if (RA.empty() || RB.empty()) {
    out.vectors = Matrix::Zero(A.cols(), 0);
    return out;
  }
  // Intersection directions are the principal pairs at angle zero.
  Eigen::JacobiSVD<Matrix> svd(RA.vectors.transpose() * RB.vectors, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) >= 1.0 - 1e-10) ++count;
  out.vectors = RA.vectors * svd.matrixU().leftCols(count);
  return out;
}

double spectral_radius_excluding(const Matrix& M, const SubspaceBasis& excluded) {
  if (M.rows() != M.cols()) throw InvalidInput("spectral_radius_excluding: not square");
  if (excluded.dim() == 0) return spectral_radius(M);
  if (excluded.ambient_dim != M.rows())
    throw InvalidInput("spectral_radius_excluding: dimension mismatch");
  const SubspaceBasis complement = nullspace_basis(excluded.vectors.transpose());
  if (complement.dim() == 0) return 0.0;
  const Matrix compressed =
      complement.vectors.transpose() * M * complement.vectors;
  return spectral_radius(compressed);
}

double rho_closed_form(double theta, double c) {
  check_theta_c(theta, c);
  const double cos2 = std::cos(2.0 * theta);
  const double disc = cos2 * cos2 * c * c - 2.0 * c + 1.0;
  if (disc < 0.0) return std::sqrt(c) * std::cos(theta);
  return 0.5 * (c * cos2 + 1.0 + std::sqrt(disc));
}

double rho_gdr_closed_form(double theta, double c, double lambda) {
  check_theta_c(theta, c);
  if (!(lambda > 0.0 && lambda <= 2.0)) throw InvalidInput("rate: lambda outside (0, 2]");
  const double cos2 = std::cos(2.0 * theta);
  const double sin_sq = std::sin(theta) * std::sin(theta);
  const double disc = cos2 * cos2 * c * c - 2.0 * c + 1.0;
  if (disc < 0.0) {
    const double product = c * sin_sq * lambda * lambda - (1.0 - c * cos2) * lambda + 1.0;
    return std::sqrt(std::max(product, 0.0));
  }
  return 0.5 * (lambda * c * cos2 - lambda + 2.0 + lambda * std::sqrt(disc));
}

OptimalParams optimal_parameters(double theta) {
  if (!(theta > 0.0 && theta <= kPi / 4.0))
    throw InvalidInput("optimal_parameters: theta outside (0, pi/4]");
  const double cs = std::cos(theta), sn = std::sin(theta);
  OptimalParams p;
  p.c_star = 1.0 / ((cs + sn) * (cs + sn));
  p.c_sharp = 1.0 / (1.0 + 2.0 * cs);
  p.c_bar = 1.0 / (2.0 - std::cos(2.0 * theta));
  p.c_tilde = 1.0 / (2.0 - cs * cs);
  return p;
}

double lambda_star(double theta, double c) {
  check_theta_c(theta, c);
  if (theta > kPi / 4.0) throw InvalidInput("lambda_star: theta outside (0, pi/4]");
  const double cos2 = std::cos(2.0 * theta);
  const double c_bar = 1.0 / (2.0 - cos2);
  if (c <= c_bar) return 2.0;
  return (1.0 / c - cos2) / (1.0 - cos2);
}

double rho_at_lambda_star(double theta, double c) {
  check_theta_c(theta, c);
  if (theta > kPi / 4.0) throw InvalidInput("rho_at_lambda_star: theta outside (0, pi/4]");
  const double cos2 = std::cos(2.0 * theta);
  const OptimalParams p = optimal_parameters(theta);
  if (c <= p.c_star) {
    const double disc = cos2 * cos2 * c * c - 2.0 * c + 1.0;
    return c * cos2 + std::sqrt(std::max(disc, 0.0));
  }
  if (c <= p.c_bar) return std::sqrt(2.0 * c - 1.0);
  return std::sqrt(std::max(2.0 * c - 1.0 - c * c * cos2 * cos2, 0.0)) /
         (2.0 * std::sin(theta) * std::sqrt(c));
}

RatePrediction predict_rate(double theta1, double c, double lambda) {
  RatePrediction r;
  r.theta1 = theta1;
  r.c = c;
  r.lambda = lambda;
  r.source = RateSource::CLOSED_FORM;
  r.rho = rho_gdr_closed_form(theta1, c, lambda);
  if (theta1 <= kPi / 4.0) {
    const OptimalParams p = optimal_parameters(theta1);
    r.c_star = p.c_star;
    r.c_sharp = p.c_sharp;
    r.c_bar = p.c_bar;
    r.lambda_star_at_c = lambda_star(theta1, c);
  }
  return r;
}

RatePrediction predict_rate_spectral(const SupportInfo& S, const AffineConstraint& K,
                                     double c, double lambda) {
  const SubspaceGeometry g = compute_geometry(K.A(), S);
  RatePrediction r;
  r.theta1 = g.theta1();
  r.c = c;
  r.lambda = lambda;
  r.source = RateSource::SPECTRAL;
  const Matrix T = build_T_c_lambda(S, K, c, lambda);
  const SubspaceBasis fixed = range_intersection_basis(K.A(), S.B);
  r.rho = spectral_radius_excluding(T, fixed);
  if (r.theta1 > 0.0 && r.theta1 <= kPi / 4.0) {
    const OptimalParams p = optimal_parameters(r.theta1);
    r.c_star = p.c_star;
    r.c_sharp = p.c_sharp;
    r.c_bar = p.c_bar;
    r.lambda_star_at_c = lambda_star(r.theta1, c);
  }
  return r;
}

FixedPointInfo compute_fixed_point_info(const ProblemInstance& P, const SupportInfo& S,
                                        double gamma, const Vector& y_star, double alpha,
                                        ProxPlacement placement) {
  if (!(gamma > 0.0)) throw InvalidInput("compute_fixed_point_info: gamma must be positive");
  if (!P.x_star) throw InvalidInput("compute_fixed_point_info: x_star required");
  if (y_star.size() != P.n()) throw InvalidInput("compute_fixed_point_info: y_star size");
  const Vector& xs = *P.x_star;
  const AffineConstraint K(P.A, P.b);
  const double scale = 1.0 + xs.norm();

  FixedPointInfo info;
  info.y_star = y_star;
  info.eta = (xs - y_star) / gamma;

  // For the constraint-side placement x* is the regularized projection of y*,
  // not the plain one; both reduce to P(y*) = x* when alpha is infinite.
  ProxParams prox;
  prox.gamma = gamma;
  prox.alpha = alpha;
  const Vector x_from_y = placement == ProxPlacement::CONSTRAINT_SIDE
                              ? prox_affine_l2(y_star, prox, K)
                              : project_affine(y_star, K);
  if ((x_from_y - xs).norm() > 1e-6 * scale) throw Unconverged("not a fixed point");

  // The certificate must come from R(A^T): directly for the threshold-side
  // splitting, shifted by x*/alpha for the constraint-side one.
  Vector range_part = info.eta;
  if (placement == ProxPlacement::CONSTRAINT_SIDE && std::isfinite(alpha))
    range_part += xs / alpha;
  const Matrix PA = K.pinv_A() * K.A();
  if ((range_part - PA * range_part).norm() > 1e-6 * (1.0 + range_part.norm()))
    throw Unconverged("not a fixed point");

  // On the support the certificate is pinned to the sign pattern (plus the
  // x*/alpha tilt for the threshold-side regularization).
  for (Eigen::Index j : S.support) {
    double target = S.sign_pattern(j);
    if (placement == ProxPlacement::THRESHOLD_SIDE && std::isfinite(alpha))
      target += xs(j) / alpha;
    if (std::abs(info.eta(j) - target) > 1e-5 * (1.0 + std::abs(target)))
      throw Unconverged("not a fixed point");
  }

  // Off the support, classify by how close the reflection sits to the
  // soft-threshold corner |R(y*)_j| = gamma.
  const double tau_face = 1e-6;
  const Vector reflected = 2.0 * x_from_y - y_star;
  for (Eigen::Index j : S.zero_indices) {
    const double mag = std::abs(reflected(j));
    if (mag > gamma * (1.0 + 1e-4)) throw Unconverged("not a fixed point");
    if (mag >= gamma * (1.0 - tau_face)) info.face_indices.push_back(j);
  }
  info.kind = info.face_indices.empty() ? FixedPointKind::INTERIOR : FixedPointKind::BOUNDARY;
  if (info.kind == FixedPointKind::BOUNDARY) {
    try {
      info.theta_bar1 = boundary_rate(S, K, info.face_indices);
    } catch (const Unconverged&) {
      info.theta_bar1 = std::nullopt;  // nongeneric face, no rate available
    }
  }
  return info;
}

double boundary_rate(const SupportInfo& S, const AffineConstraint& K,
                     const std::vector<Eigen::Index>& face_indices) {
  for (Eigen::Index j : face_indices) {
    if (std::find(S.zero_indices.begin(), S.zero_indices.end(), j) == S.zero_indices.end())
      throw InvalidInput("boundary_rate: face index not in the zero set");
  }
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j : S.zero_indices) {
    if (std::find(face_indices.begin(), face_indices.end(), j) == face_indices.end())
      kept.push_back(j);
  }
  const Eigen::Index n = S.n();
  if (kept.empty()) throw Unconverged("nongeneric face");
  Matrix B_bar = Matrix::Zero(static_cast<Eigen::Index>(kept.size()), n);
  for (size_t i = 0; i < kept.size(); ++i) B_bar(static_cast<Eigen::Index>(i), kept[i]) = 1.0;

  const SubspaceBasis NA = nullspace_basis(K.A());
  const SubspaceBasis NB = nullspace_basis(B_bar);
  const PrincipalAngles angles = principal_angles(NA, NB);
  if (angles.cosines.empty()) return 0.0;
  if (angles.cos_first() >= 1.0 - 1e-10) throw Unconverged("nongeneric face");
  return angles.first();
}

std::pair<double, double> rip_bound(const Matrix& A_normalized, Eigen::Index s) {
  const Eigen::Index n = A_normalized.cols();
  if (s < 1 || s > n) throw InvalidInput("rip_bound: sparsity out of range");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(A_normalized.col(j).norm() - 1.0) > 1e-8)
      throw InvalidInput("rip_bound: columns must be unit norm");
  }
  // Count supports up front so oversized enumerations fail fast.
  double combos = 1.0;
  for (Eigen::Index i = 0; i < s; ++i)
    combos *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  if (combos > 1e6) throw InvalidInput("enumeration too large");

  double delta = 0.0;
  std::vector<Eigen::Index> idx(s);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    Matrix sub(A_normalized.rows(), s);
    for (Eigen::Index i = 0; i < s; ++i) sub.col(i) = A_normalized.col(idx[i]);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub.transpose() * sub);
    const auto& ev = eig.eigenvalues();
    delta = std::max({delta, ev(ev.size() - 1) - 1.0, 1.0 - ev(0)});
    // next s-combination of {0, ..., n-1}
    Eigen::Index i = s - 1;
    while (i >= 0 && idx[i] == n - s + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (Eigen::Index j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }

  const double d = smallest_eig_inverse_gram(A_normalized);
  const double inside = 1.0 - d * (1.0 - delta);
  const double bound = std::sqrt(std::clamp(inside, 0.0, 1.0));
  return {delta, bound};
}

SyntheticGeometry make_synthetic_geometry(const std::vector<double>& angles,
                                          Eigen::Index extra_nullspace_dims,
                                          Eigen::Index intersection_dims,
                                          std::uint64_t seed) {
  const Eigen::Index p = static_cast<Eigen::Index>(angles.size());
  if (p == 0) throw InvalidInput("make_synthetic_geometry: need at least one angle");
  for (double th : angles) {
    if (!(th > 0.0 && th < kPi / 2.0))
      throw InvalidInput("make_synthetic_geometry: angles must lie in (0, pi/2)");
  }
  const Eigen::Index s = extra_nullspace_dims, t = intersection_dims;
  if (s < 0 || t < 0) throw InvalidInput("make_synthetic_geometry: negative dimensions");
  const Eigen::Index n = 2 * p + s + t;
  const Eigen::Index m = p + t;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  // Pair i occupies coordinates perm[2i] (support side, in N(B)) and
  // perm[2i+1] (zero side). Coordinates perm[2p .. 2p+s-1] extend N(A) inside
  // the zero set; the last t coordinates span R(A^T) cap R(B^T).
  Matrix A = Matrix::Zero(m, n);
  for (Eigen::Index i = 0; i < p; ++i) {
    A(i, perm[2 * i]) = std::sin(angles[i]);
    A(i, perm[2 * i + 1]) = -std::cos(angles[i]);
  }
  for (Eigen::Index l = 0; l < t; ++l) A(p + l, perm[2 * p + s + l]) = 1.0;

  // Mix rows with a well-conditioned random matrix; leaves N(A) untouched.
  Matrix mix(m, m);
  while (true) {
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) mix(i, j) = gauss(rng);
    Eigen::JacobiSVD<Matrix> svd(mix);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 0.05 * sv(0)) break;
  }
  A = mix * A;

  SyntheticGeometry out;
  out.angles = angles;
  out.A = A;
  out.x_star = Vector::Zero(n);
  std::uniform_real_distribution<double> mag(0.1, 1.1);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < p; ++i)
    out.x_star(perm[2 * i]) = (coin(rng) ? 1.0 : -1.0) * mag(rng);
  out.b = A * out.x_star;
  out.support = SupportInfo::from_vector(out.x_star);
  out.B = out.support.B;
  return out;
}

}  // namespace bp
