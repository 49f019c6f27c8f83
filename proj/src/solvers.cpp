#include "bp/solvers.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <functional>
#include <limits>

#include "bp/errors.hpp"

namespace bp {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr Eigen::Index kFullTraceMaxDim = 2000;
constexpr long kStallWindow = 100;
}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::DR: return "DR";
    case Variant::DR_SWAPPED: return "DR_SWAPPED";
    case Variant::DR_REG: return "DR_REG";
    case Variant::GDR: return "GDR";
    case Variant::PR: return "PR";
    case Variant::GDR_REG: return "GDR_REG";
    case Variant::PR_REG: return "PR_REG";
    case Variant::ADMM2_LBSB: return "ADMM2_LBSB";
    case Variant::CHAMBOLLE_POCK: return "CHAMBOLLE_POCK";
  }
  throw InvalidInput("unknown variant");
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : {Variant::DR, Variant::DR_SWAPPED, Variant::DR_REG, Variant::GDR,
                    Variant::PR, Variant::GDR_REG, Variant::PR_REG, Variant::ADMM2_LBSB,
                    Variant::CHAMBOLLE_POCK}) {
    if (to_string(v) == name) return v;
  }
  throw InvalidInput("unknown variant name: " + name);
}

double SolverConfig::effective_lambda() const {
  switch (variant) {
    case Variant::PR:
    case Variant::PR_REG:
      return 2.0;
    case Variant::GDR:
    case Variant::GDR_REG:
      return lambda;
    default:
      return 1.0;
  }
}

void SolverConfig::validate() const {
  prox.validate();
  if (max_iters < 1) throw InvalidInput("SolverConfig: max_iters must be >= 1");
  if (!(stop_tol >= 0.0)) throw InvalidInput("SolverConfig: stop_tol must be >= 0");
  if (record_every < 1) throw InvalidInput("SolverConfig: record_every must be >= 1");
  // lambda = 2 without regularization is the (non-convergent) PR map; it is
  // reachable through the PR variant but rejected for GDR.
  if (variant == Variant::GDR && !(lambda > 0.0 && lambda < 2.0))
    throw InvalidInput("SolverConfig: lambda must lie in (0, 2) for GDR");
  if (variant == Variant::GDR_REG && !(lambda > 0.0 && lambda <= 2.0))
    throw InvalidInput("SolverConfig: lambda must lie in (0, 2]");
  // The _REG variants accept alpha = +inf (they then reduce to their plain
  // counterparts); only the split-Bregman form genuinely needs a finite alpha.
  if (variant == Variant::ADMM2_LBSB && !prox.regularized())
    throw InvalidInput("SolverConfig: variant requires finite alpha");
  const bool plain = variant == Variant::DR || variant == Variant::DR_SWAPPED ||
                     variant == Variant::GDR || variant == Variant::PR ||
                     variant == Variant::CHAMBOLLE_POCK;
  if (plain && prox.regularized())
    throw InvalidInput("SolverConfig: variant does not accept finite alpha");
}

namespace {

using ResolventFn = std::function<Vector(const Vector&)>;

struct Recorder {
  const SolverConfig& cfg;
  const ReferenceSolution* ref;
  IterateTrace trace;
  bool keep_vectors;

  Recorder(const SolverConfig& c, const ReferenceSolution* r, Eigen::Index n)
      : cfg(c), ref(r), keep_vectors(n <= kFullTraceMaxDim) {}

  void record(long k, const Vector& y, const Vector& x, double step,
              const Vector* t = nullptr) {
    trace.iters.push_back(k);
    trace.step_norm.push_back(step);
    if (ref) {
      trace.err_y.push_back((y - ref->y_star).norm());
      trace.err_x.push_back((x - ref->x_star).norm());
    }
    if (keep_vectors) {
      trace.iterates_y.push_back(y);
      trace.iterates_x.push_back(x);
      if (t) trace.iterates_t.push_back(*t);
    }
  }

  bool due(long k) const { return k % cfg.record_every == 0; }
};

// Tracks whether the windowed minimum of the stopping residual keeps
// improving; used for unregularized Peaceman-Rachford, which has no
// convergence guarantee.
struct StallDetector {
  bool enabled = false;
  double best_min = std::numeric_limits<double>::infinity();
  double window_min = std::numeric_limits<double>::infinity();
  long count = 0;

  bool update(double residual) {
    if (!enabled) return false;
    window_min = std::min(window_min, residual);
    if (++count < kStallWindow) return false;
    const bool improved = window_min < best_min;
    best_min = std::min(best_min, window_min);
    window_min = std::numeric_limits<double>::infinity();
    count = 0;
    return !improved;
  }
};

// Shared driver for the y-state splittings:
//   y <- y + lambda (J_F(2x - y) - x),  x <- J_G(y).
SolveResult run_splitting(const ResolventFn& resolvent_f, const ResolventFn& resolvent_g,
                          double lambda, const SolverConfig& cfg, const Vector& y0,
                          const ReferenceSolution* ref, bool stall_possible) {
  Vector y = y0;
  Vector x = resolvent_g(y);
  Recorder rec(cfg, ref, y0.size());
  rec.trace.y0_norm = y0.norm();
  rec.record(0, y, x, std::numeric_limits<double>::quiet_NaN());

  StallDetector stall;
  stall.enabled = stall_possible;

  SolveResult result;
  long k = 0;
  for (k = 1; k <= cfg.max_iters; ++k) {
    const Vector y_next = y + lambda * (resolvent_f(2.0 * x - y) - x);
    const Vector diff = y_next - y;
    const double step2 = diff.norm();
    const double step_inf = diff.lpNorm<Eigen::Infinity>();
    y = y_next;
    x = resolvent_g(y);

    const bool converged = step_inf <= cfg.stop_tol;
    const bool stalled = stall.update(step_inf);
    const bool last = converged || stalled || k == cfg.max_iters;
    if (rec.due(k) || last) rec.record(k, y, x, step2);
    if (converged) {
      rec.trace.converged_at = k;
      result.converged = true;
      break;
    }
    if (stalled) {
      result.stalled = true;
      break;
    }
  }
  result.iterations = std::min(k, cfg.max_iters);
  result.x_final = x;
  result.y_final = y;
  result.trace = std::move(rec.trace);
  return result;
}

AffineConstraint make_constraint(const ProblemInstance& P) {
  return AffineConstraint(P.A, P.b);
}

}  // namespace

SolveResult solve_dr(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                     const ReferenceSolution* ref) {
  cfg.validate();
  if (cfg.variant != Variant::DR) throw InvalidInput("solve_dr: wrong variant");
  const AffineConstraint K = make_constraint(P);
  const double gamma = cfg.prox.gamma;
  auto result = run_splitting(
      [gamma](const Vector& v) { return soft_threshold(v, gamma); },
      [&K](const Vector& v) { return project_affine(v, K); }, 1.0, cfg, y0, ref, false);
  result.dual_estimate = (result.x_final - result.y_final) / gamma;
  return result;
}

SolveResult solve_dr_swapped(const ProblemInstance& P, const SolverConfig& cfg,
                             const Vector& y0, const ReferenceSolution* ref) {
  cfg.validate();
  if (cfg.variant != Variant::DR_SWAPPED) throw InvalidInput("solve_dr_swapped: wrong variant");
  const AffineConstraint K = make_constraint(P);
  const double gamma = cfg.prox.gamma;
  auto result = run_splitting(
      [&K](const Vector& v) { return project_affine(v, K); },
      [gamma](const Vector& v) { return soft_threshold(v, gamma); }, 1.0, cfg, y0, ref, false);
  result.dual_estimate = (result.y_final - result.x_final) / gamma;
  return result;
}

SolveResult solve_dr_reg(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                         const ReferenceSolution* ref) {
  cfg.validate();
  if (cfg.variant != Variant::DR_REG) throw InvalidInput("solve_dr_reg: wrong variant");
  const AffineConstraint K = make_constraint(P);
  const ProxParams prox = cfg.prox;
  auto result = run_splitting(
      [prox](const Vector& v) { return prox_l1_l2(v, prox); },
      [&K](const Vector& v) { return project_affine(v, K); }, 1.0, cfg, y0, ref, false);
  result.dual_estimate = (result.x_final - result.y_final) / prox.gamma;
  return result;
}

SolveResult solve_gdr(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                      const ReferenceSolution* ref) {
  cfg.validate();
  const bool regularized = cfg.variant == Variant::GDR_REG || cfg.variant == Variant::PR_REG;
  if (cfg.variant != Variant::GDR && cfg.variant != Variant::PR && !regularized)
    throw InvalidInput("solve_gdr: wrong variant");
  const AffineConstraint K = make_constraint(P);
  const ProxParams prox = cfg.prox;
  const double gamma = prox.gamma;
  const double lambda = cfg.effective_lambda();
  // Unregularized PR (lambda = 2 with plain projection) has no convergence
  // guarantee; watch for stalls.
  const bool stall_possible = lambda == 2.0 && !prox.regularized();
  ResolventFn resolvent_g =
      regularized ? ResolventFn([prox, &K](const Vector& v) { return prox_affine_l2(v, prox, K); })
                  : ResolventFn([&K](const Vector& v) { return project_affine(v, K); });
  auto result = run_splitting(
      [gamma](const Vector& v) { return soft_threshold(v, gamma); }, resolvent_g, lambda, cfg,
      y0, ref, stall_possible);
  result.dual_estimate = (result.x_final - result.y_final) / gamma;
  return result;
}

SolveResult solve_lbsb(const ProblemInstance& P, const SolverConfig& cfg, const Vector& z0,
                       const Vector& w0, const Vector& x0, const ReferenceSolution* ref) {
  cfg.validate();
  if (cfg.variant != Variant::ADMM2_LBSB) throw InvalidInput("solve_lbsb: wrong variant");
  if (z0.size() != P.m() || w0.size() != P.n() || x0.size() != P.n())
    throw InvalidInput("solve_lbsb: start dimensions mismatch");
  const double gamma = cfg.prox.gamma;
  const double alpha = cfg.prox.alpha;
  const double c = cfg.prox.shrink();
  const Eigen::LDLT<Matrix> gram(P.A * P.A.transpose());
  if (gram.info() != Eigen::Success) throw NumericalFailure("solve_lbsb: gram factorization failed");

  Vector x = x0, z = z0, w = w0;
  Vector y_eq = x - gamma * w;  // change of variables y^k = x^{k-1} - gamma w^k
  Vector t = alpha * soft_threshold(P.A.transpose() * z, 1.0);

  Recorder rec(cfg, ref, P.n());
  rec.trace.y0_norm = y_eq.norm();
  rec.record(0, y_eq, x, std::numeric_limits<double>::quiet_NaN(), &t);

  SolveResult result;
  long k = 0;
  for (k = 1; k <= cfg.max_iters; ++k) {
    // w-update: prox of (alpha/2) dist^2(., [-1,1]^n) at v, componentwise.
    const Vector v = x / gamma + P.A.transpose() * z;
    const Vector clipped = v.cwiseMax(-1.0).cwiseMin(1.0);
    const Vector w_next = v - c * (v - clipped);
    // z-update: least squares with the cached Gram factorization.
    const Vector z_next = gram.solve((P.b - P.A * x) / gamma + P.A * w_next);
    // multiplier update
    const Vector x_next = x + gamma * (P.A.transpose() * z_next - w_next);

    const Vector y_next = x - gamma * w_next;
    const Vector diff = y_next - y_eq;
    const double step2 = diff.norm();
    const double step_inf = diff.lpNorm<Eigen::Infinity>();
    x = x_next;
    z = z_next;
    w = w_next;
    y_eq = y_next;
    t = alpha * soft_threshold(P.A.transpose() * z, 1.0);

    const bool converged = step_inf <= cfg.stop_tol;
    const bool last = converged || k == cfg.max_iters;
    if (rec.due(k) || last) rec.record(k, y_eq, x, step2, &t);
    if (converged) {
      rec.trace.converged_at = k;
      result.converged = true;
      break;
    }
  }
  result.iterations = std::min(k, cfg.max_iters);
  result.x_final = x;
  result.y_final = y_eq;
  result.trace = std::move(rec.trace);
  result.dual_estimate = w;
  return result;
}

SolveResult solve_chambolle_pock(const ProblemInstance& P, const SolverConfig& cfg,
                                 const Vector& x0, const Vector& w0,
                                 const ReferenceSolution* ref) {
  cfg.validate();
  if (cfg.variant != Variant::CHAMBOLLE_POCK)
    throw InvalidInput("solve_chambolle_pock: wrong variant");
  if (x0.size() != P.n() || w0.size() != P.n())
    throw InvalidInput("solve_chambolle_pock: start dimensions mismatch");
  const AffineConstraint K = make_constraint(P);
  const double gamma = cfg.prox.gamma;

  Vector x = x0, x_prev = x0, w = w0;
  Vector y_eq = x_prev - gamma * w;  // y^k = x^{k-1} - gamma w^k

  Recorder rec(cfg, ref, P.n());
  rec.trace.y0_norm = y_eq.norm();
  rec.record(0, y_eq, x, std::numeric_limits<double>::quiet_NaN());

  SolveResult result;
  long k = 0;
  for (k = 1; k <= cfg.max_iters; ++k) {
    // Resolvent of (1/gamma) df* evaluated through the Moreau identity;
    // for the l1 norm this is the clip onto [-1, 1]^n.
    const Vector u = w + (2.0 * x - x_prev) / gamma;
    const Vector w_next = u - soft_threshold(gamma * u, gamma) / gamma;
    const Vector y_next = x - gamma * w_next;
    const Vector x_next = project_affine(y_next, K);

    const Vector diff = y_next - y_eq;
    const double step2 = diff.norm();
    const double step_inf = diff.lpNorm<Eigen::Infinity>();
    x_prev = x;
    x = x_next;
    w = w_next;
    y_eq = y_next;

    const bool converged = step_inf <= cfg.stop_tol;
    const bool last = converged || k == cfg.max_iters;
    if (rec.due(k) || last) rec.record(k, y_eq, x, step2);
    if (converged) {
      rec.trace.converged_at = k;
      result.converged = true;
      break;
    }
  }
  result.iterations = std::min(k, cfg.max_iters);
  result.x_final = x;
  result.y_final = y_eq;
  result.trace = std::move(rec.trace);
  result.dual_estimate = w;
  return result;
}

SolveResult solve(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                  const ReferenceSolution* ref) {
  switch (cfg.variant) {
    case Variant::DR:
      return solve_dr(P, cfg, y0, ref);
    case Variant::DR_SWAPPED:
      return solve_dr_swapped(P, cfg, y0, ref);
    case Variant::DR_REG:
      return solve_dr_reg(P, cfg, y0, ref);
    case Variant::GDR:
    case Variant::PR:
    case Variant::GDR_REG:
    case Variant::PR_REG:
      return solve_gdr(P, cfg, y0, ref);
    case Variant::ADMM2_LBSB: {
      // Matched start under the change of variables linking this method to
      // the splitting iteration: x0 = P(y0) and A^T z0 = (x0 - y0)/gamma
      // (exact because x0 - y0 lies in R(A^T)).
      const AffineConstraint K = make_constraint(P);
      const Vector x0 = project_affine(y0, K);
      const Vector w0 = (x0 - y0) / cfg.prox.gamma;
      const Eigen::LDLT<Matrix> gram(P.A * P.A.transpose());
      const Vector z0 = gram.solve(P.A * w0);
      return solve_lbsb(P, cfg, z0, w0, x0, ref);
    }
    case Variant::CHAMBOLLE_POCK: {
      const AffineConstraint K = make_constraint(P);
      const Vector x0 = project_affine(y0, K);
      const Vector w0 = (x0 - y0) / cfg.prox.gamma;
      return solve_chambolle_pock(P, cfg, x0, w0, ref);
    }
  }
  throw InvalidInput("solve: unknown variant");
}

double fit_asymptotic_slope(const IterateTrace& trace, long window) {
  if (window < 3) throw InvalidInput("fit_asymptotic_slope: window must be >= 3");
  const double floor = 10.0 * kEps * trace.y0_norm;
  std::vector<double> ks, logs;
  for (size_t i = 0; i < trace.err_y.size(); ++i) {
    if (trace.err_y[i] > floor && trace.err_y[i] > 0.0) {
      ks.push_back(static_cast<double>(trace.iters[i]));
      logs.push_back(std::log(trace.err_y[i]));
    }
  }
  if (ks.size() > static_cast<size_t>(window)) {
    ks.erase(ks.begin(), ks.end() - window);
    logs.erase(logs.begin(), logs.end() - window);
  }
  if (ks.size() < 3) throw NumericalFailure("insufficient linear regime");
  const size_t n = ks.size();
  double mean_k = 0.0, mean_l = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_k += ks[i];
    mean_l += logs[i];
  }
  mean_k /= static_cast<double>(n);
  mean_l /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (ks[i] - mean_k) * (ks[i] - mean_k);
    sxy += (ks[i] - mean_k) * (logs[i] - mean_l);
  }
  if (sxx == 0.0) throw NumericalFailure("insufficient linear regime");
  return std::exp(sxy / sxx);
}

}  // namespace bp
