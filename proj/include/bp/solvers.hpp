#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bp/operators.hpp"
#include "bp/problem.hpp"

namespace bp {

// The splitting iterations. DR/GDR/PR act on the plain constraint; the _REG
// variants carry the extra quadratic term (finite alpha) on one side;
// ADMM2_LBSB and CHAMBOLLE_POCK are the two equivalent reformulations.
enum class Variant {
  DR,
  DR_SWAPPED,
  DR_REG,
  GDR,
  PR,
  GDR_REG,
  PR_REG,
  ADMM2_LBSB,
  CHAMBOLLE_POCK,
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct SolverConfig {
  Variant variant = Variant::DR;
  ProxParams prox;
  double lambda = 1.0;  // relaxation; PR variants force 2, DR variants force 1
  long max_iters = 100000;
  double stop_tol = 1e-12;  // on ||y^{k+1} - y^k||_inf
  long record_every = 1;

  // The relaxation actually used after the per-variant forcing rules.
  double effective_lambda() const;
  void validate() const;
};

// Recorded iterates. Full vectors are kept only when n <= 2000; errors against
// a reference are filled only when one is supplied to the solver.
struct IterateTrace {
  std::vector<long> iters;
  std::vector<double> err_y;      // ||y^k - y_ref||_2
  std::vector<double> err_x;      // ||x^k - x_ref||_2
  std::vector<double> step_norm;  // ||y^k - y^{k-1}||_2 (NaN at k = 0)
  std::vector<Vector> iterates_y;
  std::vector<Vector> iterates_x;
  std::vector<Vector> iterates_t;  // auxiliary sequence of ADMM2_LBSB
  double y0_norm = 0.0;
  std::optional<long> converged_at;
};

struct SolveResult {
  Vector x_final;
  Vector y_final;
  IterateTrace trace;
  std::optional<Vector> dual_estimate;  // estimate of the certificate eta
  long iterations = 0;
  bool converged = false;
  bool stalled = false;
};

// Optional high-precision targets for error recording.
struct ReferenceSolution {
  Vector y_star;
  Vector x_star;
};

SolveResult solve_dr(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                     const ReferenceSolution* ref = nullptr);
SolveResult solve_dr_swapped(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                             const ReferenceSolution* ref = nullptr);
SolveResult solve_dr_reg(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                         const ReferenceSolution* ref = nullptr);
SolveResult solve_gdr(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                      const ReferenceSolution* ref = nullptr);
SolveResult solve_lbsb(const ProblemInstance& P, const SolverConfig& cfg, const Vector& z0,
                       const Vector& w0, const Vector& x0,
                       const ReferenceSolution* ref = nullptr);
SolveResult solve_chambolle_pock(const ProblemInstance& P, const SolverConfig& cfg,
                                 const Vector& x0, const Vector& w0,
                                 const ReferenceSolution* ref = nullptr);

// Dispatch on cfg.variant from a single y0. ADMM2_LBSB and CHAMBOLLE_POCK get
// the change-of-variables starts that make their iterates match a DR-family
// run from the same y0.
SolveResult solve(const ProblemInstance& P, const SolverConfig& cfg, const Vector& y0,
                  const ReferenceSolution* ref = nullptr);

// Least-squares slope of log err_y over the trailing `window` recorded entries
// above the noise floor; returns the per-iteration rate e^slope. Throws
// NumericalFailure("insufficient linear regime") with fewer than 3 points.
double fit_asymptotic_slope(const IterateTrace& trace, long window);

}  // namespace bp
