#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bp/problem.hpp"
#include "bp/rate_theory.hpp"
#include "bp/solvers.hpp"

namespace bp {

// ---------------------------------------------------------------- generation

struct GeneratorSpec {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;  // nonzeros of the planted solution
  std::string distribution = "gaussian";  // "gaussian" or "fourier"
  std::uint64_t seed = 0;
  // Fourier generator only: one cosine/sine row pair per listed frequency,
  // so m must equal 2 * frequencies.size().
  std::vector<long> frequencies;

  void validate() const;
};

// Outcome of the dual-certificate search for a planted support.
struct UniquenessCheck {
  bool unique = false;
  bool marginal = false;  // off-support norm landed inside the decision band
  Vector certificate;     // eta0 in R(A^T), sign pattern on the support
  double offsupport_max = 0.0;
};

struct InstanceBundle {
  ProblemInstance problem;
  SupportInfo support;
  Vector certificate;
};

// Checks support-column independence and searches for a strict dual
// certificate by minimizing the off-support infinity norm over R(A^T).
UniquenessCheck verify_uniqueness(const ProblemInstance& problem,
                                  const SupportInfo& support);

// Samples instances until one certifies unique (up to 20 attempts), then
// returns it with the certificate. Deterministic in the seed.
InstanceBundle generate_instance(const GeneratorSpec& spec);

// The gamma that realizes shrink factor c at fixed alpha: alpha (1 - c) / c.
double gamma_for_c(double alpha, double c);

// --------------------------------------------------------------- rate fitting

enum class FitKind { LINEAR, TRANSIENT_ONLY, COLLAPSED };

struct FitOutcome {
  double rate = std::numeric_limits<double>::quiet_NaN();
  FitKind kind = FitKind::TRANSIENT_ONLY;
  long window = 0;            // points in the accepted fit window
  long iters_to_target = -1;  // first recorded k with err_y <= 1e-10
};

// Fits exp(slope) of log err_y over a trailing window whose two half-window
// slopes agree within 5%, shrinking the window until they do. COLLAPSED marks
// super-linear runs that hit the floor before a linear regime forms;
// TRANSIENT_ONLY marks traces where no stable window exists.
FitOutcome fit_rate(const IterateTrace& trace, double floor = 1e-13);

// ---------------------------------------------------------------- experiments

struct RunSpec {
  SolverConfig config;
  std::optional<std::uint64_t> y0_seed;  // absent -> y0 = 0
  std::string label;
};

struct ReferenceControls {
  double tol = 1e-14;
  long max_iters = 0;  // 0 -> max(10 * run max_iters, 50000)
};

struct ExperimentSpec {
  std::optional<GeneratorSpec> generator;
  std::string matrix_path;  // used when no generator is given
  std::string rhs_path;
  std::vector<RunSpec> runs;
  ReferenceControls reference;
  double pass_tolerance = 1e-2;
  std::vector<double> c_grid;  // optional: sweep at the instance's theta1
  std::vector<double> lambda_grid;
  std::string out_dir;  // empty -> no files written

  void validate() const;
};

struct RateRow {
  std::string label;
  std::string variant;
  double gamma = 1.0;
  double alpha = std::numeric_limits<double>::infinity();
  double c = 1.0;
  double lambda = 1.0;
  double predicted_rho = std::numeric_limits<double>::quiet_NaN();
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  std::string kind;  // interior | boundary | boundary-nongeneric | ...
  long iters_to_1e10 = -1;
  bool pass = false;
  std::string note;
};

struct RateReport {
  std::vector<RateRow> rows;

  bool all_pass() const;
  std::string to_csv() const;
};

ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);

// For each run: reference solve from the same start, measured solve against
// that reference, slope fit, fixed-point classification, and the matching
// closed-form prediction. Per-run failures become failing rows, not throws.
RateReport run_experiment(const ExperimentSpec& spec);

// --------------------------------------------------------------- sweeps

// "a:b:step" -> {a, a+step, ..., <= b}.
std::vector<double> parse_grid(const std::string& text);

// Closed-form rate table over (c, lambda) at a fixed first principal angle,
// with marker column for the grid points nearest c_star / c_sharp / c_bar and
// a spectral cross-check at five grid points.
std::string sweep_rates(double theta1, const std::vector<double>& c_grid,
                        const std::vector<double>& lambda_grid);

}  // namespace bp
