// Command-line front end: solve single instances, analyze supports, estimate
// angles, sweep closed-form rates, run experiment specs, and compute RIP
// bounds. Exit codes: 0 ok, 1 invalid input, 2 unconverged/marginal,
// 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bp/angle_estimation.hpp"
#include "bp/errors.hpp"
#include "bp/harness.hpp"
#include "bp/io.hpp"
#include "bp/rate_theory.hpp"
#include "bp/solvers.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Eigen::Index> parse_support(const std::string& text, Eigen::Index n) {
  std::vector<Eigen::Index> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      const long v = std::stol(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(static_cast<Eigen::Index>(v));
    } catch (const std::exception&) {
      throw bp::InvalidInput("bad support index '" + tok + "'");
    }
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw bp::InvalidInput("duplicate support index");
  for (Eigen::Index j : out)
    if (j < 0 || j >= n) throw bp::InvalidInput("support index out of range");
  return out;
}

bp::SupportInfo support_from_flag(const bp::Matrix& A, const std::string& text) {
  const std::vector<Eigen::Index> support = parse_support(text, A.cols());
  bp::Vector signs = bp::Vector::Ones(static_cast<Eigen::Index>(support.size()));
  return bp::SupportInfo::from_support(A.cols(), support, signs);
}

void write_column_csv(const std::string& path, const bp::Vector& v) {
  bp::save_matrix_csv(path, v);
}

int cmd_solve(const std::string& matrix, const std::string& rhs, const std::string& variant,
              double gamma, double alpha, double lambda, long max_iters, double tol,
              const std::string& out_dir) {
  bp::ProblemInstance P;
  P.A = bp::load_matrix(matrix);
  P.b = bp::load_vector(rhs);
  P.validate();

  bp::SolverConfig cfg;
  cfg.variant = bp::variant_from_string(variant);
  cfg.prox.gamma = gamma;
  cfg.prox.alpha = alpha;
  cfg.lambda = lambda;
  cfg.max_iters = max_iters;
  cfg.stop_tol = tol;
  cfg.validate();

  const bp::Vector y0 = bp::Vector::Zero(P.n());
  const bp::SolveResult res = bp::solve(P, cfg, y0, nullptr);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_column_csv((dir / "x.csv").string(), res.x_final);
  write_column_csv((dir / "y.csv").string(), res.y_final);

  // Error curves against the final iterate; available only when the trace
  // kept full vectors (small n).
  std::ofstream f((dir / "trace.csv").string());
  f << "k,err_y,err_x,log_err_y\n";
  const bool have_vectors = !res.trace.iterates_y.empty();
  for (size_t i = 0; i < res.trace.iters.size(); ++i) {
    double ey = std::numeric_limits<double>::quiet_NaN();
    double ex = std::numeric_limits<double>::quiet_NaN();
    if (have_vectors) {
      ey = (res.trace.iterates_y[i] - res.y_final).norm();
      ex = (res.trace.iterates_x[i] - res.x_final).norm();
    }
    f << res.trace.iters[i] << "," << bp::format_full(ey) << "," << bp::format_full(ex)
      << "," << bp::format_full(std::log(ey)) << "\n";
  }

  std::cout << "variant=" << bp::to_string(cfg.variant) << " iterations=" << res.iterations
            << " converged=" << (res.converged ? 1 : 0)
            << " stalled=" << (res.stalled ? 1 : 0) << "\n";
  return res.converged ? 0 : 2;
}

int cmd_analyze(const std::string& matrix, const std::string& support_text) {
  const bp::Matrix A = bp::load_matrix(matrix);
  const bp::SupportInfo S = support_from_flag(A, support_text);
  const bp::SubspaceGeometry g = bp::compute_geometry(A, S);
  const double theta1 = g.theta1();
  std::cout << "theta1=" << bp::format_full(theta1)
            << " cos_theta1=" << bp::format_full(g.cos_theta1()) << "\n";
  if (!(theta1 > 0.0)) {
    std::cout << "nullspaces intersect: no linear rate prediction\n";
    return 0;
  }
  if (theta1 > kPi / 4.0) {
    std::cout << "theta1 > pi/4: regularized parameter theory not applicable\n";
    std::cout << "unregularized rate cos_theta1=" << bp::format_full(std::cos(theta1))
              << "\n";
    return 0;
  }
  const bp::OptimalParams p = bp::optimal_parameters(theta1);
  std::cout << "c_star=" << bp::format_full(p.c_star)
            << " c_sharp=" << bp::format_full(p.c_sharp)
            << " c_bar=" << bp::format_full(p.c_bar)
            << " c_tilde=" << bp::format_full(p.c_tilde) << "\n";
  std::cout << "c,rho_dr,rho_pr,lambda_star,rho_at_lambda_star\n";
  for (int i = 1; i <= 10; ++i) {
    const double c = 0.1 * i;
    std::cout << bp::format_full(c) << "," << bp::format_full(bp::rho_closed_form(theta1, c))
              << "," << bp::format_full(bp::rho_gdr_closed_form(theta1, c, 2.0)) << ","
              << bp::format_full(bp::lambda_star(theta1, c)) << ","
              << bp::format_full(bp::rho_at_lambda_star(theta1, c)) << "\n";
  }
  return 0;
}

int cmd_estimate_angle(const std::string& matrix, const std::string& support_text,
                       const std::string& method, long iters) {
  const bp::Matrix A = bp::load_matrix(matrix);
  const bp::SupportInfo S = support_from_flag(A, support_text);

  bp::AngleMethod m;
  if (method == "altproj") {
    m = bp::AngleMethod::ALT_PROJ;
  } else if (method == "dr") {
    m = bp::AngleMethod::DR_FEAS;
  } else {
    throw bp::InvalidInput("method must be altproj or dr");
  }

  const bp::LinearMap proj_A = bp::make_nullspace_projector(A);
  const bp::LinearMap proj_B = [&S](const bp::Vector& v) {
    bp::Vector out = v;
    for (Eigen::Index j : S.zero_indices) out(j) = 0.0;
    return out;
  };

  std::mt19937_64 rng(1234);
  std::normal_distribution<double> gauss(0.0, 1.0);
  bp::Vector x0(A.cols());
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = gauss(rng);

  const bp::AngleEstimate est = bp::estimate_angle(proj_A, proj_B, x0, iters, m);
  const double svd_cos = bp::compute_geometry(A, S).cos_theta1();
  std::cout << "method=" << method << " cos_theta1=" << bp::format_full(est.cos_theta1)
            << " theta1=" << bp::format_full(std::acos(std::min(1.0, est.cos_theta1)))
            << " fit_window=" << est.fit_window
            << " residual=" << bp::format_full(est.residual) << "\n";
  std::cout << "svd cos_theta1=" << bp::format_full(svd_cos)
            << " abs_diff=" << bp::format_full(std::abs(svd_cos - est.cos_theta1)) << "\n";
  return 0;
}

int cmd_sweep(double theta, const std::string& c_grid, const std::string& lambda_grid,
              const std::string& out_path) {
  const std::string table =
      bp::sweep_rates(theta, bp::parse_grid(c_grid), bp::parse_grid(lambda_grid));
  std::ofstream f(out_path);
  if (!f) throw bp::InvalidInput("cannot write " + out_path);
  f << table;
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_experiment(const std::string& spec_path) {
  const bp::ExperimentSpec spec = bp::load_experiment_spec(spec_path);
  const bp::RateReport report = bp::run_experiment(spec);
  std::cout << report.to_csv();
  return report.all_pass() ? 0 : 2;
}

int cmd_rip_bound(const std::string& matrix, long sparsity) {
  bp::Matrix A = bp::load_matrix(matrix);
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    const double nrm = A.col(j).norm();
    if (!(nrm > 0.0)) throw bp::InvalidInput("zero column cannot be normalized");
    A.col(j) /= nrm;
  }
  const double d = bp::smallest_eig_inverse_gram(A);
  const auto [delta, bound] = bp::rip_bound(A, sparsity);
  std::cout << "delta_" << sparsity << "=" << bp::format_full(delta)
            << " d=" << bp::format_full(d)
            << " cos_theta1_bound=" << bp::format_full(bound) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator-splitting basis pursuit benchmark"};
  app.require_subcommand(1);
  int rc = 0;

  std::string matrix, rhs, variant, out_dir, support_text, method = "altproj";
  std::string c_grid, lambda_grid, out_path, spec_path;
  double gamma = 1.0, alpha = std::numeric_limits<double>::infinity(), lambda = 1.0;
  double theta = 0.0, tol = 1e-12;
  long max_iters = 100000, iters = 2000, sparsity = 1;

  auto* solve = app.add_subcommand("solve", "run one splitting variant on an instance");
  solve->add_option("--matrix", matrix)->required();
  solve->add_option("--rhs", rhs)->required();
  solve->add_option("--variant", variant)->required();
  solve->add_option("--gamma", gamma)->required();
  solve->add_option("--alpha", alpha);
  solve->add_option("--lambda", lambda);
  solve->add_option("--max-iters", max_iters)->required();
  solve->add_option("--tol", tol)->required();
  solve->add_option("--out", out_dir)->required();
  solve->callback([&] {
    rc = cmd_solve(matrix, rhs, variant, gamma, alpha, lambda, max_iters, tol, out_dir);
  });

  auto* analyze = app.add_subcommand("analyze", "print angle and rate predictions");
  analyze->add_option("--matrix", matrix)->required();
  analyze->add_option("--support", support_text)->required();
  analyze->callback([&] { rc = cmd_analyze(matrix, support_text); });

  auto* estimate =
      app.add_subcommand("estimate-angle", "estimate the first principal angle iteratively");
  estimate->add_option("--matrix", matrix)->required();
  estimate->add_option("--support", support_text)->required();
  estimate->add_option("--method", method)->check(CLI::IsMember({"altproj", "dr"}));
  estimate->add_option("--iters", iters);
  estimate->callback([&] { rc = cmd_estimate_angle(matrix, support_text, method, iters); });

  auto* sweep = app.add_subcommand("sweep", "closed-form rate table over (c, lambda)");
  sweep->add_option("--theta", theta)->required();
  sweep->add_option("--c-grid", c_grid)->required();
  sweep->add_option("--lambda-grid", lambda_grid)->required();
  sweep->add_option("--out", out_path)->required();
  sweep->callback([&] { rc = cmd_sweep(theta, c_grid, lambda_grid, out_path); });

  auto* experiment = app.add_subcommand("experiment", "run a JSON experiment spec");
  experiment->add_option("--spec", spec_path)->required();
  experiment->callback([&] { rc = cmd_experiment(spec_path); });

  auto* rip = app.add_subcommand("rip-bound", "brute-force RIP constant and angle bound");
  rip->add_option("--matrix", matrix)->required();
  rip->add_option("--sparsity", sparsity)->required();
  rip->callback([&] { rc = cmd_rip_bound(matrix, sparsity); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const bp::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const bp::Unconverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bp::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
