#include "bp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "bp/errors.hpp"
#include "bp/io.hpp"
#include "json.hpp"

namespace bp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTauCert = 1e-3;
constexpr double kRateTarget = 1e-10;  // the report's iteration-count column

// Minimizes ||g0 + G w||_inf over w: Lawson-style multiplicative reweighting
// warm start, then a short diminishing-step subgradient polish.
Vector chebyshev_min(const Vector& g0, const Matrix& G) {
  const Eigen::Index N = g0.size(), d = G.cols();
  Vector w = Vector::Zero(d);
  if (d == 0 || N == 0) return w;

  Vector lam = Vector::Constant(N, 1.0 / static_cast<double>(N));
  for (int it = 0; it < 300; ++it) {
    Matrix M = G.transpose() * lam.asDiagonal() * G;
    M.diagonal().array() += 1e-14 * (1.0 + M.trace());
    const Vector rhs = -G.transpose() * (lam.asDiagonal() * g0);
    w = M.ldlt().solve(rhs);
    const Vector r = (g0 + G * w).cwiseAbs();
    const double s = lam.dot(r);
    if (!(s > 0.0)) break;
    lam = lam.cwiseProduct(r) / s;
    lam = lam.cwiseMax(1e-300);
  }

  Vector best_w = w;
  double best = (g0 + G * best_w).lpNorm<Eigen::Infinity>();
  Vector cur = best_w;
  for (int t = 1; t <= 200; ++t) {
    const Vector r = g0 + G * cur;
    Eigen::Index imax = 0;
    r.cwiseAbs().maxCoeff(&imax);
    Vector grad = (r(imax) >= 0.0 ? 1.0 : -1.0) * G.row(imax).transpose();
    const double gn = grad.norm();
    if (gn <= 0.0) break;
    cur -= (0.5 * best / static_cast<double>(t)) * grad / gn;
    const double val = (g0 + G * cur).lpNorm<Eigen::Infinity>();
    if (val < best) {
      best = val;
      best_w = cur;
    }
  }
  return best_w;
}

Matrix gaussian_matrix(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return A;
}

Matrix fourier_matrix(Eigen::Index n, const std::vector<long>& freqs) {
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(freqs.size());
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  Matrix A(m, n);
  Eigen::Index row = 0;
  for (long f : freqs) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double phase =
          2.0 * kPi * static_cast<double>(f) * static_cast<double>(j) / static_cast<double>(n);
      A(row, j) = scale * std::cos(phase);
      A(row + 1, j) = scale * std::sin(phase);
    }
    row += 2;
  }
  return A;
}

double slope_of(const std::vector<double>& ks, const std::vector<double>& ys, size_t b,
                size_t e) {
  double mx = 0.0, my = 0.0;
  const double cnt = static_cast<double>(e - b);
  for (size_t i = b; i < e; ++i) {
    mx += ks[i];
    my += ys[i];
  }
  mx /= cnt;
  my /= cnt;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = b; i < e; ++i) {
    sxx += (ks[i] - mx) * (ks[i] - mx);
    sxy += (ks[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

Vector normal_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

std::string csv_field(double v) { return format_full(v); }

}  // namespace

// ---------------------------------------------------------------- generation

void GeneratorSpec::validate() const {
  if (!(n >= 1 && m >= 1 && m <= n)) throw InvalidInput("generator: need 1 <= m <= n");
  if (!(k >= 0 && k <= m)) throw InvalidInput("generator: need 0 <= k <= m");
  if (distribution == "gaussian") {
    if (!frequencies.empty())
      throw InvalidInput("generator: frequencies only apply to the fourier distribution");
    return;
  }
  if (distribution != "fourier")
    throw InvalidInput("generator: unknown distribution '" + distribution + "'");
  if (frequencies.empty()) throw InvalidInput("generator: fourier needs frequencies");
  if (m != 2 * static_cast<Eigen::Index>(frequencies.size()))
    throw InvalidInput("generator: fourier needs m = 2 * #frequencies");
  std::vector<long> sorted = frequencies;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("generator: duplicate frequency");
  for (long f : sorted)
    if (!(f >= 1 && 2 * f < static_cast<long>(n)))
      throw InvalidInput("generator: frequencies must lie in [1, n/2)");
}

UniquenessCheck verify_uniqueness(const ProblemInstance& problem,
                                  const SupportInfo& support) {
  const Matrix& A = problem.A;
  const Eigen::Index m = problem.m(), n = problem.n();
  const Eigen::Index k = static_cast<Eigen::Index>(support.support.size());
  if (support.n() != n) throw InvalidInput("verify_uniqueness: support size mismatch");

  UniquenessCheck out;
  out.certificate = Vector::Zero(n);
  if (k == 0) {
    out.unique = true;
    return out;
  }

  Matrix As(m, k);
  for (Eigen::Index i = 0; i < k; ++i) As.col(i) = A.col(support.support[i]);
  Eigen::JacobiSVD<Matrix> svd(As);
  const auto& sv = svd.singularValues();
  const double tol = default_rank_tol(As) * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  if (rank < k) return out;  // dependent support columns: not unique

  Vector sgn_s(k);
  for (Eigen::Index i = 0; i < k; ++i) sgn_s(i) = support.sign_pattern(support.support[i]);

  // Certificates are A^T z with z = z0 + N w, N spanning N(A_S^T); minimize
  // the off-support infinity norm over w.
  const Matrix AsT = As.transpose();
  Vector z = pseudoinverse(AsT) * sgn_s;
  const SubspaceBasis N = nullspace_basis(AsT);
  const Eigen::Index nz = static_cast<Eigen::Index>(support.zero_indices.size());
  if (nz == 0) {
    out.certificate = A.transpose() * z;
    out.unique = true;
    return out;
  }
  Matrix Az(m, nz);
  for (Eigen::Index i = 0; i < nz; ++i) Az.col(i) = A.col(support.zero_indices[i]);
  if (N.dim() > 0) {
    const Vector g0 = Az.transpose() * z;
    const Matrix G = Az.transpose() * N.vectors;
    z += N.vectors * chebyshev_min(g0, G);
  }
  out.certificate = A.transpose() * z;
  out.offsupport_max = (Az.transpose() * z).lpNorm<Eigen::Infinity>();

  if (out.offsupport_max < 1.0 - kTauCert) {
    out.unique = true;
  } else if (out.offsupport_max <= 1.0 + kTauCert) {
    out.marginal = true;
  }
  return out;
}

InstanceBundle generate_instance(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick;

  for (int attempt = 0; attempt < 20; ++attempt) {
    Matrix A = spec.distribution == "gaussian" ? gaussian_matrix(spec.m, spec.n, rng)
                                               : fourier_matrix(spec.n, spec.frequencies);

    std::vector<Eigen::Index> idx(static_cast<size_t>(spec.n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < spec.k; ++i) {
      const Eigen::Index j =
          pick(rng, std::uniform_int_distribution<Eigen::Index>::param_type(i, spec.n - 1));
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }

    Vector xs = Vector::Zero(spec.n);
    for (Eigen::Index i = 0; i < spec.k; ++i) {
      double v = 0.0;
      do {
        v = gauss(rng);
      } while (std::abs(v) < 0.1);  // keep signs numerically stable
      xs(idx[static_cast<size_t>(i)]) = v;
    }

    ProblemInstance P{A, A * xs, xs};
    try {
      P.validate();
    } catch (const InvalidInput&) {
      continue;  // rank-deficient draw, resample
    }
    SupportInfo S = SupportInfo::from_vector(xs);
    UniquenessCheck check = verify_uniqueness(P, S);
    if (check.unique) return InstanceBundle{std::move(P), std::move(S), check.certificate};
  }
  throw Unconverged("could not certify uniqueness");
}

double gamma_for_c(double alpha, double c) {
  if (!(std::isfinite(alpha) && alpha > 0.0))
    throw InvalidInput("gamma_for_c: alpha must be finite and positive");
  if (!(c > 0.0 && c < 1.0)) throw InvalidInput("gamma_for_c: c outside (0, 1)");
  return alpha * (1.0 - c) / c;
}

// --------------------------------------------------------------- rate fitting

FitOutcome fit_rate(const IterateTrace& trace, double floor) {
  FitOutcome out;
  std::vector<double> ks, logs;
  for (size_t i = 0; i < trace.err_y.size(); ++i) {
    const double e = trace.err_y[i];
    if (out.iters_to_target < 0 && std::isfinite(e) && e <= kRateTarget)
      out.iters_to_target = trace.iters[i];
    if (std::isfinite(e) && e > floor) {
      ks.push_back(static_cast<double>(trace.iters[i]));
      logs.push_back(std::log(e));
    }
  }
  const bool hit_floor =
      !trace.err_y.empty() && trace.err_y.back() <= floor;

  if (ks.size() < 6) {
    if (hit_floor) {
      out.kind = FitKind::COLLAPSED;
      out.rate = 0.0;
      out.window = static_cast<long>(ks.size());
    }
    return out;
  }

  size_t w = std::max<size_t>(6, ks.size() / 2);
  while (w >= 6) {
    const size_t b = ks.size() - w;
    const size_t mid = b + w / 2;
    const double s1 = slope_of(ks, logs, b, mid);
    const double s2 = slope_of(ks, logs, mid, ks.size());
    if (s2 < 0.0 && std::abs(s1 - s2) <= 0.05 * std::max(std::abs(s1), std::abs(s2))) {
      const double s = slope_of(ks, logs, b, ks.size());
      out.kind = FitKind::LINEAR;
      out.rate = std::exp(s);
      out.window = static_cast<long>(w);
      return out;
    }
    w = w * 3 / 4;
  }
  if (hit_floor) {
    out.kind = FitKind::COLLAPSED;
    out.rate = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------- experiments

void ExperimentSpec::validate() const {
  if (!generator && matrix_path.empty())
    throw InvalidInput("experiment: needs a generator or a matrix path");
  if (generator && !matrix_path.empty())
    throw InvalidInput("experiment: generator and matrix path are exclusive");
  if (generator) generator->validate();
  if (!matrix_path.empty() && rhs_path.empty())
    throw InvalidInput("experiment: matrix path needs an rhs path");
  if (!(pass_tolerance > 0.0)) throw InvalidInput("experiment: pass_tolerance must be positive");
  if (!(reference.tol > 0.0)) throw InvalidInput("experiment: reference tol must be positive");
  for (double c : c_grid)
    if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("experiment: c grid outside (0, 1]");
  for (double l : lambda_grid)
    if (!(l > 0.0 && l <= 2.0)) throw InvalidInput("experiment: lambda grid outside (0, 2]");
  for (const RunSpec& r : runs) r.config.validate();
}

bool RateReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const RateRow& r) { return r.pass; });
}

std::string RateReport::to_csv() const {
  std::ostringstream os;
  os << "variant,gamma,alpha,c,lambda,predicted_rho,fitted_rate,gap,kind,"
        "iters_to_1e-10,pass,note\n";
  for (const RateRow& r : rows) {
    os << r.variant << "," << csv_field(r.gamma) << "," << csv_field(r.alpha) << ","
       << csv_field(r.c) << "," << csv_field(r.lambda) << "," << csv_field(r.predicted_rho)
       << "," << csv_field(r.fitted_rate) << "," << csv_field(r.gap) << "," << r.kind << ","
       << r.iters_to_1e10 << "," << (r.pass ? 1 : 0) << "," << r.note << "\n";
  }
  return os.str();
}

namespace {

using nlohmann::json;

std::vector<double> grid_from_json(const json& j, const char* what) {
  if (j.is_string()) return parse_grid(j.get<std::string>());
  if (!j.is_array()) throw InvalidInput(std::string("experiment: ") + what +
                                        " must be an array or 'a:b:step' string");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

RunSpec run_from_json(const json& jr) {
  RunSpec r;
  r.config.variant = variant_from_string(jr.at("variant").get<std::string>());
  r.config.prox.alpha =
      jr.contains("alpha") ? jr.at("alpha").get<double>()
                           : std::numeric_limits<double>::infinity();
  if (jr.contains("gamma") && jr.contains("c"))
    throw InvalidInput("experiment run: give gamma or c, not both");
  if (jr.contains("c")) {
    r.config.prox.gamma = gamma_for_c(r.config.prox.alpha, jr.at("c").get<double>());
  } else {
    r.config.prox.gamma = jr.value("gamma", 1.0);
  }
  r.config.lambda = jr.value("lambda", 1.0);
  r.config.max_iters = jr.value("max_iters", 100000L);
  r.config.stop_tol = jr.value("tol", 1e-12);
  r.config.record_every = jr.value("record_every", 1L);
  if (jr.contains("y0_seed")) r.y0_seed = jr.at("y0_seed").get<std::uint64_t>();
  r.label = jr.value("label", std::string{});
  return r;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("experiment spec: ") + e.what());
  }
  try {
    ExperimentSpec s;
    if (j.contains("instance")) {
      const json& ji = j.at("instance");
      if (ji.contains("generator")) {
        const json& jg = ji.at("generator");
        GeneratorSpec g;
        g.m = jg.at("m").get<Eigen::Index>();
        g.n = jg.at("n").get<Eigen::Index>();
        g.k = jg.at("k").get<Eigen::Index>();
        g.distribution = jg.value("distribution", std::string("gaussian"));
        g.seed = jg.value("seed", std::uint64_t{0});
        if (jg.contains("frequencies"))
          g.frequencies = jg.at("frequencies").get<std::vector<long>>();
        s.generator = std::move(g);
      }
      // Read the file paths unconditionally so validate() can reject a spec
      // that supplies both a generator and a matrix path.
      s.matrix_path = ji.value("matrix", std::string{});
      s.rhs_path = ji.value("rhs", std::string{});
    }
    if (j.contains("runs"))
      for (const auto& jr : j.at("runs")) s.runs.push_back(run_from_json(jr));
    if (j.contains("reference")) {
      s.reference.tol = j.at("reference").value("tol", 1e-14);
      s.reference.max_iters = j.at("reference").value("max_iters", 0L);
    }
    s.pass_tolerance = j.value("pass_tolerance", 1e-2);
    if (j.contains("c_grid")) s.c_grid = grid_from_json(j.at("c_grid"), "c_grid");
    if (j.contains("lambda_grid"))
      s.lambda_grid = grid_from_json(j.at("lambda_grid"), "lambda_grid");
    s.out_dir = j.value("out_dir", std::string{});
    s.validate();
    return s;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("experiment spec: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str());
}

namespace {

void write_run_csv(const std::string& path, const IterateTrace& trace) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write run file: " + path);
  f << "k,err_y,err_x,log_err_y\n";
  for (size_t i = 0; i < trace.iters.size(); ++i) {
    f << trace.iters[i] << "," << csv_field(trace.err_y[i]) << ","
      << csv_field(trace.err_x[i]) << "," << csv_field(std::log(trace.err_y[i])) << "\n";
  }
}

std::string lowercase_name(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

RateReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  ProblemInstance P;
  std::optional<SupportInfo> planted;
  if (spec.generator) {
    InstanceBundle bundle = generate_instance(*spec.generator);
    P = std::move(bundle.problem);
    planted = std::move(bundle.support);
  } else {
    P.A = load_matrix(spec.matrix_path);
    P.b = load_vector(spec.rhs_path);
    P.validate();
  }
  const Eigen::Index n = P.n();

  const bool emit = !spec.out_dir.empty();
  if (emit) std::filesystem::create_directories(spec.out_dir);

  RateReport report;
  std::optional<SupportInfo> last_support;

  for (size_t i = 0; i < spec.runs.size(); ++i) {
    const RunSpec& run = spec.runs[i];
    const SolverConfig& cfg = run.config;
    RateRow row;
    row.label = run.label.empty()
                    ? to_string(cfg.variant) + "_" + std::to_string(i)
                    : run.label;
    row.variant = to_string(cfg.variant);
    row.gamma = cfg.prox.gamma;
    row.alpha = cfg.prox.alpha;
    row.c = cfg.prox.shrink();
    row.lambda = cfg.effective_lambda();

    try {
      Vector y0 = run.y0_seed ? normal_vector(n, *run.y0_seed) : Vector::Zero(n);

      SolverConfig ref_cfg = cfg;
      ref_cfg.stop_tol = spec.reference.tol;
      ref_cfg.max_iters = spec.reference.max_iters > 0
                              ? spec.reference.max_iters
                              : std::max(10 * cfg.max_iters, 50000L);
      ref_cfg.record_every = ref_cfg.max_iters;  // keep the reference trace tiny
      const SolveResult ref_run = solve(P, ref_cfg, y0, nullptr);
      if (!ref_run.converged) {
        row.kind = "error";
        row.note = "reference unconverged";
        report.rows.push_back(row);
        continue;
      }
      const ReferenceSolution ref{ref_run.y_final, ref_run.x_final};

      const SolveResult res = solve(P, cfg, y0, &ref);
      const FitOutcome fit = fit_rate(res.trace);
      row.fitted_rate = fit.rate;
      row.iters_to_1e10 = fit.iters_to_target;

      const double xmax = ref.x_star.cwiseAbs().maxCoeff();
      const SupportInfo S =
          SupportInfo::from_vector(ref.x_star, std::max(1e-9, 1e-7 * xmax));
      last_support = S;

      ProblemInstance Pc = P;
      Pc.x_star = ref.x_star;
      Vector y_std = ref.y_star;
      if (cfg.variant == Variant::DR_SWAPPED) y_std = 2.0 * ref.x_star - ref.y_star;
      const ProxPlacement placement =
          (cfg.variant == Variant::GDR_REG || cfg.variant == Variant::PR_REG)
              ? ProxPlacement::CONSTRAINT_SIDE
              : ProxPlacement::THRESHOLD_SIDE;
      const FixedPointInfo info =
          compute_fixed_point_info(Pc, S, cfg.prox.gamma, y_std, cfg.prox.alpha, placement);

      double theta = std::numeric_limits<double>::quiet_NaN();
      if (info.kind == FixedPointKind::INTERIOR) {
        row.kind = "interior";
        theta = compute_geometry(P.A, S).theta1();
      } else if (info.theta_bar1) {
        row.kind = "boundary";
        theta = *info.theta_bar1;
      } else {
        row.kind = "boundary-nongeneric";
      }

      if (std::isnan(theta)) {
        row.pass = true;
        row.note = "no boundary prediction";
      } else {
        row.predicted_rho = row.lambda == 1.0
                                ? rho_closed_form(theta, row.c)
                                : rho_gdr_closed_form(theta, row.c, row.lambda);
        if (fit.kind == FitKind::LINEAR) {
          row.gap = std::abs(row.fitted_rate - row.predicted_rho);
          row.pass = row.gap <= spec.pass_tolerance;
        } else if (fit.kind == FitKind::COLLAPSED) {
          row.pass = true;
          row.note = "superlinear collapse";
        } else {
          row.pass = false;
          row.note = "transient only";
        }
      }

      if (emit) {
        std::ostringstream name;
        name << "run_" << i << "_" << lowercase_name(row.variant) << ".csv";
        write_run_csv((std::filesystem::path(spec.out_dir) / name.str()).string(),
                      res.trace);
      }
    } catch (const std::exception& e) {
      row.kind = "error";
      row.note = e.what();
      row.pass = false;
    }
    report.rows.push_back(row);
  }

  if (emit && !spec.c_grid.empty() && !spec.lambda_grid.empty()) {
    const std::optional<SupportInfo>& S = planted ? planted : last_support;
    if (S) {
      const double theta1 = compute_geometry(P.A, *S).theta1();
      if (theta1 > 0.0 && theta1 <= kPi / 4.0) {
        std::ofstream f((std::filesystem::path(spec.out_dir) / "sweep.csv").string());
        f << sweep_rates(theta1, spec.c_grid, spec.lambda_grid);
      }
    }
  }

  if (emit) {
    std::ofstream f((std::filesystem::path(spec.out_dir) / "report.csv").string());
    f << report.to_csv();
  }
  return report;
}

// --------------------------------------------------------------------- sweeps

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, ':')) parts.push_back(cur);
  if (parts.size() != 3) throw InvalidInput("grid must be 'a:b:step': " + text);
  double a = 0.0, b = 0.0, step = 0.0;
  try {
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    step = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw InvalidInput("bad grid numbers: " + text);
  }
  if (!(step > 0.0) || b < a) throw InvalidInput("grid needs a <= b and step > 0: " + text);
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double raw = a + static_cast<double>(i) * step;
    if (raw > b + 1e-12) break;
    // Clamp so accumulated rounding never pushes the last point past b.
    out.push_back(std::min(raw, b));
    if (out.back() == b) break;
  }
  return out;
}

std::string sweep_rates(double theta1, const std::vector<double>& c_grid,
                        const std::vector<double>& lambda_grid) {
  if (!(theta1 > 0.0 && theta1 <= kPi / 4.0))
    throw InvalidInput("sweep: theta1 outside (0, pi/4]");
  if (c_grid.empty() || lambda_grid.empty()) throw InvalidInput("sweep: empty grid");
  for (double c : c_grid)
    if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("sweep: c grid outside (0, 1]");
  for (double l : lambda_grid)
    if (!(l > 0.0 && l <= 2.0)) throw InvalidInput("sweep: lambda grid outside (0, 2]");

  const OptimalParams opt = optimal_parameters(theta1);
  auto nearest = [&](double target) {
    size_t best = 0;
    for (size_t i = 1; i < c_grid.size(); ++i)
      if (std::abs(c_grid[i] - target) < std::abs(c_grid[best] - target)) best = i;
    return best;
  };
  const size_t i_star = nearest(opt.c_star), i_sharp = nearest(opt.c_sharp),
               i_bar = nearest(opt.c_bar);

  std::ostringstream os;
  os << "# theta1=" << format_full(theta1) << " cos_theta1=" << format_full(std::cos(theta1))
     << "\n";
  os << "# c_star=" << format_full(opt.c_star) << " c_sharp=" << format_full(opt.c_sharp)
     << " c_bar=" << format_full(opt.c_bar) << " c_tilde=" << format_full(opt.c_tilde)
     << "\n";
  os << "c,lambda,rho_dr,rho_gdr,lambda_star,rho_at_lambda_star,marker\n";
  for (size_t ci = 0; ci < c_grid.size(); ++ci) {
    const double c = c_grid[ci];
    std::string marker;
    if (ci == i_star) marker += "c_star";
    if (ci == i_sharp) marker += marker.empty() ? "c_sharp" : "+c_sharp";
    if (ci == i_bar) marker += marker.empty() ? "c_bar" : "+c_bar";
    for (double lam : lambda_grid) {
      os << format_full(c) << "," << format_full(lam) << ","
         << format_full(rho_closed_form(theta1, c)) << ","
         << format_full(rho_gdr_closed_form(theta1, c, lam)) << ","
         << format_full(lambda_star(theta1, c)) << ","
         << format_full(rho_at_lambda_star(theta1, c)) << "," << marker << "\n";
    }
  }

  // Cross-check the closed forms against the spectral oracle on a synthetic
  // geometry carrying exactly this angle.
  const SyntheticGeometry geo = make_synthetic_geometry({theta1}, 1, 1, 0x5eed);
  const AffineConstraint K(geo.A, geo.b);
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<size_t> pick_c(0, c_grid.size() - 1);
  std::uniform_int_distribution<size_t> pick_l(0, lambda_grid.size() - 1);
  for (int t = 0; t < 5; ++t) {
    const double c = c_grid[pick_c(rng)];
    const double lam = lambda_grid[pick_l(rng)];
    const RatePrediction sp = predict_rate_spectral(geo.support, K, c, lam);
    const double cf = rho_gdr_closed_form(theta1, c, lam);
    if (std::abs(sp.rho - cf) > 1e-8)
      throw NumericalFailure("sweep spectral cross-check failed");
  }
  return os.str();
}

}  // namespace bp
