#include "bp/angle_estimation.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "bp/errors.hpp"

namespace bp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / static_cast<double>(n));
  return f;
}

}  // namespace

AngleEstimate estimate_angle(const LinearMap& proj_null_A, const LinearMap& proj_null_B,
                             const Vector& x0, long iters, AngleMethod method) {
  if (iters < 1) throw InvalidInput("estimate_angle: iters must be >= 1");
  if (x0.size() == 0) throw InvalidInput("estimate_angle: empty start vector");
  const double floor = 1e2 * kEps * x0.norm();

  AngleEstimate est;
  est.method = method;

  if (method == AngleMethod::ALT_PROJ) {
    // Start inside N(A) so the (cos theta_1)^2 contraction holds from the
    // first recorded step onward.
    Vector x = proj_null_A(x0);
    est.norms.push_back(x.norm());
    for (long k = 0; k < iters; ++k) {
      x = proj_null_A(proj_null_B(x));
      est.norms.push_back(x.norm());
      if (est.norms.back() <= floor) break;
    }
  } else {
    Vector y = x0;
    est.norms.push_back(proj_null_B(y).norm());
    for (long k = 0; k < iters; ++k) {
      const Vector rb = 2.0 * proj_null_B(y) - y;
      const Vector ra = 2.0 * proj_null_A(rb) - rb;
      y = 0.5 * (ra + y);
      est.norms.push_back(proj_null_B(y).norm());
      if (est.norms.back() <= floor) break;
    }
  }

  std::vector<double> ks, logs;
  for (size_t i = 0; i < est.norms.size(); ++i) {
    if (est.norms[i] > floor) {
      ks.push_back(static_cast<double>(i));
      logs.push_back(std::log(est.norms[i]));
    }
  }

  if (ks.size() < 3) {
    // One- or two-step annihilation (e.g. orthogonal subspaces): report the
    // per-step ratio directly instead of fitting.
    if (est.norms.size() >= 2 && est.norms.back() <= floor) {
      const double ratio =
          est.norms[0] > 0.0 ? est.norms[1] / est.norms[0] : 0.0;
      est.cos_theta1 =
          method == AngleMethod::ALT_PROJ ? std::sqrt(ratio) : ratio;
      est.fit_window = 0;
      return est;
    }
    throw NumericalFailure("insufficient linear regime");
  }

  // Trailing 25% of the usable points, at least 3.
  size_t window = std::max<size_t>(3, ks.size() / 4);
  std::vector<double> wk(ks.end() - window, ks.end());
  std::vector<double> wl(logs.end() - window, logs.end());
  LineFit fit = fit_line(wk, wl);

  if (method == AngleMethod::DR_FEAS && window > 6) {
    // The projected norm dips periodically while the underlying pair rotates;
    // drop strong downward outliers once and refit.
    std::vector<double> rk, rl;
    for (size_t i = 0; i < wk.size(); ++i) {
      const double r = wl[i] - (fit.intercept + fit.slope * wk[i]);
      if (r >= -2.0 * fit.rms) {
        rk.push_back(wk[i]);
        rl.push_back(wl[i]);
      }
    }
    if (rk.size() >= 3 && rk.size() < wk.size()) {
      fit = fit_line(rk, rl);
      window = rk.size();
    }
  }

  if (fit.slope >= 0.0) throw InvalidInput("subspaces intersect nontrivially");
  est.fit_window = static_cast<long>(window);
  est.residual = fit.rms;
  est.cos_theta1 = method == AngleMethod::ALT_PROJ ? std::exp(fit.slope / 2.0)
                                                   : std::exp(fit.slope);
  return est;
}

LinearMap make_nullspace_projector(const Matrix& A) {
  auto pinv = std::make_shared<Matrix>(pseudoinverse(A));
  auto mat = std::make_shared<Matrix>(A);
  return [pinv, mat](const Vector& v) -> Vector { return v - (*pinv) * ((*mat) * v); };
}

}  // namespace bp
