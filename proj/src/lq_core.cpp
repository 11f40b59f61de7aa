#include "ergo/lq_core.hpp"

#include <random>
#include <vector>

#include "ergo/rng.hpp"

namespace ergo {

namespace {

using Vec = LqVector<double>;

struct Evaluator {
  const LqSpace<double>& space;
  double p;

  double ratio(const Vec& x, const Vec& u, const Vec& v) const {
    const double nx = norm_q(space, x);
    const double nu = norm_q(space, u);
    const double nv = norm_q(space, v);
    if (nx == 0 || nu == 0 || nv == 0) return 0;
    return std::abs(d2_psi_p(space, p, x, u, v)) / (std::pow(nx, p - 2) * nu * nv);
  }
};

Vec gaussian(std::normal_distribution<double>& normal, SplitMix64& rng, Eigen::Index dim) {
  Vec out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) out[i] = normal(rng);
  return out;
}

// Direction h maximizing D psi(x)(h) for fixed |h|_q: sign(x)|x|^{q-1}.
Vec dual_direction(const Vec& x, double q) {
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = (x[i] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(x[i]), q - 1);
  return out;
}

}  // namespace

SmoothnessReport check_smoothness(const LqSpace<double>& space, double p, int n_samples,
                                  std::uint64_t seed, const SmoothnessOptions& options) {
  require(n_samples >= 1, "check_smoothness: n_samples must be >= 1");
  const double q = space.q();
  const Eigen::Index dim = space.dim();
  const auto constants = smoothness_constants(p, q);
  const Evaluator eval{space, p};

  SmoothnessReport report;
  report.p = p;
  report.q = q;
  report.dim = static_cast<int>(dim);
  report.samples = n_samples;
  report.bound_c = constants.c_p;
  report.bound_c_tilde = constants.c_tilde_p;

  const double tol_tilde = constants.c_tilde_p * (1 + 1e-12);
  const double tol_diag = constants.c_p * (1 + 1e-12);

  auto consider = [&](const Vec& x, const Vec& u, const Vec& v) {
    const double r = eval.ratio(x, u, v);
    if (r > report.max_ratio) {
      report.max_ratio = r;
      report.witness_x = x;
      report.witness_u = u;
      report.witness_v = v;
    }
    if (r > tol_tilde) ++report.violations;
    for (const Vec* d : {&u, &v}) {
      const double rd = eval.ratio(x, *d, *d);
      report.max_diag_ratio = std::max(report.max_diag_ratio, rd);
      if (rd > tol_diag) ++report.violations;
    }
    return r;
  };

  SplitMix64 rng = stream(seed, 0);
  std::normal_distribution<double> normal;

  double best = -1;
  Vec best_x, best_u, best_v;
  for (int s = 0; s < n_samples; ++s) {
    Vec x = gaussian(normal, rng, dim);
    if (norm_q(space, x) == 0) x[0] = 1;
    const Vec u = gaussian(normal, rng, dim);
    const Vec v = gaussian(normal, rng, dim);
    const double r = consider(x, u, v);
    if (r > best) {
      best = r;
      best_x = x;
      best_u = u;
      best_v = v;
    }
  }

  // Structured candidates.
  {
    Vec x = gaussian(normal, rng, dim);
    if (norm_q(space, x) == 0) x[0] = 1;
    report.self_ratio = eval.ratio(x, x, x);
    consider(x, x, x);
    const Vec dual = dual_direction(x, q);
    consider(x, dual, dual);
    consider(x, dual, Vec(-dual));
    consider(x, x, Vec(-x));
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(dim, 8); ++i) {
      const Vec ei = Vec::Unit(dim, i);
      consider(x, ei, ei);
      consider(x, ei, dual);
      consider(ei, ei, ei);
      for (Eigen::Index j = i + 1; j < std::min<Eigen::Index>(dim, 8); ++j) {
        const Vec ej = Vec::Unit(dim, j);
        consider(x, ei, ej);
        consider(Vec(ei + ej), ei, ej);
        consider(Vec(ei + ej), ei, Vec(ei - ej));
      }
    }
    Vec signs(dim);
    for (Eigen::Index i = 0; i < dim; ++i) signs[i] = (rng() & 1) ? 1.0 : -1.0;
    consider(Vec::Ones(dim), signs, signs);
    consider(Vec::Ones(dim), Vec::Ones(dim), signs);
    consider(signs, Vec::Ones(dim), Vec::Ones(dim));
  }

  // Random-walk refinement from the best random triple.
  if (best >= 0) {
    double step = 0.5;
    for (int s = 0; s < options.refine_steps; ++s) {
      const Vec x = best_x + step * gaussian(normal, rng, dim);
      const Vec u = best_u + step * gaussian(normal, rng, dim);
      const Vec v = best_v + step * gaussian(normal, rng, dim);
      if (norm_q(space, x) == 0) continue;
      const double r = consider(x, u, v);
      if (r > best) {
        best = r;
        best_x = x;
        best_u = u;
        best_v = v;
      } else if (s % 100 == 99) {
        step *= 0.7;
      }
    }
  }

  // Analytic vs finite-difference second derivative at points whose
  // coordinates stay away from 0, all vectors normalized to unit q-norm.
  const int fd_samples = std::min(options.fd_samples, n_samples);
  for (int s = 0; s < fd_samples; ++s) {
    Vec x = gaussian(normal, rng, dim);
    for (Eigen::Index i = 0; i < dim; ++i) x[i] += (x[i] >= 0 ? 0.1 : -0.1);
    Vec h = gaussian(normal, rng, dim);
    Vec v = gaussian(normal, rng, dim);
    x /= norm_q(space, x);
    h /= norm_q(space, h);
    v /= norm_q(space, v);
    const double analytic = d2_psi_p(space, p, x, h, v);
    const double fd = finite_diff_d2_richardson(space, p, x, h, v, options.fd_eps);
    report.max_fd_rel_error =
        std::max(report.max_fd_rel_error, std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
  }
  return report;
}

}  // namespace ergo
