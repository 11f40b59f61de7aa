#include "ergo/regression.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "ergo/errors.hpp"

namespace ergo {

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  if (x.size() != y.size()) throw FitError("fit_line: x and y sizes differ");
  if (!weights.empty() && weights.size() != x.size()) throw FitError("fit_line: weight size mismatch");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) throw FitError("fit_line: need at least two points");

  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    rhs[i] = y[static_cast<std::size_t>(i)];
    if (!weights.empty()) w[i] = weights[static_cast<std::size_t>(i)];
    if (!(w[i] > 0)) throw FitError("fit_line: weights must be positive");
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd A = sw.asDiagonal() * design;
  const Eigen::VectorXd b = sw.asDiagonal() * rhs;
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(b);

  LineFit fit;
  fit.intercept = beta[0];
  fit.slope = beta[1];
  const Eigen::VectorXd resid = b - A * beta;
  const double wmean = (w.cwiseProduct(rhs)).sum() / w.sum();
  const double ss_tot = (w.array() * (rhs.array() - wmean).square()).sum();
  const double ss_res = resid.squaredNorm();
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    const double sigma2 = ss_res / static_cast<double>(n - 2);
    const Eigen::Matrix2d cov = (A.transpose() * A).inverse() * sigma2;
    fit.slope_se = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

}  // namespace ergo
