#include "ergo/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ergo/errors.hpp"

namespace ergo {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_tail_args(double q, double b, std::size_t n, double x) {
  require(q >= 2, "tail bound: q must be >= 2");
  require(b > 0, "tail bound: b must be > 0");
  require(n >= 1, "tail bound: n must be >= 1");
  require(x > 0, "tail bound: x must be > 0");
}

// Shared shape of the two corollaries: scale2 = b^2 (q-1) n (times 2 for the
// general case) and expo = x^2 / (2 e b^2 n) (times 1/2 for the general case).
TailBound three_regime(double q, double scale2, double x, double expo) {
  const double t1 = std::sqrt(scale2);
  const double t2 = std::sqrt(std::numbers::e * scale2);
  TailBound out;
  if (x < t1) {
    out.raw = 1;
    out.regime = TailRegime::trivial;
  } else if (x < t2) {
    out.raw = std::pow(scale2 / (x * x), q / 2);
    out.regime = TailRegime::polynomial;
  } else {
    out.raw = std::exp(-0.5 - expo);
    out.regime = TailRegime::exponential;
  }
  out.value = clamp01(out.raw);
  return out;
}

}  // namespace

ThetaSequence::ThetaSequence(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    require(values_[k] >= 0 && std::isfinite(values_[k]), "ThetaSequence: entries must be >= 0");
    if (k > 0)
      require(values_[k] <= values_[k - 1] * (1 + 1e-12) + 1e-300,
              "ThetaSequence: must be nonincreasing");
  }
}

std::string to_string(TailRegime regime) {
  switch (regime) {
    case TailRegime::trivial: return "trivial";
    case TailRegime::polynomial: return "polynomial";
    case TailRegime::exponential: return "exponential";
  }
  return "unknown";
}

double mz_constant_K(double p, double c_tilde_p) {
  require(p >= 2, "mz_constant_K: p must be >= 2");
  require(c_tilde_p > 0, "mz_constant_K: c_tilde_p must be > 0");
  return std::sqrt(2.0 / p) * std::sqrt(std::max(c_tilde_p, p / 2));
}

double mz_bound(double p, double c_tilde_p, std::span<const double> b) {
  const double K = mz_constant_K(p, c_tilde_p);
  double sum = 0;
  for (double bi : b) {
    require(bi >= 0, "mz_bound: b entries must be >= 0");
    sum += bi;
  }
  if (sum == 0) return 0;
  return std::pow(K, p) * std::pow(sum, p / 2);
}

double mz_max_constant(double p, double K) {
  require(p >= 2, "mz_max_constant: p must be >= 2");
  return 0.5 * std::pow(2 * p * K / (p - 1), p) + std::pow(2.0, 3 * p - 4) * std::pow(3.0, p) * p;
}

double mz_max_bound(double p, double K, double M, std::size_t n, const ThetaSequence& theta) {
  require(M > 0, "mz_max_bound: M must be > 0");
  require(theta.size() >= n, "mz_max_bound: theta needs n entries");
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += std::pow(theta[k], 2 / p);
  if (sum == 0) return 0;
  return mz_max_constant(p, K) * std::pow(M, p - 1) * std::pow(static_cast<double>(n), p / 2) *
         std::pow(sum, p / 2);
}

double martingale_mz_bound(double p, double c_p, std::span<const double> increment_norms) {
  require(p >= 2, "martingale_mz_bound: p must be >= 2");
  require(c_p > 0, "martingale_mz_bound: c_p must be > 0");
  double sum = 0;
  for (double d : increment_norms) {
    require(d >= 0, "martingale_mz_bound: norms must be >= 0");
    sum += d * d;
  }
  if (sum == 0) return 0;
  return std::pow(c_p / p, p / 2) * std::pow(sum, p / 2);
}

TailBound hoeffding_tail(double q, double b, std::size_t n, double x) {
  check_tail_args(q, b, n, x);
  const double nn = static_cast<double>(n);
  return three_regime(q, b * b * (q - 1) * nn, x, x * x / (2 * std::numbers::e * b * b * nn));
}

double pinelis94_tail(double q, double b, std::size_t n, double x) {
  require(q >= 2 && b > 0 && n >= 1 && x >= 0, "pinelis94_tail: invalid arguments");
  return 2 * std::exp(-x * x / (2 * (q - 1) * b * b * static_cast<double>(n)));
}

TailBound general_tail(double q, double b_n, std::size_t n, double x) {
  check_tail_args(q, b_n, n, x);
  const double nn = static_cast<double>(n);
  return three_regime(q, 2 * b_n * b_n * (q - 1) * nn, x,
                      x * x / (4 * std::numbers::e * b_n * b_n * nn));
}

double rosenthal_delta(double p) {
  require(p > 2, "rosenthal: p must be > 2");
  return std::min(0.5, 1 / (p - 2));
}

double rosenthal_bound(double p, double x0_moment, std::span<const double> cond_s2_norms,
                       std::size_t n) {
  const double delta = rosenthal_delta(p);
  require(cond_s2_norms.size() >= n, "rosenthal_bound: need n conditional norms");
  require(x0_moment >= 0, "rosenthal_bound: x0_moment must be >= 0");
  double sum = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = cond_s2_norms[k - 1];
    require(a >= 0, "rosenthal_bound: norms must be >= 0");
    if (a > 0) sum += std::pow(static_cast<double>(k), -1 - 2 * delta / p) * std::pow(a, delta);
  }
  const double nn = static_cast<double>(n);
  return nn * x0_moment + (sum > 0 ? nn * std::pow(sum, p / (2 * delta)) : 0.0);
}

ClampedBound deviation_bound(std::size_t q_lag, double M, double x, const ThetaSequence& theta,
                             std::size_t n, double c_tilde_2) {
  require(n >= 1 && q_lag >= 1 && q_lag <= n, "deviation_bound: need 1 <= q_lag <= n");
  require(M > 0, "deviation_bound: M must be > 0");
  require(c_tilde_2 > 0, "deviation_bound: c_tilde_2 must be > 0");
  require(x >= static_cast<double>(q_lag) * M, "deviation_bound: requires x >= q_lag * M");
  require(theta.size() >= q_lag + (q_lag < n ? 1 : 0), "deviation_bound: theta too short");
  const double nn = static_cast<double>(n);
  const double K2 = std::max(c_tilde_2, 1.0);
  double sum = 0;
  for (std::size_t k = 0; k < q_lag; ++k) sum += theta[k];
  double raw = 4 * c_tilde_2 * K2 * nn * M / (x * x) * sum;
  if (q_lag < n) raw += nn * theta[q_lag] / x;
  return {clamp01(raw), raw};
}

std::size_t deviation_lag(double M, double x, std::size_t n) {
  require(M > 0 && x > 0 && n >= 1, "deviation_lag: invalid arguments");
  const double lag = std::floor(x / M);
  if (lag < 1) return 1;
  if (lag >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(lag);
}

ClampedBound deviation_bound_auto(double M, double x, const ThetaSequence& theta, std::size_t n,
                                  double c_tilde_2) {
  return deviation_bound(deviation_lag(M, x, n), M, x, theta, n, c_tilde_2);
}

double deviation_moment_bound(double p, double M, const ThetaSequence& theta, std::size_t n,
                              double c_tilde_2) {
  require(p >= 1 && p <= 2 - 1e-6, "deviation_moment_bound: p must lie in [1, 2 - 1e-6]");
  require(M > 0 && c_tilde_2 > 0, "deviation_moment_bound: invalid M or c_tilde_2");
  require(theta.size() >= n, "deviation_moment_bound: theta needs n entries");
  const double K2 = std::max(c_tilde_2, 1.0);
  const double constant =
      std::pow(4.0, p) * p + std::pow(4.0, p + 1) * p * c_tilde_2 * K2 / (2 - p);
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += static_cast<double>(k + 1) * theta[k];
  return constant * std::pow(M, p - 1) * static_cast<double>(n) * sum;
}

double maximal_bound(double p, double sn_moment, double M, const ThetaSequence& theta,
                     std::size_t n) {
  require(p > 1, "maximal_bound: p must be > 1");
  require(n >= 2, "maximal_bound: n must be >= 2");
  require(M > 0 && sn_moment >= 0, "maximal_bound: invalid M or moment");
  require(theta.size() >= n - 1, "maximal_bound: theta needs n-1 entries");
  double sum = 0;
  for (std::size_t k = 0; k + 2 <= n; ++k)
    sum += std::pow(static_cast<double>(k + 1), p - 2) * theta[k];
  return 0.5 * std::pow(2 * p / (p - 1), p) * sn_moment +
         std::pow(2.0, p - 1) * std::pow(3.0, p) * p * std::pow(M, p - 1) *
             static_cast<double>(n) * sum;
}

}  // namespace ergo
