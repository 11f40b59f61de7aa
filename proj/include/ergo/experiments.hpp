#pragma once

// Monte Carlo rate experiments on LSV trajectories: moment scaling of the
// empirical-process statistics, deviation tails, and tail-index checks.  The
// constants of the limit theorems are unknown, so every check is on an
// exponent.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergo/cdf.hpp"
#include "ergo/regression.hpp"

namespace ergo {

enum class Statistic { max_d_kq, d_nq, w1, birkhoff_max };

std::string to_string(Statistic s);
Statistic statistic_from_string(const std::string& name);

struct ExperimentConfig {
  double gamma = 0.25;
  double q = 2;
  double p = 2;
  std::vector<std::size_t> n_grid{256, 512, 1024, 2048, 4096, 8192, 16384};
  std::size_t replicas = 200;
  std::size_t burn_in = 10000;
  std::uint64_t master_seed = 1;
  Statistic statistic = Statistic::max_d_kq;
  std::size_t ulam_m = 16384;
  int threads = 0;
};

void validate(const ExperimentConfig& config);

// p_gamma = 2(1 - gamma)/gamma.
double p_gamma(double gamma);

// Hoelder-1/2 observable used for Birkhoff sums: sqrt(max(0, 1 - 4x)).
double birkhoff_observable(double x);

// Per replica and per n (prefix of one trajectory of length max(n_grid)).
struct ReplicaTable {
  double gamma = 0;
  double q = 2;
  std::vector<std::size_t> n_grid;
  std::size_t replicas = 0;
  // Row-major [replica][n index].
  std::vector<double> d_nq, max_d_kq, w1, max_birkhoff;

  double at(const std::vector<double>& column, std::size_t replica, std::size_t j) const {
    return column[replica * n_grid.size() + j];
  }
  const std::vector<double>& column(Statistic s) const;
};

// Birkhoff sums are filled only when config.statistic == birkhoff_max.
ReplicaTable simulate_statistics(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                                 double nu_f = 0);

struct ScalingRow {
  std::size_t n = 0;
  double mean = 0;
  double p_moment = 0;  // (mean of |stat|^p)^{1/p}
  double q10 = 0, q25 = 0, median = 0, q75 = 0, q90 = 0;
};

struct ExperimentResult {
  std::string kind;
  Statistic statistic = Statistic::max_d_kq;
  double gamma = 0, q = 2, p = 2;
  std::vector<ScalingRow> rows;
  LineFit fit;
  double ci_low = 0, ci_high = 0;  // 95% bootstrap over replicas
  double target_slope = 0;
  double tolerance = 0;
  bool log_n_log_n = false;  // regressor log(n log n) instead of log n
  bool pass = false;
};

// Target exponent of ||stat||_p against n from the rate theorems:
// 1/2 for gamma < 1/2 with p <= p_gamma, gamma against n log n for p = 1/gamma,
// (gamma p + gamma - 1)/(gamma p) for p > 1/gamma and gamma > 1/2.
struct ScalingTarget {
  double slope = 0.5;
  bool log_n_log_n = false;
};
ScalingTarget scaling_target(double gamma, double p);

// log ||stat||_p vs log n (or log(n log n)), slope within tolerance of the target.
ExperimentResult scaling_from_table(const ReplicaTable& table, Statistic statistic, double p,
                                    ScalingTarget target, double tolerance,
                                    std::uint64_t bootstrap_seed, std::size_t bootstrap = 200);
ExperimentResult run_scaling(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                             double tolerance = 0.05);

// log E|W_1|^p vs log n with target -(1 - gamma)/gamma (gamma < 1/2, p = p_gamma).
ExperimentResult wasserstein_from_table(const ReplicaTable& table, double p, double tolerance,
                                        std::uint64_t bootstrap_seed, std::size_t bootstrap = 200);
ExperimentResult run_wasserstein(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                                 double tolerance = 0.3);

struct TailRow {
  double x = 0;
  std::size_t exceedances = 0;
  double tail = 0;
  bool fitted = false;
};

struct DeviationResult {
  double gamma = 0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  Statistic statistic = Statistic::max_d_kq;
  double scale_exponent = 0;  // values divided by n^scale_exponent
  std::vector<TailRow> rows;
  LineFit fit;
  double target_slope = 0;
  double tolerance = 0;
  std::vector<std::string> warnings;
  bool pass = false;
};

// Empirical P(value >= x) over a grid, fit of log tail against log x on the
// rows with tail <= max_tail and at least min_exceedances exceedances.
DeviationResult tail_table(std::span<const double> values, std::span<const double> x_grid,
                           double target_slope, double tolerance, double max_tail = 0.1,
                           std::size_t min_exceedances = 20);

// Log-spaced grid of `points` values between the (1 - hi) and (1 - lo)
// empirical quantiles of `values`.
std::vector<double> quantile_grid(std::span<const double> values, double lo, double hi,
                                  std::size_t points);

// nu(max_k D_{k,q} >= x n^gamma) (or Birkhoff maxima) at n = max(n_grid),
// tail exponent -1/gamma within tolerance.  An empty grid picks one from the
// sample between the 10% and 1% upper quantiles.
DeviationResult deviation_from_table(const ReplicaTable& table, Statistic statistic,
                                     std::span<const double> x_grid, double tolerance = 0.15);
DeviationResult run_deviation(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                              std::span<const double> x_grid, double nu_f = 0,
                              double tolerance = 0.15);

// Upper-tail index 1/H, H = mean of log(X_(i)/X_(k+1)) over the top k = floor(frac N).
double hill_estimator(std::span<const double> values, double top_fraction = 0.1);

struct StableTailResult {
  double gamma = 0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double top_fraction = 0.1;
  double hill_index = 0;
  double target = 0;
  double tolerance = 0.3;
  bool pass = false;
};

// Hill index of D_{n,2}/n^gamma at n = max(n_grid) against 1/gamma.
StableTailResult stable_tail_from_table(const ReplicaTable& table, double tolerance = 0.3,
                                        double top_fraction = 0.1);
StableTailResult stable_tail_check(double gamma, std::size_t n, std::size_t replicas,
                                   std::uint64_t seed, const PiecewiseLinearCdf& F,
                                   double tolerance = 0.3, int threads = 0);

struct BoundaryRow {
  std::size_t n = 0;
  double q25 = 0, q75 = 0, iqr = 0;
};

struct BoundaryResult {
  std::vector<BoundaryRow> rows;
  double low = 0.05, high = 20;
  bool pass = false;
};

// gamma = 1/2: interquartile range of D_{n,2}/sqrt(n log n) inside [low, high] for every n.
BoundaryResult boundary_from_table(const ReplicaTable& table, double low = 0.05, double high = 20);

struct LogLogFit {
  LineFit line;
  double ci_low = 0, ci_high = 0;  // slope +- 1.96 se
};

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights = {});

// Quantile with linear interpolation between order statistics of a sorted sample.
double sorted_quantile(std::span<const double> sorted, double u);

}  // namespace ergo
