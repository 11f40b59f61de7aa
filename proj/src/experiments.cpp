#include "ergo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergo/dynamics.hpp"
#include "ergo/empirical.hpp"
#include "ergo/errors.hpp"
#include "ergo/parallel.hpp"
#include "ergo/rng.hpp"

namespace ergo {

namespace {

double abs_pow(double v, double p) {
  const double a = std::abs(v);
  if (p == 1) return a;
  if (p == 2) return a * a;
  return std::pow(a, p);
}

double moment(std::span<const double> v, double p) {
  double s = 0;
  for (double x : v) s += abs_pow(x, p);
  return s / static_cast<double>(v.size());
}

std::vector<double> column_at(const ReplicaTable& t, const std::vector<double>& col, std::size_t j) {
  std::vector<double> out(t.replicas);
  for (std::size_t r = 0; r < t.replicas; ++r) out[r] = t.at(col, r, j);
  return out;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double regressor(std::size_t n, bool log_n_log_n) {
  const double nd = static_cast<double>(n);
  return log_n_log_n ? std::log(nd * std::log(nd)) : std::log(nd);
}

// Slope of log y_j against the regressor, with y_j = summary(replica sample at n_j).
template <typename Summary>
double fitted_slope(const ReplicaTable& t, const std::vector<double>& col,
                    std::span<const std::size_t> replicas, bool log_n_log_n, Summary summary) {
  std::vector<double> x, y;
  std::vector<double> sample(replicas.size());
  for (std::size_t j = 0; j < t.n_grid.size(); ++j) {
    for (std::size_t i = 0; i < replicas.size(); ++i) sample[i] = t.at(col, replicas[i], j);
    const double value = summary(sample);
    if (!(value > 0)) throw FitError("fit: nonpositive summary at n = " + std::to_string(t.n_grid[j]));
    x.push_back(regressor(t.n_grid[j], log_n_log_n));
    y.push_back(std::log(value));
  }
  return fit_line(x, y).slope;
}

template <typename Summary>
ExperimentResult moment_fit(const ReplicaTable& t, Statistic statistic, double p,
                            ScalingTarget target, double tolerance, std::uint64_t seed,
                            std::size_t bootstrap, Summary summary) {
  require(t.n_grid.size() >= 3, "fit: need at least 3 n-grid points");
  const auto& col = t.column(statistic);
  ExperimentResult res;
  res.statistic = statistic;
  res.gamma = t.gamma;
  res.q = t.q;
  res.p = p;
  res.target_slope = target.slope;
  res.log_n_log_n = target.log_n_log_n;
  res.tolerance = tolerance;

  std::vector<double> x, y;
  for (std::size_t j = 0; j < t.n_grid.size(); ++j) {
    const auto s = sorted(column_at(t, col, j));
    ScalingRow row;
    row.n = t.n_grid[j];
    row.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    row.p_moment = std::pow(moment(s, p), 1 / p);
    row.q10 = sorted_quantile(s, 0.10);
    row.q25 = sorted_quantile(s, 0.25);
    row.median = sorted_quantile(s, 0.5);
    row.q75 = sorted_quantile(s, 0.75);
    row.q90 = sorted_quantile(s, 0.90);
    res.rows.push_back(row);
    const double value = summary(s);
    if (!(value > 0)) throw FitError("fit: nonpositive summary at n = " + std::to_string(row.n));
    x.push_back(regressor(row.n, target.log_n_log_n));
    y.push_back(std::log(value));
  }
  res.fit = fit_line(x, y);

  std::vector<double> slopes(bootstrap);
  std::vector<std::size_t> pick(t.replicas);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    auto rng = stream(seed, b);
    for (auto& r : pick) r = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(t.replicas));
    slopes[b] = fitted_slope(t, col, pick, target.log_n_log_n, summary);
  }
  if (bootstrap > 0) {
    std::sort(slopes.begin(), slopes.end());
    res.ci_low = std::min(sorted_quantile(slopes, 0.025), res.fit.slope);
    res.ci_high = std::max(sorted_quantile(slopes, 0.975), res.fit.slope);
  } else {
    res.ci_low = res.ci_high = res.fit.slope;
  }
  res.pass = std::abs(res.fit.slope - target.slope) <= tolerance;
  return res;
}

}  // namespace

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::max_d_kq: return "max_d_kq";
    case Statistic::d_nq: return "d_nq";
    case Statistic::w1: return "w1";
    case Statistic::birkhoff_max: return "birkhoff_max";
  }
  return "unknown";
}

Statistic statistic_from_string(const std::string& name) {
  for (auto s : {Statistic::max_d_kq, Statistic::d_nq, Statistic::w1, Statistic::birkhoff_max})
    if (to_string(s) == name) return s;
  throw ContractViolation("unknown statistic '" + name +
                          "' (expected max_d_kq, d_nq, w1 or birkhoff_max)");
}

void validate(const ExperimentConfig& c) {
  require(c.gamma > 0 && c.gamma < 1, "gamma must lie in (0,1)");
  require(c.q >= 1, "q must be >= 1");
  require(c.p >= 1, "p must be >= 1");
  require(!c.n_grid.empty(), "n_grid must be nonempty");
  require(c.n_grid.front() >= 2, "n_grid entries must be >= 2");
  for (std::size_t i = 1; i < c.n_grid.size(); ++i)
    require(c.n_grid[i] > c.n_grid[i - 1], "n_grid must be strictly increasing");
  require(c.replicas >= 50, "replicas must be >= 50");
  require(c.ulam_m >= 64 && c.ulam_m % 8 == 0, "ulam_m must be a multiple of 8, >= 64");
}

double p_gamma(double gamma) {
  require(gamma > 0 && gamma < 1, "p_gamma: gamma must lie in (0,1)");
  return 2 * (1 - gamma) / gamma;
}

double birkhoff_observable(double x) { return std::sqrt(std::max(0.0, 1.0 - 4.0 * x)); }

const std::vector<double>& ReplicaTable::column(Statistic s) const {
  switch (s) {
    case Statistic::max_d_kq: return max_d_kq;
    case Statistic::d_nq: return d_nq;
    case Statistic::w1: return w1;
    case Statistic::birkhoff_max:
      if (max_birkhoff.empty()) throw ContractViolation("table has no Birkhoff sums");
      return max_birkhoff;
  }
  throw ContractViolation("unknown statistic");
}

ReplicaTable simulate_statistics(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                                 double nu_f) {
  validate(config);
  ReplicaTable t;
  t.gamma = config.gamma;
  t.q = config.q;
  t.n_grid = config.n_grid;
  t.replicas = config.replicas;
  const std::size_t J = t.n_grid.size();
  const std::size_t N = t.n_grid.back();
  const bool birkhoff = config.statistic == Statistic::birkhoff_max;
  t.d_nq.assign(t.replicas * J, 0.0);
  t.max_d_kq.assign(t.replicas * J, 0.0);
  t.w1.assign(t.replicas * J, 0.0);
  if (birkhoff) t.max_birkhoff.assign(t.replicas * J, 0.0);
  const LsvMap map(config.gamma);

  parallel_for(t.replicas, config.threads, [&](std::size_t r) {
    auto rng = stream(config.master_seed, r);
    std::vector<double> points(N);
    iterate_into(map, uniform01(rng), config.burn_in, points);
    const std::size_t base = r * J;
    if (config.q == 2) {
      const auto path = d_k2_path(points, F);
      double best = 0;
      std::size_t k = 0;
      for (std::size_t j = 0; j < J; ++j) {
        for (; k < t.n_grid[j]; ++k) best = std::max(best, path[k]);
        t.d_nq[base + j] = path[t.n_grid[j] - 1];
        t.max_d_kq[base + j] = best;
      }
    } else {
      const auto cps = d_kq_checkpoints(points, F, config.q, t.n_grid, default_stride(N));
      for (std::size_t j = 0; j < J; ++j) {
        t.d_nq[base + j] = cps[j].d_kq;
        t.max_d_kq[base + j] = cps[j].running_max;
      }
    }
    for (std::size_t j = 0; j < J; ++j)
      t.w1[base + j] = wasserstein1(std::span<const double>(points).first(t.n_grid[j]), F);
    if (birkhoff) {
      const auto path = birkhoff_max_path(points, birkhoff_observable, nu_f);
      for (std::size_t j = 0; j < J; ++j) t.max_birkhoff[base + j] = path[t.n_grid[j] - 1];
    }
  });
  return t;
}

ScalingTarget scaling_target(double gamma, double p) {
  require(gamma > 0 && gamma < 1, "scaling_target: gamma must lie in (0,1)");
  require(p >= 1, "scaling_target: p must be >= 1");
  const double above = (gamma * p + gamma - 1) / (gamma * p);
  if (gamma < 0.5) return p <= p_gamma(gamma) ? ScalingTarget{0.5, false} : ScalingTarget{above, false};
  const double critical = 1 / gamma;
  if (std::abs(p - critical) <= 1e-12) return {gamma, true};
  if (p < critical) return {gamma, false};
  return {above, false};
}

ExperimentResult scaling_from_table(const ReplicaTable& table, Statistic statistic, double p,
                                    ScalingTarget target, double tolerance,
                                    std::uint64_t bootstrap_seed, std::size_t bootstrap) {
  auto res = moment_fit(table, statistic, p, target, tolerance, bootstrap_seed, bootstrap,
                        [p](std::span<const double> s) { return std::pow(moment(s, p), 1 / p); });
  res.kind = "scaling";
  return res;
}

ExperimentResult run_scaling(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                             double tolerance) {
  const auto table = simulate_statistics(config, F);
  return scaling_from_table(table, config.statistic, config.p, scaling_target(config.gamma, config.p),
                            tolerance, config.master_seed ^ 0xB0075B0075ULL);
}

ExperimentResult wasserstein_from_table(const ReplicaTable& table, double p, double tolerance,
                                        std::uint64_t bootstrap_seed, std::size_t bootstrap) {
  require(table.gamma < 0.5, "wasserstein: moment rate needs gamma < 1/2");
  const ScalingTarget target{-(1 - table.gamma) / table.gamma, false};
  auto res = moment_fit(table, Statistic::w1, p, target, tolerance, bootstrap_seed, bootstrap,
                        [p](std::span<const double> s) { return moment(s, p); });
  res.kind = "wasserstein";
  return res;
}

ExperimentResult run_wasserstein(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                                 double tolerance) {
  auto c = config;
  c.statistic = Statistic::w1;
  const auto table = simulate_statistics(c, F);
  return wasserstein_from_table(table, config.p, tolerance, config.master_seed ^ 0xB0075B0075ULL);
}

double sorted_quantile(std::span<const double> s, double u) {
  require(!s.empty(), "quantile: empty sample");
  require(u >= 0 && u <= 1, "quantile: level outside [0,1]");
  const double pos = u * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

std::vector<double> quantile_grid(std::span<const double> values, double lo, double hi,
                                  std::size_t points) {
  require(points >= 2, "quantile_grid: need at least 2 points");
  require(lo > 0 && lo < hi && hi < 1, "quantile_grid: need 0 < lo < hi < 1");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double a = sorted_quantile(s, 1 - hi);
  const double b = sorted_quantile(s, 1 - lo);
  require(a > 0 && b > a, "quantile_grid: degenerate sample");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

DeviationResult tail_table(std::span<const double> values, std::span<const double> x_grid,
                           double target_slope, double tolerance, double max_tail,
                           std::size_t min_exceedances) {
  require(!values.empty(), "tail_table: empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  DeviationResult res;
  res.replicas = s.size();
  res.target_slope = target_slope;
  res.tolerance = tolerance;
  std::vector<double> lx, ly, w;
  for (double x : x_grid) {
    require(x > 0, "tail_table: x must be positive");
    TailRow row;
    row.x = x;
    row.exceedances = static_cast<std::size_t>(s.end() - std::lower_bound(s.begin(), s.end(), x));
    row.tail = static_cast<double>(row.exceedances) / static_cast<double>(s.size());
    row.fitted = row.tail <= max_tail && row.exceedances >= min_exceedances;
    if (row.fitted) {
      lx.push_back(std::log(x));
      ly.push_back(std::log(row.tail));
      w.push_back(static_cast<double>(row.exceedances));
    }
    res.rows.push_back(row);
  }
  if (!x_grid.empty() && res.rows.back().exceedances < min_exceedances)
    res.warnings.push_back("fewer than " + std::to_string(min_exceedances) +
                           " exceedances at the largest x; widen the grid or add replicas");
  if (lx.size() < 3) {
    res.warnings.push_back("fewer than 3 grid points in the fitted tail range");
    res.pass = false;
    return res;
  }
  res.fit = fit_line(lx, ly, w);
  res.pass = std::abs(res.fit.slope - target_slope) <= tolerance;
  return res;
}

DeviationResult deviation_from_table(const ReplicaTable& table, Statistic statistic,
                                     std::span<const double> x_grid, double tolerance) {
  require(table.gamma > 0.5 && table.gamma < 1, "deviation: gamma must lie in (1/2,1)");
  const std::size_t j = table.n_grid.size() - 1;
  const std::size_t n = table.n_grid[j];
  auto values = column_at(table, table.column(statistic), j);
  const double scale = std::pow(static_cast<double>(n), table.gamma);
  for (auto& v : values) v /= scale;
  std::vector<double> grid(x_grid.begin(), x_grid.end());
  if (grid.empty()) grid = quantile_grid(values, 0.01, 0.1, 12);
  auto res = tail_table(values, grid, -1 / table.gamma, tolerance);
  res.gamma = table.gamma;
  res.n = n;
  res.statistic = statistic;
  res.scale_exponent = table.gamma;
  return res;
}

DeviationResult run_deviation(const ExperimentConfig& config, const PiecewiseLinearCdf& F,
                              std::span<const double> x_grid, double nu_f, double tolerance) {
  const auto table = simulate_statistics(config, F, nu_f);
  return deviation_from_table(table, config.statistic, x_grid, tolerance);
}

double hill_estimator(std::span<const double> values, double top_fraction) {
  require(top_fraction > 0 && top_fraction < 1, "hill_estimator: fraction must lie in (0,1)");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::floor(top_fraction * static_cast<double>(s.size())));
  require(k >= 2 && k < s.size(), "hill_estimator: too few order statistics");
  const double threshold = s[k];
  if (!(threshold > 0)) throw FitError("hill_estimator: threshold order statistic is not positive");
  double h = 0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(s[i] / threshold);
  h /= static_cast<double>(k);
  if (!(h > 0)) throw FitError("hill_estimator: degenerate sample");
  return 1 / h;
}

StableTailResult stable_tail_from_table(const ReplicaTable& table, double tolerance,
                                        double top_fraction) {
  require(table.q == 2, "stable_tail: needs q = 2");
  const std::size_t j = table.n_grid.size() - 1;
  StableTailResult res;
  res.gamma = table.gamma;
  res.n = table.n_grid[j];
  res.replicas = table.replicas;
  res.top_fraction = top_fraction;
  res.tolerance = tolerance;
  res.target = 1 / table.gamma;
  auto values = column_at(table, table.d_nq, j);
  const double scale = std::pow(static_cast<double>(res.n), table.gamma);
  for (auto& v : values) v /= scale;
  res.hill_index = hill_estimator(values, top_fraction);
  res.pass = std::abs(res.hill_index - res.target) <= tolerance;
  return res;
}

StableTailResult stable_tail_check(double gamma, std::size_t n, std::size_t replicas,
                                   std::uint64_t seed, const PiecewiseLinearCdf& F,
                                   double tolerance, int threads) {
  require(gamma > 0.5 && gamma < 1, "stable_tail_check: gamma must lie in (1/2,1)");
  ExperimentConfig c;
  c.gamma = gamma;
  c.q = 2;
  c.n_grid = {n};
  c.replicas = replicas;
  c.master_seed = seed;
  c.threads = threads;
  return stable_tail_from_table(simulate_statistics(c, F), tolerance);
}

BoundaryResult boundary_from_table(const ReplicaTable& table, double low, double high) {
  require(table.q == 2, "boundary: needs q = 2");
  BoundaryResult res;
  res.low = low;
  res.high = high;
  res.pass = true;
  for (std::size_t j = 0; j < table.n_grid.size(); ++j) {
    const double nd = static_cast<double>(table.n_grid[j]);
    auto values = column_at(table, table.d_nq, j);
    for (auto& v : values) v /= std::sqrt(nd * std::log(nd));
    std::sort(values.begin(), values.end());
    BoundaryRow row;
    row.n = table.n_grid[j];
    row.q25 = sorted_quantile(values, 0.25);
    row.q75 = sorted_quantile(values, 0.75);
    row.iqr = row.q75 - row.q25;
    res.pass = res.pass && row.iqr >= low && row.iqr <= high;
    res.rows.push_back(row);
  }
  return res;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weights) {
  require(x.size() == y.size(), "fit_loglog: x and y lengths differ");
  if (x.size() < 3) throw FitError("fit_loglog: need at least 3 points");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw FitError("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  LogLogFit out;
  out.line = fit_line(lx, ly, weights);
  out.ci_low = out.line.slope - 1.96 * out.line.slope_se;
  out.ci_high = out.line.slope + 1.96 * out.line.slope_se;
  return out;
}

}  // namespace ergo
