#include "ergo/dynamics.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>

#include "ergo/errors.hpp"
#include "ergo/parallel.hpp"
#include "ergo/regression.hpp"
#include "ergo/rng.hpp"

namespace ergo {

LsvMap::LsvMap(double gamma) : gamma_(gamma) {
  require(gamma > 0 && gamma < 1, "LsvMap: gamma must lie in (0,1)");
}

double LsvMap::apply(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("lsv_map: x outside [0,1]");
  return (*this)(x);
}

double LsvMap::preimage_left(double y) const {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("preimage_left: y outside [0,1]");
  if (y == 0.0) return 0.0;
  // x <= y and x^gamma <= y^gamma bracket the root in [y/(1+(2y)^gamma), min(y, 1/2)].
  double lo = y / (1.0 + std::pow(2.0 * y, gamma_));
  double hi = std::min(y, 0.5);
  auto branch = [this](double x) { return x * (1.0 + std::pow(2.0 * x, gamma_)); };
  // Bisect to adjacent doubles: relative precision even for x ~ 1e-14.
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (branch(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(branch(lo) - y) <= std::abs(branch(hi) - y) ? lo : hi;
}

double lsv_map(double gamma, double x) { return LsvMap(gamma).apply(x); }

double preimage_left(double gamma, double y) { return LsvMap(gamma).preimage_left(y); }

void iterate_into(const LsvMap& map, double x0, std::size_t burn_in, std::span<double> out) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("iterate: x0 outside [0,1]");
  double x = x0;
  for (std::size_t i = 0; i < burn_in; ++i) x = map(x);
  for (double& p : out) {
    x = map(x);
    p = x;
  }
}

Trajectory iterate(const LsvMap& map, std::size_t n, std::size_t burn_in,
                   std::optional<double> x0, std::uint64_t seed) {
  require(n >= 1, "iterate: n must be >= 1");
  Trajectory t;
  t.gamma = map.gamma();
  t.seed = seed;
  t.burn_in = burn_in;
  if (x0) {
    t.x0 = *x0;
  } else {
    SplitMix64 rng = stream(seed, 0);
    t.x0 = uniform01(rng);
  }
  t.points.resize(n);
  iterate_into(map, t.x0, burn_in, t.points);
  return t;
}

TowerPartition build_tower(double gamma, std::size_t K) {
  require(K >= 2, "build_tower: K must be >= 2");
  const LsvMap map(gamma);
  TowerPartition tower;
  tower.gamma = gamma;
  tower.K = K;
  tower.x.resize(K + 1);
  tower.x[0] = 1.0;
  for (std::size_t k = 1; k <= K; ++k) tower.x[k] = map.preimage_left(tower.x[k - 1]);
  const double nan = std::nan("");
  tower.y.assign(K + 2, nan);
  tower.mass.assign(K + 1, nan);
  tower.tail.resize(K + 1);
  for (std::size_t k = 1; k <= K + 1; ++k) tower.y[k] = 0.5 * (tower.x[k - 1] + 1.0);
  for (std::size_t k = 1; k <= K; ++k) tower.mass[k] = 0.5 * (tower.x[k - 1] - tower.x[k]);
  for (std::size_t k = 0; k <= K; ++k) tower.tail[k] = 0.5 * tower.x[k];
  return tower;
}

std::vector<double> ulam_grid(std::size_t m) {
  require(m >= 64, "ulam: m must be >= 64");
  const std::size_t n_geo = m / 8;
  const std::size_t n_rest = m - n_geo;
  const auto n_left = static_cast<std::size_t>(std::llround(static_cast<double>(n_rest) * 31.0 / 63.0));
  const std::size_t n_right = n_rest - n_left;
  constexpr double edge = 1.0 / 64.0;
  constexpr double finest = 1e-12;

  std::vector<double> nodes;
  nodes.reserve(m + 1);
  nodes.push_back(0.0);
  const double ratio = std::pow(finest / edge, 1.0 / static_cast<double>(n_geo - 1));
  for (std::size_t j = 1; j < n_geo; ++j)
    nodes.push_back(edge * std::pow(ratio, static_cast<double>(n_geo - j)));
  nodes.push_back(edge);
  for (std::size_t j = 1; j <= n_left; ++j)
    nodes.push_back(edge + (0.5 - edge) * static_cast<double>(j) / static_cast<double>(n_left));
  nodes.back() = 0.5;
  for (std::size_t j = 1; j <= n_right; ++j)
    nodes.push_back(0.5 + 0.5 * static_cast<double>(j) / static_cast<double>(n_right));
  nodes.back() = 1.0;
  return nodes;
}

UlamModel build_ulam(double gamma, std::size_t m, std::size_t max_iterations) {
  const LsvMap map(gamma);
  UlamModel model;
  model.gamma = gamma;
  model.m = m;
  model.nodes = ulam_grid(m);
  const auto& nodes = model.nodes;

  // Left-branch preimages of every node; right-branch preimages are (node + 1)/2,
  // handled as offsets from 1/2 to keep tiny target cells exact.
  std::vector<double> left_pre(m + 1);
  for (std::size_t j = 0; j <= m; ++j) left_pre[j] = map.preimage_left(nodes[j]);
  left_pre[m] = 0.5;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(8 * m);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    row.clear();
    double total = 0;
    if (b <= 0.5) {
      auto it = std::upper_bound(left_pre.begin(), left_pre.end(), a);
      std::size_t j = it == left_pre.begin() ? 0 : static_cast<std::size_t>(it - left_pre.begin()) - 1;
      for (; j < m && left_pre[j] < b; ++j) {
        const double overlap = std::min(b, left_pre[j + 1]) - std::max(a, left_pre[j]);
        if (overlap > 0) {
          row.emplace_back(j, overlap);
          total += overlap;
        }
      }
    } else {
      const double ao = a - 0.5;
      const double bo = b - 0.5;
      std::size_t j = 0;
      {
        // first target cell whose half-offset interval ends after ao
        std::size_t lo = 0, hi = m;
        while (lo < hi) {
          const std::size_t mid = (lo + hi) / 2;
          if (0.5 * nodes[mid + 1] <= ao)
            lo = mid + 1;
          else
            hi = mid;
        }
        j = lo;
      }
      for (; j < m && 0.5 * nodes[j] < bo; ++j) {
        const double overlap = std::min(bo, 0.5 * nodes[j + 1]) - std::max(ao, 0.5 * nodes[j]);
        if (overlap > 0) {
          row.emplace_back(j, overlap);
          total += overlap;
        }
      }
    }
    if (!(total > 0)) throw ConvergenceError("build_ulam: empty transition row " + std::to_string(i));
    for (const auto& [j, w] : row)
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w / total);
  }
  model.P.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  model.P.setFromTriplets(triplets.begin(), triplets.end());
  model.P.makeCompressed();

  // Direct solve of h P = h with h_ref = 1 on the reduced system (the last
  // cell is the reference), then power-iteration polish.
  const Eigen::Index mm = static_cast<Eigen::Index>(m);
  const Eigen::Index ref = mm - 1;
  std::vector<Eigen::Triplet<double>> reduced;
  reduced.reserve(triplets.size() + m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mm - 1);
  for (Eigen::Index i = 0; i < mm; ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.P, i); it; ++it) {
      const Eigen::Index j = it.col();
      if (j == ref) continue;  // equation for the reference cell is dropped
      if (i == ref)
        rhs[j] -= it.value();
      else
        reduced.emplace_back(static_cast<int>(j), static_cast<int>(i), it.value());
    }
  }
  for (Eigen::Index j = 0; j < ref; ++j) reduced.emplace_back(static_cast<int>(j), static_cast<int>(j), -1.0);
  Eigen::SparseMatrix<double> A(mm - 1, mm - 1);
  A.setFromTriplets(reduced.begin(), reduced.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw ConvergenceError("build_ulam: sparse factorization failed");
  const Eigen::VectorXd partial = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw ConvergenceError("build_ulam: sparse solve failed");

  Eigen::VectorXd h(mm);
  h.head(mm - 1) = partial;
  h[ref] = 1.0;
  h = h.cwiseMax(0.0);
  h /= h.sum();

  auto residual = [&](const Eigen::VectorXd& v) {
    return (Eigen::VectorXd(model.P.transpose() * v) - v).cwiseAbs().maxCoeff();
  };
  double res = residual(h);
  std::size_t iterations = 0;
  while (res > 1e-12 && iterations < max_iterations) {
    h = model.P.transpose() * h;
    h /= h.sum();
    res = residual(h);
    ++iterations;
  }
  if (res > 1e-12)
    throw ConvergenceError("build_ulam: stationary residual " + std::to_string(res) + " after " +
                           std::to_string(iterations) + " iterations");
  model.stationary = h;
  model.residual = res;
  model.power_iterations = iterations;

  std::vector<double> values(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) values[i + 1] = values[i] + h[static_cast<Eigen::Index>(i)];
  for (double& v : values) v = std::min(v, 1.0);
  values.back() = 1.0;
  model.cdf = PiecewiseLinearCdf(nodes, std::move(values));
  return model;
}

double invariant_cdf(const UlamModel& model, double t) { return model.cdf(t); }

double invariant_expectation(const UlamModel& model, const std::function<double(double)>& f) {
  static constexpr double abscissa[4] = {-0.8611363115940526, -0.3399810435848563,
                                         0.3399810435848563, 0.8611363115940526};
  static constexpr double weight[4] = {0.3478548451374538, 0.6521451548625461,
                                       0.6521451548625461, 0.3478548451374538};
  double total = 0;
  for (std::size_t i = 0; i < model.m; ++i) {
    const double a = model.nodes[i];
    const double b = model.nodes[i + 1];
    double mean = 0;
    for (int g = 0; g < 4; ++g) mean += 0.5 * weight[g] * f(0.5 * (a + b) + 0.5 * (b - a) * abscissa[g]);
    total += model.stationary[static_cast<Eigen::Index>(i)] * mean;
  }
  return total;
}

CorrelationDecay correlation_decay(double gamma, const std::function<double(double)>& f,
                                   const std::function<double(double)>& g,
                                   std::span<const std::size_t> lags, std::size_t replicas,
                                   std::size_t length, std::uint64_t seed, std::size_t burn_in,
                                   int threads) {
  require(!lags.empty(), "correlation_decay: lags must be nonempty");
  require(std::is_sorted(lags.begin(), lags.end()) && lags.front() >= 1,
          "correlation_decay: lags must be increasing and >= 1");
  require(replicas >= 2, "correlation_decay: need >= 2 replicas");
  require(length >= 1, "correlation_decay: length must be >= 1");
  const LsvMap map(gamma);
  const std::size_t max_lag = lags.back();
  const std::size_t L = length;
  std::vector<std::vector<double>> per_replica(replicas, std::vector<double>(lags.size()));
  std::vector<double> mean_fg(replicas);

  parallel_for(replicas, threads, [&](std::size_t r) {
    SplitMix64 rng = stream(seed, r);
    std::vector<double> orbit(L + max_lag);
    iterate_into(map, uniform01(rng), burn_in, orbit);
    std::vector<double> fx(L + max_lag), gx(L + max_lag);
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      fx[i] = f(orbit[i]);
      gx[i] = g(orbit[i]);
    }
    double sum_f = 0;
    for (std::size_t i = 0; i < L; ++i) sum_f += fx[i];
    const double mf = sum_f / static_cast<double>(L);
    double sum_g = 0;
    for (std::size_t i = 0; i < L; ++i) sum_g += gx[i];
    mean_fg[r] = std::abs(mf * sum_g / static_cast<double>(L));
    for (std::size_t li = 0; li < lags.size(); ++li) {
      const std::size_t lag = lags[li];
      if (li > 0) {
        const std::size_t prev = lags[li - 1];
        for (std::size_t i = prev; i < lag; ++i) sum_g += gx[L + i] - gx[i];
      } else {
        for (std::size_t i = 0; i < lag; ++i) sum_g += gx[L + i] - gx[i];
      }
      double cross = 0;
      for (std::size_t i = 0; i < L; ++i) cross += fx[i] * gx[i + lag];
      per_replica[r][li] = cross / static_cast<double>(L) - mf * sum_g / static_cast<double>(L);
    }
  });

  CorrelationDecay out;
  out.lags.assign(lags.begin(), lags.end());
  double scale = 0;
  for (double v : mean_fg) scale += v / static_cast<double>(replicas);
  const double floor = 1e-12 * std::max(1.0, scale);
  const double R = static_cast<double>(replicas);
  std::vector<double> xs, ys;
  for (std::size_t li = 0; li < lags.size(); ++li) {
    double mean = 0;
    for (std::size_t r = 0; r < replicas; ++r) mean += per_replica[r][li];
    mean /= R;
    double var = 0;
    for (std::size_t r = 0; r < replicas; ++r) var += (per_replica[r][li] - mean) * (per_replica[r][li] - mean);
    var /= (R - 1);
    const double se = std::sqrt(var / R);
    out.covariance.push_back(mean);
    out.std_error.push_back(se);
    if (std::abs(mean) > std::max(3 * se, floor)) {
      out.fitted.push_back(li);
      xs.push_back(std::log(static_cast<double>(lags[li])));
      ys.push_back(std::log(std::abs(mean)));
    }
  }
  if (xs.size() < 3)
    throw FitError("correlation_decay: fewer than three lags with covariance above noise");
  const LineFit fit = fit_line(xs, ys);
  out.slope = fit.slope;
  out.slope_se = fit.slope_se;
  return out;
}

}  // namespace ergo
