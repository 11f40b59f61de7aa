#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ergo/cdf.hpp"

namespace ergo {

// Liverani-Saussol-Vaienti intermittent map with a neutral fixed point at 0:
//   T(x) = x (1 + (2x)^gamma)  on [0, 1/2),   T(x) = 2x - 1  on [1/2, 1].
class LsvMap {
 public:
  explicit LsvMap(double gamma);

  double gamma() const { return gamma_; }

  // No domain check; x must lie in [0,1].
  double operator()(double x) const {
    return x < 0.5 ? x * (1.0 + std::pow(2.0 * x, gamma_)) : 2.0 * x - 1.0;
  }

  // Domain-checked evaluation.
  double apply(double x) const;

  // Unique x in [0, 1/2] with x (1 + (2x)^gamma) = y.
  double preimage_left(double y) const;

 private:
  double gamma_;
};

double lsv_map(double gamma, double x);
double preimage_left(double gamma, double y);

struct Trajectory {
  double gamma = 0;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  double x0 = 0;
  std::vector<double> points;
};

// Draws x0 uniformly from the seed unless given, discards burn_in iterates and
// returns the next n points (points[0] = T^{burn_in + 1}(x0)).
Trajectory iterate(const LsvMap& map, std::size_t n, std::size_t burn_in,
                   std::optional<double> x0 = std::nullopt, std::uint64_t seed = 0);

// Fills `out` with out.size() iterates after burn-in, starting from x0.
void iterate_into(const LsvMap& map, double x0, std::size_t burn_in, std::span<double> out);

// Return-time partition of Y = (1/2, 1]:
//   x_0 = 1, x_{k+1} = left preimage of x_k,  y_k = (x_{k-1} + 1)/2,
//   Y_k = (y_{k+1}, y_k],  lambda(Y_k) = (x_{k-1} - x_k)/2,
//   tail(k) = lambda(phi_Y > k) = y_{k+1} - 1/2 = x_k / 2.
// Vectors are indexed by k; x, tail have K+1 entries (k = 0..K), y has K+2
// (y[0] unused, NaN), mass has K+1 (mass[0] unused, NaN).
struct TowerPartition {
  double gamma = 0;
  std::size_t K = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> mass;
  std::vector<double> tail;
};

TowerPartition build_tower(double gamma, std::size_t K);

// Ulam discretization of the transfer operator on a grid whose first m/8
// cells are geometric on [0, 1/64] (finest node 1e-12) and the rest uniform on
// [1/64, 1/2] and [1/2, 1].
struct UlamModel {
  double gamma = 0;
  std::size_t m = 0;
  std::vector<double> nodes;  // m + 1 nodes
  Eigen::SparseMatrix<double, Eigen::RowMajor> P;
  Eigen::VectorXd stationary;  // cell masses, sums to 1
  double residual = 0;         // ||h - hP||_inf
  std::size_t power_iterations = 0;
  PiecewiseLinearCdf cdf;
};

std::vector<double> ulam_grid(std::size_t m);

UlamModel build_ulam(double gamma, std::size_t m, std::size_t max_iterations = 1000000);

double invariant_cdf(const UlamModel& model, double t);

// nu(f) under the Ulam density (constant on each cell), by 4-point Gauss-Legendre per cell.
double invariant_expectation(const UlamModel& model, const std::function<double(double)>& f);

struct CorrelationDecay {
  std::vector<std::size_t> lags;
  std::vector<double> covariance;  // mean over replicas of Cov(f, g o T^n)
  std::vector<double> std_error;
  std::vector<std::size_t> fitted;  // indices of lags used in the fit
  double slope = 0;
  double slope_se = 0;
};

// Monte Carlo estimate of |Cov_nu(f, g o T^n)| per lag from `replicas` burned-in
// trajectories of length `length`; fits log|cov| against log n over lags whose
// estimate exceeds 3 standard errors.  Throws FitError when fewer than three
// lags carry signal.
CorrelationDecay correlation_decay(double gamma, const std::function<double(double)>& f,
                                   const std::function<double(double)>& g,
                                   std::span<const std::size_t> lags, std::size_t replicas,
                                   std::size_t length, std::uint64_t seed,
                                   std::size_t burn_in = 10000, int threads = 0);

}  // namespace ergo
