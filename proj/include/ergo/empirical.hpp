#pragma once

// Statistics of the empirical process of a trajectory against a reference
// distribution function F:
//   G_n(t) = sum_k (1{x_k <= t} - F(t)),   D_{n,q} = (int_0^1 |G_n|^q dt)^{1/q}.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ergo/cdf.hpp"

namespace ergo {

double empirical_G(std::span<const double> points, const PiecewiseLinearCdf& F, double t);

// max(4096, 8n).
std::size_t default_grid(std::size_t n);

// Composite midpoint rule on grid_m uniform cells (0 = default_grid(n)).
double d_nq(std::span<const double> points, const PiecewiseLinearCdf& F, double q,
            std::size_t grid_m = 0);

// 1 below n = 4096, ceil(n/4096) above.
std::size_t default_stride(std::size_t n);

// max of D_{k,q} over k in {stride, 2 stride, ...} and k = n, all on the
// midpoint grid of size grid_m (0 = default_grid(n)).  Exact max for stride 1.
double max_d_kq(std::span<const double> points, const PiecewiseLinearCdf& F, double q,
                std::size_t stride = 1, std::size_t grid_m = 0);

struct Checkpoint {
  double d_kq = 0;      // D_{k,q} at the checkpoint
  double running_max = 0;  // max over evaluated k' <= k
};

// One pass over the prefixes: D_{k,q} is evaluated on a fixed midpoint grid
// (0 = default_grid(n)) at every multiple of `stride` and at each checkpoint k
// (increasing, 1 <= k <= n); returns one entry per checkpoint.
std::vector<Checkpoint> d_kq_checkpoints(std::span<const double> points,
                                         const PiecewiseLinearCdf& F, double q,
                                         std::span<const std::size_t> checkpoints,
                                         std::size_t stride = 1, std::size_t grid_m = 0);

// Exact D_{k,2} for every prefix k = 1..n, without quadrature:
//   D_k^2 = sum_{i,j<=k} kappa(x_i, x_j),
//   kappa(a,b) = 1 - max(a,b) - Phi(a) - Phi(b) + int F^2,  Phi(a) = int_a^1 F,
// accumulated in O(n log n) with Fenwick trees over the ranks of the points.
std::vector<double> d_k2_path(std::span<const double> points, const PiecewiseLinearCdf& F);

// Exact D_{n,2} alone: the same kernel sum with sum_{i,j} max(x_i,x_j) taken
// from the sorted sample.
double d_n2_exact(std::span<const double> points, const PiecewiseLinearCdf& F);

// int_0^1 |F_n(t) - F(t)| dt, integrated exactly segment by segment.
double wasserstein1(std::span<const double> points, const PiecewiseLinearCdf& F);

// max_k |sum_{i<=k} (f(x_i) - nu_f)|.
double birkhoff_max(std::span<const double> points, const std::function<double(double)>& f,
                    double nu_f);

// Running |S_k(f)| maxima for every prefix k = 1..n.
std::vector<double> birkhoff_max_path(std::span<const double> points,
                                      const std::function<double(double)>& f, double nu_f);

struct EmpiricalStats {
  std::size_t n = 0;
  double q = 2;
  double d_nq = 0;
  double max_d_kq = 0;
  double w1 = 0;
  std::optional<double> max_birkhoff;
};

EmpiricalStats empirical_stats(std::span<const double> points, const PiecewiseLinearCdf& F,
                               double q, std::size_t stride = 0);

}  // namespace ergo
