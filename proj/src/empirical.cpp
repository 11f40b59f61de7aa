#include "ergo/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergo/errors.hpp"

namespace ergo {

namespace {

double abs_pow(double g, double q) {
  const double a = std::abs(g);
  if (q == 1) return a;
  if (q == 2) return a * a;
  return std::pow(a, q);
}

double root(double integral, double q) {
  if (integral <= 0) return 0;
  if (q == 1) return integral;
  if (q == 2) return std::sqrt(integral);
  return std::pow(integral, 1 / q);
}

std::vector<double> sorted_copy(std::span<const double> points) {
  std::vector<double> s(points.begin(), points.end());
  std::sort(s.begin(), s.end());
  return s;
}

// First midpoint index j with (j + 1/2)/m >= x, or m when none.
std::size_t first_midpoint_at_or_after(double x, std::size_t m) {
  const double md = static_cast<double>(m);
  double guess = std::ceil(x * md - 0.5);
  guess = std::clamp(guess, 0.0, md);
  auto j = static_cast<std::size_t>(guess);
  while (j > 0 && (static_cast<double>(j - 1) + 0.5) / md >= x) --j;
  while (j < m && (static_cast<double>(j) + 0.5) / md < x) ++j;
  return j;
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0) {}
  void add(std::size_t i, double v) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += v;
  }
  // sum over [0, i]
  double prefix(std::size_t i) const {
    double s = 0;
    for (++i; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<double> tree_;
};

}  // namespace

double empirical_G(std::span<const double> points, const PiecewiseLinearCdf& F, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("empirical_G: t outside [0,1]");
  const auto count = std::count_if(points.begin(), points.end(), [t](double x) { return x <= t; });
  return static_cast<double>(count) - static_cast<double>(points.size()) * F(t);
}

std::size_t default_grid(std::size_t n) { return std::max<std::size_t>(4096, 8 * n); }

std::size_t default_stride(std::size_t n) { return n < 4096 ? 1 : (n + 4095) / 4096; }

double d_nq(std::span<const double> points, const PiecewiseLinearCdf& F, double q,
            std::size_t grid_m) {
  require(q >= 1, "d_nq: q must be >= 1");
  const std::size_t n = points.size();
  const std::size_t m = grid_m == 0 ? default_grid(n) : grid_m;
  require(m >= 2, "d_nq: grid_m must be >= 2");
  const auto sorted = sorted_copy(points);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  std::size_t below = 0;
  double integral = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = (static_cast<double>(j) + 0.5) / md;
    while (below < n && sorted[below] <= t) ++below;
    integral += abs_pow(static_cast<double>(below) - nd * F(t), q);
  }
  return root(integral / md, q);
}

double max_d_kq(std::span<const double> points, const PiecewiseLinearCdf& F, double q,
                std::size_t stride, std::size_t grid_m) {
  require(q >= 1, "max_d_kq: q must be >= 1");
  require(stride >= 1, "max_d_kq: stride must be >= 1");
  const std::size_t n = points.size();
  require(n >= 1, "max_d_kq: need at least one point");
  const std::size_t m = grid_m == 0 ? default_grid(n) : grid_m;
  const double md = static_cast<double>(m);

  std::vector<double> Fgrid(m);
  for (std::size_t j = 0; j < m; ++j) Fgrid[j] = F((static_cast<double>(j) + 0.5) / md);
  std::vector<long> added(m + 1, 0);

  double best = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    ++added[first_midpoint_at_or_after(points[k - 1], m)];
    if (k % stride != 0 && k != n) continue;
    const double kd = static_cast<double>(k);
    long count = 0;
    double integral = 0;
    for (std::size_t j = 0; j < m; ++j) {
      count += added[j];
      integral += abs_pow(static_cast<double>(count) - kd * Fgrid[j], q);
    }
    best = std::max(best, root(integral / md, q));
  }
  return best;
}

std::vector<Checkpoint> d_kq_checkpoints(std::span<const double> points,
                                         const PiecewiseLinearCdf& F, double q,
                                         std::span<const std::size_t> checkpoints,
                                         std::size_t stride, std::size_t grid_m) {
  require(q >= 1, "d_kq_checkpoints: q must be >= 1");
  require(stride >= 1, "d_kq_checkpoints: stride must be >= 1");
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    require(checkpoints[i] >= 1 && checkpoints[i] <= n, "d_kq_checkpoints: checkpoint out of range");
    require(i == 0 || checkpoints[i] > checkpoints[i - 1],
            "d_kq_checkpoints: checkpoints must increase");
  }
  const std::size_t m = grid_m == 0 ? default_grid(n) : grid_m;
  const double md = static_cast<double>(m);
  std::vector<double> Fgrid(m);
  for (std::size_t j = 0; j < m; ++j) Fgrid[j] = F((static_cast<double>(j) + 0.5) / md);
  std::vector<long> added(m + 1, 0);

  std::vector<Checkpoint> out;
  out.reserve(checkpoints.size());
  std::size_t next = 0;
  double best = 0;
  const std::size_t last = checkpoints.empty() ? 0 : checkpoints.back();
  for (std::size_t k = 1; k <= last; ++k) {
    ++added[first_midpoint_at_or_after(points[k - 1], m)];
    const bool at_checkpoint = k == checkpoints[next];
    if (k % stride != 0 && !at_checkpoint) continue;
    const double kd = static_cast<double>(k);
    long count = 0;
    double integral = 0;
    for (std::size_t j = 0; j < m; ++j) {
      count += added[j];
      integral += abs_pow(static_cast<double>(count) - kd * Fgrid[j], q);
    }
    const double d = root(integral / md, q);
    best = std::max(best, d);
    if (at_checkpoint) {
      out.push_back({d, best});
      ++next;
    }
  }
  return out;
}

std::vector<double> d_k2_path(std::span<const double> points, const PiecewiseLinearCdf& F) {
  const std::size_t n = points.size();
  std::vector<double> path(n);
  if (n == 0) return path;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  const double c2 = F.square_integral();
  Fenwick counts(n), sums(n);
  double total_sum = 0;
  double total_phi = 0;
  double d2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = points[k];
    const double phi = F.upper_integral(x);
    const double prior = static_cast<double>(k);
    const double count_le = counts.prefix(rank[k]);
    const double sum_le = sums.prefix(rank[k]);
    const double sum_max = x * count_le + (total_sum - sum_le);
    const double cross = prior * (1.0 + c2 - phi) - sum_max - total_phi;
    const double self = 1.0 - x - 2.0 * phi + c2;
    d2 += 2.0 * cross + self;
    path[k] = std::sqrt(std::max(d2, 0.0));
    counts.add(rank[k], 1.0);
    sums.add(rank[k], x);
    total_sum += x;
    total_phi += phi;
  }
  return path;
}

double d_n2_exact(std::span<const double> points, const PiecewiseLinearCdf& F) {
  const std::size_t n = points.size();
  if (n == 0) return 0;
  const auto sorted = sorted_copy(points);
  const double nd = static_cast<double>(n);
  // sum_{i,j} max(x_i, x_j) = sum_i x_(i) (2i - 1), i = 1..n ascending.
  double sum_max = 0;
  double sum_phi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_max += sorted[i] * (2.0 * static_cast<double>(i) + 1.0);
    sum_phi += F.upper_integral(sorted[i]);
  }
  const double d2 = nd * nd * (1.0 + F.square_integral()) - sum_max - 2.0 * nd * sum_phi;
  return std::sqrt(std::max(d2, 0.0));
}

double wasserstein1(std::span<const double> points, const PiecewiseLinearCdf& F) {
  require(!points.empty(), "wasserstein1: points must be nonempty");
  const auto sorted = sorted_copy(points);
  const auto& nodes = F.nodes();
  const double nd = static_cast<double>(sorted.size());

  // |c - F| integrated over [u, v] where F is linear.
  auto segment = [&](double u, double v, double c) {
    if (v <= u) return 0.0;
    const double d0 = F(u) - c;
    const double d1 = F(v) - c;
    const double len = v - u;
    if ((d0 >= 0) == (d1 >= 0)) return 0.5 * len * (std::abs(d0) + std::abs(d1));
    return 0.5 * len * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
  };

  double total = 0;
  double u = 0;
  std::size_t below = 0;
  std::size_t node = 1;
  while (below < sorted.size() && sorted[below] <= 0.0) ++below;
  while (u < 1.0) {
    const double next_point = below < sorted.size() ? sorted[below] : 2.0;
    while (node < nodes.size() && nodes[node] <= u) ++node;
    const double next_node = node < nodes.size() ? nodes[node] : 1.0;
    const double v = std::min({next_point, next_node, 1.0});
    total += segment(u, v, static_cast<double>(below) / nd);
    u = v;
    while (below < sorted.size() && sorted[below] <= u) ++below;
  }
  return total;
}

double birkhoff_max(std::span<const double> points, const std::function<double(double)>& f,
                    double nu_f) {
  double sum = 0;
  double best = 0;
  for (double x : points) {
    sum += f(x) - nu_f;
    best = std::max(best, std::abs(sum));
  }
  return best;
}

std::vector<double> birkhoff_max_path(std::span<const double> points,
                                      const std::function<double(double)>& f, double nu_f) {
  std::vector<double> out(points.size());
  double sum = 0;
  double best = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += f(points[i]) - nu_f;
    best = std::max(best, std::abs(sum));
    out[i] = best;
  }
  return out;
}

EmpiricalStats empirical_stats(std::span<const double> points, const PiecewiseLinearCdf& F,
                               double q, std::size_t stride) {
  require(!points.empty(), "empirical_stats: points must be nonempty");
  EmpiricalStats s;
  s.n = points.size();
  s.q = q;
  s.d_nq = d_nq(points, F, q);
  s.max_d_kq = std::max(s.d_nq, max_d_kq(points, F, q, stride == 0 ? default_stride(s.n) : stride));
  s.w1 = wasserstein1(points, F);
  return s;
}

}  // namespace ergo
