#include "ergo/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>

#include "ergo/bounds.hpp"
#include "ergo/dynamics.hpp"
#include "ergo/empirical.hpp"
#include "ergo/experiments.hpp"
#include "ergo/lq_core.hpp"
#include "ergo/martingale_sim.hpp"
#include "ergo/regression.hpp"
#include "ergo/rng.hpp"

namespace ergo {

namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

constexpr std::size_t kUlamM = 16384;

// Expensive intermediate results shared between criteria in one run.
struct Cache {
  std::map<double, std::unique_ptr<UlamModel>> ulam;
  std::vector<SmoothnessReport> smoothness;
  std::optional<ReplicaTable> rate_table;       // gamma 0.25, criteria 7 and 10
  std::optional<ReplicaTable> deviation_table;  // gamma 0.75, criteria 8 and 9

  const UlamModel& model(double gamma) {
    auto& slot = ulam[gamma];
    if (!slot) slot = std::make_unique<UlamModel>(build_ulam(gamma, kUlamM));
    return *slot;
  }
};

const std::vector<SmoothnessReport>& smoothness_sweep(Cache& cache, const AcceptanceOptions& o) {
  if (!cache.smoothness.empty()) return cache.smoothness;
  std::uint64_t k = 0;
  for (double p : {2.0, 3.0, 4.0})
    for (double q : {2.0, 3.0, 4.0})
      for (int dim : {2, 16, 64})
        cache.smoothness.push_back(
            check_smoothness(LqSpace<double>::counting(dim, q), p, 10000, o.seed + ++k));
  return cache.smoothness;
}

CriterionResult criterion_smoothness(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{1, "smoothness constant c~_p, 27 (p,q,dim) cells", false, {}, 0};
  int violations = 0;
  double worst = 0, worst_fd = 0;
  bool ok = true;
  for (const auto& s : smoothness_sweep(cache, o)) {
    violations += s.violations;
    worst = std::max(worst, s.max_ratio / s.bound_c_tilde);
    worst_fd = std::max(worst_fd, s.max_fd_rel_error);
    ok = ok && s.violations == 0 && s.max_ratio <= s.bound_c_tilde * (1 + 1e-12) &&
         s.max_fd_rel_error <= 1e-4;
  }
  r.pass = ok;
  r.detail = fmt("max ratio/c~_p = %.6f, violations = %d, max fd rel error = %.2e", worst,
                 violations, worst_fd);
  return r;
}

CriterionResult criterion_diagonal(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{2, "diagonal constant c_p and q=2 tightness at u=v=x", false, {}, 0};
  double worst = 0, tight = 0;
  bool ok = true;
  for (const auto& s : smoothness_sweep(cache, o)) {
    worst = std::max(worst, s.max_diag_ratio / s.bound_c);
    ok = ok && s.max_diag_ratio <= s.bound_c * (1 + 1e-12);
    if (s.q == 2) {
      const double target = s.p * (s.p - 1);
      const double err = std::abs(s.self_ratio - target);
      tight = std::max(tight, err);
      ok = ok && err <= 1e-10;
    }
  }
  r.pass = ok;
  r.detail = fmt("max diag ratio/c_p = %.6f, max |self ratio - p(p-1)| = %.2e (q=2)", worst, tight);
  return r;
}

CriterionResult criterion_martingale_mz(const AcceptanceOptions& o) {
  CriterionResult r{3, "martingale MZ, 18 configs, 1e6 replicas each", false, {}, 0};
  int failures = 0;
  double worst = 0;
  std::uint64_t k = 0;
  for (auto [p, q] : {std::pair{2.0, 4.0}, std::pair{3.0, 3.0}, std::pair{4.0, 2.0}})
    for (int dim : {1, 4, 8})
      for (std::size_t n : {8u, 32u}) {
        MartingaleConfig c{dim, q, n, 1.0, IncrementLaw::rademacher_coords};
        const auto check = verify_martingale_mz(c, p, 1000000, o.seed + 1000 + ++k, o.threads);
        failures += check.pass() ? 0 : 1;
        worst = std::max(worst, check.lhs / check.rhs);
      }
  r.pass = failures == 0;
  r.detail = fmt("violations = %d, max (mean + 3 se)/bound = %.4f", failures, worst);
  return r;
}

CriterionResult criterion_markov(const AcceptanceOptions& o) {
  CriterionResult r{4, "MZ bound with exact b_{i,n} on finite chains, per start state", false, {}, 0};
  Eigen::VectorXd half(2);
  half << 0.5, 0.5;
  Eigen::MatrixXd signs(2, 1);
  signs << 1, -1;
  int checks = 0, failures = 0;
  double worst = 0;
  for (double stay : {0.9, -1.0})
    for (std::size_t n : {8u, 16u})
      for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{3.0, 3.0}}) {
        const auto inst = stay > 0 ? sticky_chain(stay, q) : iid_chain(half, signs, q);
        for (const auto& c : verify_mz_markov(inst, p, n, 0, o.seed)) {
          ++checks;
          failures += c.pass() && c.method == "exact" ? 0 : 1;
          worst = std::max(worst, c.lhs / c.rhs);
        }
      }
  r.pass = failures == 0;
  r.detail = fmt("%d exact checks, failures = %d, max lhs/rhs = %.4f", checks, failures, worst);
  return r;
}

CriterionResult criterion_hoeffding(const AcceptanceOptions& o) {
  CriterionResult r{5, "Hoeffding-type tails vs Monte Carlo and vs 2exp bound", false, {}, 0};
  int failures = 0;
  double min_margin = 1;
  for (std::size_t n : {64u, 256u}) {
    const double rn = std::sqrt(static_cast<double>(n));
    std::vector<double> grid(50);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = rn * (0.25 + (6.0 - 0.25) * static_cast<double>(i) / 49.0);
    MartingaleConfig c{8, 4.0, n, 1.0, IncrementLaw::rademacher_coords};
    const auto rep = verify_hoeffding(c, 1000000, grid, o.seed + 2000 + n, o.threads);
    for (const auto& row : rep.rows) {
      failures += row.pass ? 0 : 1;
      if (row.bound.regime != TailRegime::trivial) min_margin = std::min(min_margin, row.margin);
    }
  }
  int dominated = 0;
  for (double q : {4.0, 6.0, 10.0}) {
    const std::size_t n = 100;
    const double top = 10 * std::sqrt(static_cast<double>(n));
    for (int i = 1; i <= 10000; ++i) {
      const double x = top * i / 10000.0;
      if (hoeffding_tail(q, 1.0, n, x).value > pinelis94_tail(q, 1.0, n, x)) ++dominated;
    }
  }
  r.pass = failures == 0 && dominated == 0;
  r.detail = fmt("MC failures = %d (100 grid points), min margin = %.3e, points above 2exp bound = %d",
                 failures, min_margin, dominated);
  return r;
}

CriterionResult criterion_tower(const AcceptanceOptions&) {
  CriterionResult r{6, "return-time tails of the tower, gamma in {0.25,0.5,0.75}", false, {}, 0};
  bool ok = true;
  std::string detail;
  for (double gamma : {0.25, 0.5, 0.75}) {
    const auto t = build_tower(gamma, 10000);
    std::vector<double> lx, ly;
    for (int i = 0; i <= 40; ++i) {
      const auto k = static_cast<std::size_t>(std::lround(100 * std::pow(100.0, i / 40.0)));
      lx.push_back(std::log(static_cast<double>(k)));
      ly.push_back(std::log(t.tail[k]));
    }
    const double slope = fit_line(lx, ly).slope;
    const double ratio = t.x[10000] / (0.5 * std::pow(gamma * 10000, -1 / gamma));
    const bool cell = std::abs(slope + 1 / gamma) <= 0.05 && ratio >= 0.95 && ratio <= 1.05;
    ok = ok && cell;
    detail += fmt("%sgamma=%.2f slope=%.4f ratio=%.4f", detail.empty() ? "" : "; ", gamma, slope, ratio);
  }
  r.pass = ok;
  r.detail = detail;
  return r;
}

const ReplicaTable& rate_table(Cache& cache, const AcceptanceOptions& o) {
  if (!cache.rate_table) {
    ExperimentConfig c;
    c.gamma = 0.25;
    c.q = 2;
    c.p = 6;
    c.replicas = 200;
    c.master_seed = o.seed + 7;
    c.threads = o.threads;
    cache.rate_table = simulate_statistics(c, cache.model(0.25).cdf);
  }
  return *cache.rate_table;
}

const ReplicaTable& deviation_table(Cache& cache, const AcceptanceOptions& o) {
  if (!cache.deviation_table) {
    ExperimentConfig c;
    c.gamma = 0.75;
    c.q = 2;
    c.p = 1;
    c.n_grid = {16384};
    c.replicas = 2000;
    c.master_seed = o.seed + 8;
    c.threads = o.threads;
    cache.deviation_table = simulate_statistics(c, cache.model(0.75).cdf);
  }
  return *cache.deviation_table;
}

CriterionResult criterion_rate(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{7, "||max_k D_{k,2}||_6 ~ n^{1/2} at gamma=0.25", false, {}, 0};
  const auto res = scaling_from_table(rate_table(cache, o), Statistic::max_d_kq, 6,
                                      scaling_target(0.25, 6), 0.05, o.seed + 70);
  r.pass = res.pass;
  r.detail = fmt("slope = %.4f (target 0.5 +- 0.05), bootstrap CI [%.4f, %.4f], r2 = %.4f",
                 res.fit.slope, res.ci_low, res.ci_high, res.fit.r2);
  return r;
}

CriterionResult criterion_deviation(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{8, "deviation tail of max_k D_{k,2}/n^gamma at gamma=0.75", false, {}, 0};
  const auto res = deviation_from_table(deviation_table(cache, o), Statistic::max_d_kq, {}, 0.15);
  std::size_t fitted = 0;
  for (const auto& row : res.rows) fitted += row.fitted ? 1 : 0;
  r.pass = res.pass;
  r.detail = fmt("tail slope = %.4f (target %.4f +- 0.15), %zu fitted x, x in [%.3f, %.3f]",
                 res.fit.slope, res.target_slope, fitted, res.rows.front().x, res.rows.back().x);
  return r;
}

CriterionResult criterion_stable(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{9, "stable tail index at gamma=0.75, non-degeneracy at gamma=0.5", false, {}, 0};
  const auto stable = stable_tail_from_table(deviation_table(cache, o), 0.3);
  ExperimentConfig c;
  c.gamma = 0.5;
  c.q = 2;
  c.p = 2;
  c.n_grid = {4096, 16384};
  c.replicas = 200;
  c.master_seed = o.seed + 9;
  c.threads = o.threads;
  const auto boundary = boundary_from_table(simulate_statistics(c, cache.model(0.5).cdf));
  r.pass = stable.pass && boundary.pass;
  r.detail = fmt("Hill index = %.4f (target %.4f +- 0.3); IQR at 2^12, 2^14 = %.4f, %.4f",
                 stable.hill_index, stable.target, boundary.rows[0].iqr, boundary.rows[1].iqr);
  return r;
}

CriterionResult criterion_wasserstein(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{10, "E W_1^6 ~ n^{-3} at gamma=0.25, W_1 <= D_{n,2}/n", false, {}, 0};
  const auto& t = rate_table(cache, o);
  const auto res = wasserstein_from_table(t, 6, 0.3, o.seed + 100);
  double worst = -1;
  for (std::size_t rep = 0; rep < t.replicas; ++rep)
    for (std::size_t j = 0; j < t.n_grid.size(); ++j)
      worst = std::max(worst, t.at(t.w1, rep, j) - t.at(t.d_nq, rep, j) / static_cast<double>(t.n_grid[j]));
  r.pass = res.pass && worst <= 1e-3;
  r.detail = fmt("slope = %.4f (target -3 +- 0.3), CI [%.4f, %.4f]; max W_1 - D_n/n = %.3e",
                 res.fit.slope, res.ci_low, res.ci_high, worst);
  return r;
}

CriterionResult criterion_oracles(Cache& cache, const AcceptanceOptions& o) {
  CriterionResult r{11, "quadrature D_{n,1} vs exact n W_1; closed-form D_{1,2}", false, {}, 0};
  const auto& F = cache.model(0.5).cdf;
  const LsvMap map(0.5);
  double worst = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto rng = stream(o.seed + 11, s);
    const auto n = 1 + static_cast<std::size_t>(uniform01(rng) * 1000);
    std::vector<double> pts(n);
    iterate_into(map, uniform01(rng), 1000, pts);
    const double exact = static_cast<double>(n) * wasserstein1(pts, F);
    const double quad = d_nq(pts, F, 1.0);
    worst = std::max(worst, std::abs(quad - exact) / exact);
  }
  const double half = 0.5;
  const auto U = PiecewiseLinearCdf::uniform();
  const double target = std::sqrt(1.0 / 12.0);
  const double err_quad = std::abs(d_nq({&half, 1}, U, 2.0) - target);
  const double err_exact = std::abs(d_k2_path({&half, 1}, U)[0] - target);
  r.pass = worst <= 1e-3 && err_quad <= 1e-4 && err_exact <= 1e-4;
  r.detail = fmt("max rel error D_{n,1} vs n W_1 = %.2e; D_{1,2} error quad %.1e, exact %.1e",
                 worst, err_quad, err_exact);
  return r;
}

}  // namespace

std::string format_line(const CriterionResult& r) {
  return fmt("%s [%d] %s: %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
             r.detail.c_str(), r.seconds);
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  Cache cache;
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      switch (id) {
        case 1: r = criterion_smoothness(cache, options); break;
        case 2: r = criterion_diagonal(cache, options); break;
        case 3: r = criterion_martingale_mz(options); break;
        case 4: r = criterion_markov(options); break;
        case 5: r = criterion_hoeffding(options); break;
        case 6: r = criterion_tower(options); break;
        case 7: r = criterion_rate(cache, options); break;
        case 8: r = criterion_deviation(cache, options); break;
        case 9: r = criterion_stable(cache, options); break;
        case 10: r = criterion_wasserstein(cache, options); break;
        case 11: r = criterion_oracles(cache, options); break;
      }
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace ergo
