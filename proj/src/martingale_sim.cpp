#include "ergo/martingale_sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <numeric>

#include "ergo/errors.hpp"
#include "ergo/parallel.hpp"
#include "ergo/rng.hpp"

namespace ergo {

namespace {

double pow_q(double a, double q) { return detail::abs_pow<double>(a, q); }

double root_q(double s, double q) {
  if (s <= 0) return 0;
  if (q == 2) return std::sqrt(s);
  return std::pow(s, 1 / q);
}

double row_norm(const MarkovInstrument& inst, const Eigen::MatrixXd& m, Eigen::Index row) {
  return norm_q(inst.space, m.row(row).transpose());
}

MomentEstimate mean_and_se(const std::vector<double>& values) {
  MomentEstimate e;
  const double n = static_cast<double>(values.size());
  if (values.empty()) return e;
  e.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return e;
  double ss = 0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  e.std_error = std::sqrt(ss / (n - 1) / n);
  return e;
}

}  // namespace

void validate(const MartingaleConfig& c) {
  require(c.dim >= 1, "MartingaleConfig: dim must be >= 1");
  require(c.q >= 2, "MartingaleConfig: q must be >= 2");
  require(c.n >= 1, "MartingaleConfig: n must be >= 1");
  require(c.b > 0 && std::isfinite(c.b), "MartingaleConfig: b must be positive");
}

MartingalePaths simulate_martingale(const MartingaleConfig& config, std::size_t replicas,
                                    std::uint64_t seed, int threads) {
  validate(config);
  require(replicas >= 1, "simulate_martingale: replicas must be >= 1");
  const auto dim = static_cast<std::size_t>(config.dim);
  const double q = config.q;
  const double scale = config.b / std::pow(static_cast<double>(dim), 1 / q);
  MartingalePaths out;
  out.path_max.resize(replicas);
  out.terminal.resize(replicas);

  parallel_for(replicas, threads, [&](std::size_t r) {
    auto rng = stream(seed, r);
    std::vector<double> m(dim, 0.0);
    std::uint64_t bits = 0;
    int bits_left = 0;
    double best = 0;
    double norm = 0;
    for (std::size_t k = 0; k < config.n; ++k) {
      double s = 0;
      [[maybe_unused]] double dq = 0;
      for (std::size_t j = 0; j < dim; ++j) {
        double d;
        if (config.law == IncrementLaw::rademacher_coords) {
          if (bits_left == 0) {
            bits = rng();
            bits_left = 64;
          }
          d = (bits & 1u) ? scale : -scale;
          bits >>= 1;
          --bits_left;
        } else {
          d = (2.0 * uniform01(rng) - 1.0) * scale;
        }
#ifndef NDEBUG
        dq += pow_q(d, q);
#endif
        m[j] += d;
        s += pow_q(m[j], q);
      }
      assert(root_q(dq, q) <= config.b * (1 + 1e-12));
      norm = root_q(s, q);
      best = std::max(best, norm);
    }
    out.path_max[r] = best;
    out.terminal[r] = norm;
  });
  return out;
}

CheckRecord make_check(std::string name, double lhs, double rhs, std::string method,
                       std::size_t replicas, double slack) {
  CheckRecord c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.method = std::move(method);
  c.replicas = replicas;
  c.slack = slack;
  return c;
}

double wilson_upper(std::size_t successes, std::size_t trials, double z) {
  require(trials >= 1, "wilson_upper: trials must be >= 1");
  require(successes <= trials, "wilson_upper: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = ph + z2 / (2 * n);
  const double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n));
  return std::min(1.0, (centre + half) / (1 + z2 / n));
}

HoeffdingReport verify_hoeffding(const MartingaleConfig& config, std::size_t replicas,
                                 std::span<const double> x_grid, std::uint64_t seed,
                                 int threads) {
  validate(config);
  require(!x_grid.empty(), "verify_hoeffding: x_grid is empty");
  auto paths = simulate_martingale(config, replicas, seed, threads);
  std::sort(paths.path_max.begin(), paths.path_max.end());

  HoeffdingReport report;
  report.config = config;
  report.replicas = replicas;
  report.pass = true;
  for (double x : x_grid) {
    require(x > 0, "verify_hoeffding: x must be positive");
    HoeffdingRow row;
    row.x = x;
    const auto first = std::lower_bound(paths.path_max.begin(), paths.path_max.end(), x);
    row.exceedances = static_cast<std::size_t>(paths.path_max.end() - first);
    row.empirical = static_cast<double>(row.exceedances) / static_cast<double>(replicas);
    row.wilson_upper = wilson_upper(row.exceedances, replicas);
    row.bound = hoeffding_tail(config.q, config.b, config.n, x);
    row.pinelis94 = pinelis94_tail(config.q, config.b, config.n, x);
    row.margin = row.bound.value - row.wilson_upper;
    // A trivial bound of 1 is satisfied by any probability.
    row.pass = row.bound.regime == TailRegime::trivial || row.wilson_upper <= row.bound.value;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

MomentEstimate terminal_moment(const MartingalePaths& paths, double p) {
  std::vector<double> v(paths.terminal.size());
  std::transform(paths.terminal.begin(), paths.terminal.end(), v.begin(),
                 [p](double t) { return pow_q(t, p); });
  return mean_and_se(v);
}

CheckRecord verify_martingale_mz(const MartingaleConfig& config, double p, std::size_t replicas,
                                 std::uint64_t seed, int threads) {
  validate(config);
  require(p >= 2, "verify_martingale_mz: p must be >= 2");
  const auto paths = simulate_martingale(config, replicas, seed, threads);
  const auto est = terminal_moment(paths, p);
  const std::vector<double> norms(config.n, config.b);
  const double c_p = p * (std::max(p, config.q) - 1);
  return make_check("martingale_mz", est.mean + 3 * est.std_error,
                    martingale_mz_bound(p, c_p, norms), "montecarlo", replicas);
}

double MarkovInstrument::sup_norm() const {
  double best = 0;
  for (Eigen::Index s = 0; s < embedding.rows(); ++s)
    best = std::max(best, row_norm(*this, embedding, s));
  return best;
}

MarkovInstrument make_instrument(const Eigen::MatrixXd& transition,
                                 const Eigen::MatrixXd& raw_embedding, double q) {
  const Eigen::Index s = transition.rows();
  require(s >= 1 && s <= 12, "MarkovInstrument: need 1..12 states");
  require(transition.cols() == s, "MarkovInstrument: transition must be square");
  require(raw_embedding.rows() == s && raw_embedding.cols() >= 1,
          "MarkovInstrument: embedding needs one row per state");
  for (Eigen::Index i = 0; i < s; ++i) {
    require((transition.row(i).array() >= 0).all(), "MarkovInstrument: negative transition");
    require(std::abs(transition.row(i).sum() - 1) <= 1e-12, "MarkovInstrument: rows must sum to 1");
  }

  // pi (P - I) = 0 with sum(pi) = 1, least squares on the stacked system.
  Eigen::MatrixXd A(s + 1, s);
  A.topRows(s) = (transition - Eigen::MatrixXd::Identity(s, s)).transpose();
  A.row(s).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs[s] = 1;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  const double residual = (pi.transpose() * transition - pi.transpose()).cwiseAbs().maxCoeff();
  if (residual > 1e-12)
    throw ConvergenceError("MarkovInstrument: stationary law not unique or inaccurate");

  MarkovInstrument inst{transition, raw_embedding, pi,
                        LqSpace<double>::counting(raw_embedding.cols(), q)};
  const Eigen::RowVectorXd mean = pi.transpose() * raw_embedding;
  inst.embedding.rowwise() -= mean;
  return inst;
}

MarkovInstrument sticky_chain(double stay, double q) {
  require(stay >= 0 && stay <= 1, "sticky_chain: stay must lie in [0,1]");
  Eigen::MatrixXd P(2, 2);
  P << stay, 1 - stay, 1 - stay, stay;
  Eigen::MatrixXd e(2, 1);
  e << 1, -1;
  return make_instrument(P, e, q);
}

MarkovInstrument iid_chain(const Eigen::VectorXd& probs, const Eigen::MatrixXd& raw_embedding,
                           double q) {
  require(probs.size() >= 1, "iid_chain: empty law");
  Eigen::MatrixXd P(probs.size(), probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) P.row(i) = probs.transpose();
  return make_instrument(P, raw_embedding, q);
}

ExactConditionals exact_conditionals(const MarkovInstrument& inst, double p, std::size_t n) {
  require(p >= 2, "exact_conditionals: p must be >= 2");
  require(n >= 1 && n <= 64, "exact_conditionals: need 1 <= n <= 64");
  const auto s = static_cast<Eigen::Index>(inst.states());
  const auto& P = inst.transition;
  const auto& E = inst.embedding;
  const double half = p / 2;

  // powE[j] = P^j E;  cumulative[j] = sum_{t <= j} P^t E.
  std::vector<Eigen::MatrixXd> powE(n), cumulative(n);
  powE[0] = E;
  cumulative[0] = E;
  for (std::size_t j = 1; j < n; ++j) {
    powE[j] = P * powE[j - 1];
    cumulative[j] = cumulative[j - 1] + powE[j];
  }
  Eigen::VectorXd xnorm(s);
  for (Eigen::Index t = 0; t < s; ++t) xnorm[t] = std::pow(row_norm(inst, E, t), half);
  // weight[j](t) = |X(t)|^{p/2} |sum_{k<=j} P^k E (t)|^{p/2}
  std::vector<Eigen::VectorXd> weight(n, Eigen::VectorXd(s));
  for (std::size_t j = 0; j < n; ++j)
    for (Eigen::Index t = 0; t < s; ++t)
      weight[j][t] = xnorm[t] * std::pow(row_norm(inst, cumulative[j], t), half);

  auto b_for = [&](const Eigen::RowVectorXd& law_at_i, std::size_t i) {
    double best = 0;
    for (std::size_t l = i; l <= n; ++l)
      best = std::max(best, std::pow(std::max(0.0, law_at_i.dot(weight[l - i])), 2 / p));
    return best;
  };

  ExactConditionals out;
  out.p = p;
  out.q = inst.space.q();
  out.n = n;
  out.b_by_start.assign(static_cast<std::size_t>(s), std::vector<double>(n));
  for (Eigen::Index s0 = 0; s0 < s; ++s0) {
    Eigen::RowVectorXd law = Eigen::RowVectorXd::Zero(s);
    law[s0] = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      law = law * P;
      out.b_by_start[static_cast<std::size_t>(s0)][i - 1] = b_for(law, i);
    }
  }
  const Eigen::RowVectorXd pi = inst.stationary.transpose();
  out.b_stationary.resize(n);
  for (std::size_t i = 1; i <= n; ++i) out.b_stationary[i - 1] = b_for(pi, i);

  std::vector<double> theta(n);
  for (std::size_t k = 0; k < n; ++k) {
    double t = 0;
    for (Eigen::Index st = 0; st < s; ++st) t += pi[st] * row_norm(inst, powE[k], st);
    theta[k] = t;
  }
  // Rounding can lift a tail entry by an ulp above its predecessor.
  for (std::size_t k = 1; k < n; ++k) {
    assert(theta[k] <= theta[k - 1] * (1 + 1e-12) + 1e-15);
    theta[k] = std::min(theta[k], theta[k - 1]);
  }
  out.theta = ThetaSequence(std::move(theta));
  return out;
}

PathMoments enumerate_moments(const MarkovInstrument& inst, double p, std::size_t n,
                              std::optional<std::size_t> start) {
  require(n >= 1, "enumerate_moments: n must be >= 1");
  const std::size_t s = inst.states();
  require(std::pow(static_cast<double>(s), static_cast<double>(n)) <= 1e7,
          "enumerate_moments: more than 1e7 paths");
  if (start) require(*start < s, "enumerate_moments: start state out of range");
  const auto dim = inst.embedding.cols();

  std::vector<Eigen::VectorXd> sums(n + 1, Eigen::VectorXd::Zero(dim));
  PathMoments out;
  std::function<void(std::size_t, std::size_t, double, double)> walk =
      [&](std::size_t depth, std::size_t state, double weight, double running_max) {
        if (depth == n) {
          const double last = norm_q(inst.space, sums[n]);
          out.sn_moment += weight * pow_q(last, p);
          out.max_moment += weight * pow_q(running_max, p);
          return;
        }
        for (std::size_t t = 0; t < s; ++t) {
          const double w = weight * inst.transition(static_cast<Eigen::Index>(state),
                                                    static_cast<Eigen::Index>(t));
          if (w == 0) continue;
          sums[depth + 1] = sums[depth] + inst.embedding.row(static_cast<Eigen::Index>(t)).transpose();
          walk(depth + 1, t, w, std::max(running_max, norm_q(inst.space, sums[depth + 1])));
        }
      };
  if (start) {
    walk(0, *start, 1.0, 0.0);
  } else {
    for (std::size_t s0 = 0; s0 < s; ++s0)
      if (inst.stationary[static_cast<Eigen::Index>(s0)] > 0)
        walk(0, s0, inst.stationary[static_cast<Eigen::Index>(s0)], 0.0);
  }
  return out;
}

std::vector<CheckRecord> verify_mz_markov(const MarkovInstrument& inst, double p, std::size_t n,
                                          std::size_t replicas, std::uint64_t seed) {
  require(p >= 2, "verify_mz_markov: p must be >= 2");
  const double q = inst.space.q();
  const double c_tilde = smoothness_constants(p, q).c_tilde_p;
  const auto exact = exact_conditionals(inst, p, n);
  const std::size_t s = inst.states();
  const bool enumerate = std::pow(static_cast<double>(s), static_cast<double>(n)) <= 1e7;

  std::vector<CheckRecord> out;
  for (std::size_t s0 = 0; s0 < s; ++s0) {
    const double rhs = mz_bound(p, c_tilde, exact.b_by_start[s0]);
    const std::string name = "mz_markov[start=" + std::to_string(s0) + "]";
    if (enumerate) {
      const auto m = enumerate_moments(inst, p, n, s0);
      out.push_back(make_check(name, m.sn_moment, rhs, "exact", 0,
                               1e-10 * std::max(1.0, std::abs(rhs))));
      continue;
    }
    require(replicas >= 2, "verify_mz_markov: Monte Carlo needs replicas >= 2");
    std::vector<double> values(replicas);
    const auto dim = inst.embedding.cols();
    for (std::size_t r = 0; r < replicas; ++r) {
      auto rng = stream(seed ^ (0x9E3779B97F4A7C15ULL * (s0 + 1)), r);
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
      auto state = static_cast<Eigen::Index>(s0);
      for (std::size_t k = 0; k < n; ++k) {
        const double u = uniform01(rng);
        double acc = 0;
        Eigen::Index next = static_cast<Eigen::Index>(s) - 1;
        for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(s); ++t) {
          acc += inst.transition(state, t);
          if (u < acc) {
            next = t;
            break;
          }
        }
        state = next;
        sum += inst.embedding.row(state).transpose();
      }
      values[r] = pow_q(norm_q(inst.space, sum), p);
    }
    const auto est = mean_and_se(values);
    out.push_back(make_check(name, est.mean + 3 * est.std_error, rhs, "montecarlo", replicas));
  }
  return out;
}

}  // namespace ergo
