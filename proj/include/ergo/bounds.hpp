#pragma once

// Closed-form right-hand sides of the moment, maximal and deviation
// inequalities for sums in 2-smooth Banach spaces.  Each evaluator is a pure
// function; the statements with explicit constants are checked absolutely
// elsewhere, the ones with implied constants use constant 1.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ergo {

// Nonincreasing nonnegative dependence coefficients theta(0), theta(1), ...
class ThetaSequence {
 public:
  ThetaSequence() = default;
  explicit ThetaSequence(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

enum class TailRegime { trivial, polynomial, exponential };

std::string to_string(TailRegime regime);

struct TailBound {
  double value = 1;  // clamped to [0, 1]
  double raw = 1;
  TailRegime regime = TailRegime::trivial;
};

struct ClampedBound {
  double value = 1;  // clamped to [0, 1]
  double raw = 1;
};

// K = sqrt(2/p) sqrt(max(c~_p, p/2)).
double mz_constant_K(double p, double c_tilde_p);

// K^p (sum_i b_i)^{p/2}; b holds b_{1,n}, ..., b_{n,n}.
double mz_bound(double p, double c_tilde_p, std::span<const double> b);

// C_p = (1/2)(2pK/(p-1))^p + 2^{3p-4} 3^p p.
double mz_max_constant(double p, double K);

// C_p M^{p-1} n^{p/2} (sum_{k<n} theta(k)^{2/p})^{p/2}.
double mz_max_bound(double p, double K, double M, std::size_t n, const ThetaSequence& theta);

// (c_p/p)^{p/2} (sum_i ||d_i||_p^2)^{p/2}.
double martingale_mz_bound(double p, double c_p, std::span<const double> increment_norms);

// Three-regime bound on P(max_k |M_k|_q >= x) for martingales with |d_i|_q <= b.
// Thresholds b sqrt((q-1)n) and b sqrt(e(q-1)n), left-closed: a point on a
// threshold belongs to the regime on its right.
TailBound hoeffding_tail(double q, double b, std::size_t n, double x);

// 2 exp(-x^2 / (2(q-1) b^2 n)); not clamped.
double pinelis94_tail(double q, double b, std::size_t n, double x);

// Three-regime bound on P(|S_n|_q >= x) for general adapted sequences.
TailBound general_tail(double q, double b_n, std::size_t n, double x);

// n x0_moment + n (sum_{k=1}^n k^{-1-2delta/p} a_k^delta)^{p/(2delta)},
// delta = min(1/2, 1/(p-2)), implied constant 1.
double rosenthal_bound(double p, double x0_moment, std::span<const double> cond_s2_norms,
                       std::size_t n);
double rosenthal_delta(double p);

// Bound on P(max_k |S_k| >= 4x):
//   n theta(q)/x 1{q<n} + 4 c~_2 K^2 n M / x^2 sum_{k<q} theta(k),  K^2 = max(c~_2, 1).
// Requires 1 <= q_lag <= n and x >= q_lag M.
ClampedBound deviation_bound(std::size_t q_lag, double M, double x, const ThetaSequence& theta,
                             std::size_t n, double c_tilde_2);

// Lag min(n, max(1, floor(x/M))).
std::size_t deviation_lag(double M, double x, std::size_t n);

ClampedBound deviation_bound_auto(double M, double x, const ThetaSequence& theta, std::size_t n,
                                  double c_tilde_2);

// (4^p p + 4^{p+1} p c~_2 K^2/(2-p)) M^{p-1} n sum_{k<n} (k+1) theta(k),  1 <= p <= 2 - 1e-6.
double deviation_moment_bound(double p, double M, const ThetaSequence& theta, std::size_t n,
                              double c_tilde_2);

// (1/2)(2p/(p-1))^p E|S_n|^p + 2^{p-1} 3^p p M^{p-1} n sum_{k=0}^{n-2} (k+1)^{p-2} theta(k).
double maximal_bound(double p, double sn_moment, double M, const ThetaSequence& theta,
                     std::size_t n);

}  // namespace ergo
