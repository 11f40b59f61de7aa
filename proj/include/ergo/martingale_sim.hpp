#pragma once

// Processes with exactly known conditional structure: bounded l^q-valued
// martingales and a finite-state Markov chain embedded in l^q, on which the
// coefficients b_{i,n} and theta(k) of the moment inequalities are exact.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergo/bounds.hpp"
#include "ergo/lq_core.hpp"

namespace ergo {

enum class IncrementLaw {
  rademacher_coords,  // coordinates +-b/dim^{1/q}: |d|_q = b exactly
  scaled_uniform,     // coordinates uniform on [-1,1] times b/dim^{1/q}: |d|_q <= b
};

struct MartingaleConfig {
  int dim = 1;
  double q = 2;
  std::size_t n = 1;
  double b = 1;
  IncrementLaw law = IncrementLaw::rademacher_coords;
};

void validate(const MartingaleConfig& config);

// Norms in l^q with counting weights.
struct MartingalePaths {
  std::vector<double> path_max;  // max_{k<=n} |M_k|_q
  std::vector<double> terminal;  // |M_n|_q
};

MartingalePaths simulate_martingale(const MartingaleConfig& config, std::size_t replicas,
                                    std::uint64_t seed, int threads = 0);

// One inequality check lhs <= rhs.
struct CheckRecord {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  double margin = 0;  // rhs - lhs
  std::string method;  // "exact" or "montecarlo"
  std::size_t replicas = 0;
  double slack = 0;    // absolute slack allowed on top of rhs
  bool pass() const { return lhs <= rhs + slack; }
};

CheckRecord make_check(std::string name, double lhs, double rhs, std::string method,
                       std::size_t replicas, double slack = 0);

// Upper end of the Wilson score interval (default z: two-sided 99%).
double wilson_upper(std::size_t successes, std::size_t trials, double z = 2.5758293035489004);

struct HoeffdingRow {
  double x = 0;
  std::size_t exceedances = 0;
  double empirical = 0;
  double wilson_upper = 0;
  TailBound bound;
  double pinelis94 = 0;
  double margin = 0;  // bound - wilson_upper
  bool pass = false;
};

struct HoeffdingReport {
  MartingaleConfig config;
  std::size_t replicas = 0;
  std::vector<HoeffdingRow> rows;
  bool pass = false;
};

HoeffdingReport verify_hoeffding(const MartingaleConfig& config, std::size_t replicas,
                                 std::span<const double> x_grid, std::uint64_t seed,
                                 int threads = 0);

struct MomentEstimate {
  double mean = 0;
  double std_error = 0;
};

MomentEstimate terminal_moment(const MartingalePaths& paths, double p);

// Monte Carlo E|M_n|_q^p + 3 sigma against (max(p,q)-1)^{p/2} (n b^2)^{p/2}.
CheckRecord verify_martingale_mz(const MartingaleConfig& config, double p, std::size_t replicas,
                                 std::uint64_t seed, int threads = 0);

struct MarkovInstrument {
  Eigen::MatrixXd transition;  // s x s, row-stochastic
  Eigen::MatrixXd embedding;   // s x dim, row s is the l^q vector of state s, centered under pi
  Eigen::VectorXd stationary;
  LqSpace<double> space;

  std::size_t states() const { return static_cast<std::size_t>(transition.rows()); }
  // max_s |embedding(s)|_q
  double sup_norm() const;
};

// Validates the chain, solves for the stationary law and centers the embedding.
MarkovInstrument make_instrument(const Eigen::MatrixXd& transition,
                                 const Eigen::MatrixXd& raw_embedding, double q);

// Two states, stay probability `stay`, embedding +-1 in dimension 1.
MarkovInstrument sticky_chain(double stay, double q);

// Every row equal to `probs`: an i.i.d. sequence.
MarkovInstrument iid_chain(const Eigen::VectorXd& probs, const Eigen::MatrixXd& raw_embedding,
                           double q);

struct ExactConditionals {
  double p = 2;
  double q = 2;
  std::size_t n = 0;
  // b_by_start[s][i-1] = b_{i,n} conditional on the chain starting in state s.
  std::vector<std::vector<double>> b_by_start;
  // Unconditional version with ||.||_{p/2} norms under the stationary law.
  std::vector<double> b_stationary;
  // theta(k), k = 0..n-1, for the stationary chain.
  ThetaSequence theta;
};

ExactConditionals exact_conditionals(const MarkovInstrument& instrument, double p, std::size_t n);

struct PathMoments {
  double sn_moment = 0;   // E|S_n|_q^p
  double max_moment = 0;  // E max_{k<=n} |S_k|_q^p
};

// Exhaustive enumeration over all s^n paths (requires s^n <= 1e7). Starts in
// `start` when given, otherwise from the stationary law.
PathMoments enumerate_moments(const MarkovInstrument& instrument, double p, std::size_t n,
                              std::optional<std::size_t> start);

// Per starting state: E_0|S_n|_q^p <= K^p (sum_i b_{i,n})^{p/2} with
// c~_p = p(max(p, 2q-p) - 1).  Exact enumeration when s^n <= 1e7, otherwise
// Monte Carlo with a 3 sigma margin.
std::vector<CheckRecord> verify_mz_markov(const MarkovInstrument& instrument, double p,
                                          std::size_t n, std::size_t replicas,
                                          std::uint64_t seed);

}  // namespace ergo
