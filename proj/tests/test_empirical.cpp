#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ergo/cdf.hpp"
#include "ergo/dynamics.hpp"
#include "ergo/empirical.hpp"
#include "ergo/errors.hpp"

using namespace ergo;

namespace {

const PiecewiseLinearCdf kUniform = PiecewiseLinearCdf::uniform();

std::vector<double> uniform_sample(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Exact D_{n,q}^q for F(t) = t: G is linear with slope -n between order statistics.
double exact_dq_uniform(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double total = 0, left = 0;
  auto piece = [&](double a, double b, double count) {
    // int_a^b |count - n t|^q dt
    auto prim = [&](double t) {
      const double g = count - n * t;
      return -std::copysign(std::pow(std::abs(g), q + 1), g) / (n * (q + 1));
    };
    const double root = count / n;
    if (root > a && root < b) return std::abs(prim(root) - prim(a)) + std::abs(prim(b) - prim(root));
    return std::abs(prim(b) - prim(a));
  };
  for (std::size_t i = 0; i <= x.size(); ++i) {
    const double right = i < x.size() ? x[i] : 1.0;
    total += piece(left, right, static_cast<double>(i));
    left = right;
  }
  return total;
}

}  // namespace

TEST_CASE("PiecewiseLinearCdf") {
  const PiecewiseLinearCdf F({0, 0.5, 1}, {0, 0.8, 1});
  CHECK(F(0) == 0);
  CHECK(F(1) == 1);
  CHECK(F(0.25) == doctest::Approx(0.4));
  CHECK(F.upper_integral(0) == doctest::Approx(0.2 + 0.45));
  CHECK(F.square_integral() == doctest::Approx(0.5 * 0.64 / 3 + 0.5 * (0.64 + 0.8 + 1) / 3));
  CHECK_THROWS_AS(PiecewiseLinearCdf({0, 1}, {0, 0.9}), ContractViolation);
  CHECK_THROWS_AS(PiecewiseLinearCdf({0, 0.5, 1}, {0, 0.6, 0.5}), ContractViolation);
}

TEST_CASE("empirical_G") {
  const std::vector<double> one{0.5};
  CHECK(empirical_G(one, kUniform, 0.25) == doctest::Approx(-0.25));
  CHECK(empirical_G(one, kUniform, 0.75) == doctest::Approx(0.25));
  CHECK(empirical_G(one, kUniform, 1.0) == 0.0);
  CHECK(empirical_G(one, kUniform, 0.0) == 0.0);
}

TEST_CASE("d_nq closed forms") {
  const std::vector<double> one{0.5};
  CHECK(d_nq(one, kUniform, 2) == doctest::Approx(std::sqrt(1.0 / 12)).epsilon(1e-4));
  CHECK(d_nq(one, kUniform, 1) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(max_d_kq(one, kUniform, 2) == d_nq(one, kUniform, 2));
  // Points on the quantiles: a staircase with G in [-1/2, 1/2] scaled by 1/n steps.
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100);
  CHECK(d_nq(grid, kUniform, 2) <= 0.5);
}

TEST_CASE("d_nq against exact piecewise integral") {
  for (double q : {1.0, 2.0, 3.0})
    for (unsigned seed : {1u, 2u, 3u}) {
      const auto x = uniform_sample(300, seed);
      const double exact = std::pow(exact_dq_uniform(x, q), 1 / q);
      CHECK(d_nq(x, kUniform, q) == doctest::Approx(exact).epsilon(1e-3));
    }
}

TEST_CASE("exact D_{k,2}") {
  const auto x = uniform_sample(500, 9);
  const auto path = d_k2_path(x, kUniform);
  REQUIRE(path.size() == x.size());
  for (std::size_t k : {1u, 2u, 17u, 250u, 500u}) {
    const std::vector<double> prefix(x.begin(), x.begin() + k);
    CHECK(path[k - 1] == doctest::Approx(std::sqrt(exact_dq_uniform(prefix, 2))).epsilon(1e-9));
  }
  CHECK(d_n2_exact(x, kUniform) == doctest::Approx(path.back()).epsilon(1e-10));
  SUBCASE("nonuniform F from the Ulam model") {
    const auto model = build_ulam(0.5, 1024);
    const auto t = iterate(LsvMap(0.5), 2000, 1000, std::nullopt, 4);
    const auto p = d_k2_path(t.points, model.cdf);
    CHECK(d_n2_exact(t.points, model.cdf) == doctest::Approx(p.back()).epsilon(1e-9));
    CHECK(d_nq(t.points, model.cdf, 2, 200000) == doctest::Approx(p.back()).epsilon(1e-3));
  }
}

TEST_CASE("max_d_kq") {
  const auto x = uniform_sample(512, 21);
  const double full = max_d_kq(x, kUniform, 2, 1);
  CHECK(full >= d_nq(x, kUniform, 2));
  const double strided = max_d_kq(x, kUniform, 2, 8);
  CHECK(strided <= full);
  CHECK(full - strided <= 16);
  const auto path = d_k2_path(x, kUniform);
  CHECK(full == doctest::Approx(*std::max_element(path.begin(), path.end())).epsilon(1e-3));
}

TEST_CASE("d_kq_checkpoints") {
  const auto x = uniform_sample(1024, 22);
  const std::vector<std::size_t> cps{64, 256, 1024};
  const auto c = d_kq_checkpoints(x, kUniform, 3, cps, 1, 8192);
  REQUIRE(c.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::span<const double> prefix(x.data(), cps[i]);
    CHECK(c[i].d_kq == doctest::Approx(d_nq(prefix, kUniform, 3, 8192)).epsilon(1e-12));
    CHECK(c[i].running_max == doctest::Approx(max_d_kq(prefix, kUniform, 3, 1, 8192)).epsilon(1e-12));
  }
  CHECK(c[0].running_max <= c[1].running_max);
  CHECK(c[1].running_max <= c[2].running_max);
}

TEST_CASE("wasserstein1") {
  const std::vector<double> zero{0.0};
  CHECK(wasserstein1(zero, kUniform) == doctest::Approx(0.5));
  for (unsigned seed = 1; seed <= 20; ++seed) {
    const auto x = uniform_sample(50 + 37 * seed, seed);
    const double n = static_cast<double>(x.size());
    CHECK(wasserstein1(x, kUniform) * n == doctest::Approx(exact_dq_uniform(x, 1)).epsilon(1e-10));
    CHECK(wasserstein1(x, kUniform) <= d_nq(x, kUniform, 2) / n + 1e-3);
  }
}

TEST_CASE("birkhoff sums") {
  const std::vector<double> x{0.1, 0.7, 0.3};
  CHECK(birkhoff_max(x, [](double) { return 2.0; }, 2.0) == 0.0);
  const std::vector<double> one{0.5};
  CHECK(birkhoff_max(one, [](double t) { return t; }, 0.4) == doctest::Approx(0.1));
  const auto path = birkhoff_max_path(x, [](double t) { return t; }, 0.5);
  REQUIRE(path.size() == 3);
  CHECK(path[0] == doctest::Approx(0.4));
  CHECK(path[1] == doctest::Approx(0.4));
  CHECK(path[2] == doctest::Approx(0.4));
}

TEST_CASE("empirical_stats bundles the statistics") {
  const auto x = uniform_sample(256, 5);
  const auto s = empirical_stats(x, kUniform, 2);
  CHECK(s.n == 256);
  CHECK(s.d_nq == doctest::Approx(d_nq(x, kUniform, 2)));
  CHECK(s.w1 == doctest::Approx(wasserstein1(x, kUniform)));
  CHECK(s.max_d_kq >= s.d_nq * (1 - 1e-12));
}
