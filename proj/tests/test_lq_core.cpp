#include <doctest.h>

#include <cmath>
#include <random>

#include "ergo/lq_core.hpp"

using namespace ergo;
using Vec = LqVector<double>;

namespace {

Vec gaussian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = g(rng);
  return v;
}

}  // namespace

TEST_CASE("norm_q hand values") {
  const auto s = LqSpace<double>::counting(2, 2.0);
  CHECK(norm_q(s, Vec::Zero(2)) == 0.0);
  Vec x(2);
  x << 3, 4;
  CHECK(norm_q(s, x) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(psi_p(s, 2.0, x) == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(psi_p(s, 3.0, x) == doctest::Approx(125.0).epsilon(1e-14));
  CHECK(psi_p(s, 3.0, Vec::Zero(2)) == 0.0);
}

TEST_CASE("norm_q against long double re-summation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  Vec weights(64);
  for (int i = 0; i < 64; ++i) weights[i] = w(rng);
  const LqSpace<double> s(weights, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = gaussian(rng, 64);
    long double sum = 0;
    for (int i = 0; i < 64; ++i)
      sum += static_cast<long double>(weights[i]) * std::pow(std::fabs(static_cast<long double>(x[i])), 3.0L);
    const double oracle = static_cast<double>(std::pow(sum, 1.0L / 3.0L));
    CHECK(std::abs(norm_q(s, x) - oracle) <= 1e-13 * oracle);
  }
}

TEST_CASE("space contracts") {
  CHECK_THROWS_AS(LqSpace<double>::counting(0, 2.0), ContractViolation);
  CHECK_THROWS_AS(LqSpace<double>::counting(2, 1.5), ContractViolation);
  Vec w(2);
  w << 1, -1;
  CHECK_THROWS_AS(LqSpace<double>(w, 2.0), ContractViolation);
  const auto s = LqSpace<double>::counting(3, 2.0);
  CHECK_THROWS_AS(norm_q(s, Vec::Ones(2)), ContractViolation);
  CHECK_THROWS_AS(psi_p(s, 1.5, Vec::Ones(3)), ContractViolation);
}

TEST_CASE("d2_psi_p closed-form cases") {
  std::mt19937_64 rng(3);
  SUBCASE("h = v = x collapses to p(p-1)|x|^p") {
    for (double q : {2.0, 3.0, 4.5})
      for (double p : {2.0, 3.0, 5.0}) {
        const auto s = LqSpace<double>::counting(7, q);
        const Vec x = gaussian(rng, 7);
        CHECK(d2_psi_p(s, p, x, x, x) ==
              doctest::Approx(p * (p - 1) * psi_p(s, p, x)).epsilon(1e-12));
      }
  }
  SUBCASE("p = q drops the dual term") {
    const auto s = LqSpace<double>::counting(5, 3.0);
    const Vec x = gaussian(rng, 5), h = gaussian(rng, 5), v = gaussian(rng, 5);
    double sum = 0;
    for (int i = 0; i < 5; ++i) sum += h[i] * v[i] * std::abs(x[i]);
    CHECK(d2_psi_p(s, 3.0, x, h, v) == doctest::Approx(6.0 * sum).epsilon(1e-13));
  }
  SUBCASE("symmetry in h, v") {
    const auto s = LqSpace<double>::counting(9, 3.5);
    const Vec x = gaussian(rng, 9), h = gaussian(rng, 9), v = gaussian(rng, 9);
    CHECK(d2_psi_p(s, 2.5, x, h, v) == d2_psi_p(s, 2.5, x, v, h));
  }
  SUBCASE("x = 0") {
    const auto s2 = LqSpace<double>::counting(3, 2.0);
    const Vec h = gaussian(rng, 3), v = gaussian(rng, 3);
    CHECK(d2_psi_p(s2, 2.0, Vec::Zero(3), h, v) == doctest::Approx(2 * h.dot(v)));
    CHECK(d2_psi_p(s2, 3.0, Vec::Zero(3), h, v) == 0.0);
    const auto s4 = LqSpace<double>::counting(3, 4.0);
    CHECK_THROWS_AS(d2_psi_p(s4, 2.0, Vec::Zero(3), h, v), SingularPoint);
  }
}

TEST_CASE("d2_psi_p against finite differences") {
  std::mt19937_64 rng(5);
  SUBCASE("central difference, q=3, p=4, dim=16") {
    const auto s = LqSpace<double>::counting(16, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec x = gaussian(rng, 16), h = gaussian(rng, 16), v = gaussian(rng, 16);
      // Central mixed difference in long double.
      const auto sl = s.cast<long double>();
      const long double e = 1e-4L;
      const LqVector<long double> xl = x.cast<long double>(), hl = h.cast<long double>(),
                                  vl = v.cast<long double>();
      auto f = [&](long double a, long double b) {
        return psi_p(sl, 4.0L, LqVector<long double>(xl + a * hl + b * vl));
      };
      const long double fd = (f(e, e) - f(e, -e) - f(-e, e) + f(-e, -e)) / (4 * e * e);
      const double exact = d2_psi_p(s, 4.0, x, h, v);
      CHECK(std::abs(exact - static_cast<double>(fd)) <= 1e-5 * std::max(1.0, std::abs(exact)));
    }
  }
  SUBCASE("Richardson, q=4, p=3") {
    const auto s = LqSpace<long double>::counting(8, 4.0L);
    for (int trial = 0; trial < 10; ++trial) {
      const LqVector<long double> x = gaussian(rng, 8).cast<long double>(),
                                  h = gaussian(rng, 8).cast<long double>(),
                                  v = gaussian(rng, 8).cast<long double>();
      const long double exact = d2_psi_p(s, 3.0L, x, h, v);
      const long double fd = finite_diff_d2_richardson(s, 3.0L, x, h, v, 1e-4L);
      CHECK(std::abs(static_cast<double>(exact - fd)) <=
            1e-5 * std::max(1.0, std::abs(static_cast<double>(exact))));
    }
  }
  SUBCASE("exact on quadratics and zero direction") {
    const auto s = LqSpace<double>::counting(4, 2.0);
    const Vec x = gaussian(rng, 4), h = gaussian(rng, 4), v = gaussian(rng, 4);
    CHECK(finite_diff_d2(s, 2.0, x, h, v, 1e-3) == doctest::Approx(2 * h.dot(v)).epsilon(1e-8));
    CHECK(finite_diff_d2(s, 3.0, x, Vec::Zero(4), v, 1e-3) == 0.0);
  }
}

TEST_CASE("smoothness constants") {
  auto c = smoothness_constants(2, 2);
  CHECK(c.c_p == 2);
  CHECK(c.c_tilde_p == 2);
  c = smoothness_constants(4, 3);
  CHECK(c.c_p == 12);
  CHECK(c.c_tilde_p == 12);
  c = smoothness_constants(2, 4);
  CHECK(c.c_p == 6);
  CHECK(c.c_tilde_p == 10);
  CHECK_THROWS_AS(smoothness_constants(1.5, 2), ContractViolation);
}

TEST_CASE("check_smoothness") {
  SUBCASE("Hilbert case attains p(p-1) at u = v = x") {
    const auto r = check_smoothness(LqSpace<double>::counting(8, 2.0), 3.0, 10000, 7);
    CHECK(r.pass());
    CHECK(r.max_ratio <= 6.0 * (1 + 1e-12));
    CHECK(r.self_ratio == doctest::Approx(6.0).epsilon(1e-10));
  }
  SUBCASE("q=4, p=2 stays below c~ and beats the Hilbert constant") {
    const auto r = check_smoothness(LqSpace<double>::counting(8, 4.0), 2.0, 10000, 7);
    CHECK(r.pass());
    CHECK(r.max_ratio <= 10.0);
    CHECK(r.max_ratio > 2.0);
    CHECK(r.witness_x.size() == 8);
  }
  SUBCASE("deterministic per seed") {
    const auto s = LqSpace<double>::counting(4, 3.0);
    const auto a = check_smoothness(s, 4.0, 2000, 99);
    const auto b = check_smoothness(s, 4.0, 2000, 99);
    CHECK(a.max_ratio == b.max_ratio);
    CHECK(a.max_fd_rel_error == b.max_fd_rel_error);
  }
}

TEST_CASE("property: bilinear and diagonal bounds on random triples") {
  std::mt19937_64 rng(17);
  for (double q : {2.0, 3.0, 4.0})
    for (double p : {2.0, 3.0, 4.0}) {
      const auto s = LqSpace<double>::counting(6, q);
      const auto c = smoothness_constants(p, q);
      for (int trial = 0; trial < 300; ++trial) {
        const Vec x = gaussian(rng, 6), u = gaussian(rng, 6), v = gaussian(rng, 6);
        const double scale = std::pow(norm_q(s, x), p - 2);
        CHECK(std::abs(d2_psi_p(s, p, x, u, v)) <=
              c.c_tilde_p * scale * norm_q(s, u) * norm_q(s, v) * (1 + 1e-12));
        CHECK(std::abs(d2_psi_p(s, p, x, u, u)) <= c.c_p * scale * psi_p(s, 2.0, u) * (1 + 1e-12));
      }
    }
}
