#pragma once

// Weighted finite-dimensional l^q spaces standing in for L^q(X, mu), the norm
// power psi_p(x) = |x|_q^p, and its first and second directional derivatives.
//
// Everything is templated on the scalar so the same formulas can be evaluated
// in long double as a reference for the double path.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "ergo/errors.hpp"

namespace ergo {

template <typename Scalar = double>
class LqSpace {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LqSpace(Vector weights, Scalar q) : weights_(std::move(weights)), q_(q) {
    require(weights_.size() >= 1, "LqSpace: dim must be >= 1");
    require(q_ >= Scalar(2), "LqSpace: q must be >= 2");
    for (Eigen::Index i = 0; i < weights_.size(); ++i)
      require(weights_[i] > Scalar(0) && std::isfinite(static_cast<double>(weights_[i])),
              "LqSpace: weights must be positive and finite");
  }

  // Counting measure: all masses equal to one.
  static LqSpace counting(Eigen::Index dim, Scalar q) {
    require(dim >= 1, "LqSpace: dim must be >= 1");
    return LqSpace(Vector::Ones(dim), q);
  }

  Eigen::Index dim() const { return weights_.size(); }
  Scalar q() const { return q_; }
  const Vector& weights() const { return weights_; }

  template <typename Derived>
  void check(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim())
      throw ContractViolation("LqSpace: vector of length " + std::to_string(x.size()) +
                              " does not match dim " + std::to_string(dim()));
  }

  template <typename OtherScalar>
  LqSpace<OtherScalar> cast() const {
    return LqSpace<OtherScalar>(weights_.template cast<OtherScalar>(), static_cast<OtherScalar>(q_));
  }

 private:
  Vector weights_;
  Scalar q_;
};

template <typename Scalar = double>
using LqVector = typename LqSpace<Scalar>::Vector;

namespace detail {

// |t|^e with exact small-integer fast paths and 0^0 = 1.
template <typename Scalar>
Scalar abs_pow(Scalar t, Scalar e) {
  const Scalar a = std::abs(t);
  if (e == Scalar(0)) return Scalar(1);
  if (e == Scalar(1)) return a;
  if (e == Scalar(2)) return a * a;
  if (e == Scalar(3)) return a * a * a;
  if (e == Scalar(4)) {
    const Scalar s = a * a;
    return s * s;
  }
  return std::pow(a, e);
}

template <typename Scalar>
void check_p(Scalar p) {
  if (!(p >= Scalar(2))) throw ContractViolation("psi_p: p must be >= 2");
}

}  // namespace detail

template <typename Scalar, typename Derived>
Scalar norm_q(const LqSpace<Scalar>& space, const Eigen::MatrixBase<Derived>& x) {
  space.check(x);
  const Scalar q = space.q();
  Scalar sum(0);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    sum += space.weights()[i] * detail::abs_pow<Scalar>(x[i], q);
  if (sum == Scalar(0)) return Scalar(0);
  if (q == Scalar(2)) return std::sqrt(sum);
  return std::pow(sum, Scalar(1) / q);
}

template <typename Scalar, typename Derived>
Scalar psi_p(const LqSpace<Scalar>& space, Scalar p, const Eigen::MatrixBase<Derived>& x) {
  detail::check_p(p);
  const Scalar n = norm_q(space, x);
  if (n == Scalar(0)) return Scalar(0);
  if (p == Scalar(2)) return n * n;
  return std::pow(n, p);
}

// D psi_p(x)(h) = p |x|_q^{p-q} sum_i w_i h_i x_i |x_i|^{q-2}.
template <typename Scalar, typename D1, typename D2>
Scalar d_psi_p(const LqSpace<Scalar>& space, Scalar p, const Eigen::MatrixBase<D1>& x,
               const Eigen::MatrixBase<D2>& h) {
  detail::check_p(p);
  space.check(h);
  const Scalar nx = norm_q(space, x);
  if (nx == Scalar(0)) return Scalar(0);
  const Scalar q = space.q();
  Scalar dual(0);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    dual += space.weights()[i] * detail::abs_pow<Scalar>(x[i], q - Scalar(2)) * x[i] * h[i];
  return p * std::pow(nx, p - q) * dual;
}

// Explicit second derivative of psi_p on L^q:
//   p(q-1)|x|^{p-q} sum w h v |x|^{q-2} + p(p-q)|x|^{p-2q} (sum w v x|x|^{q-2})(sum w h x|x|^{q-2}).
// At x = 0 the continuous extension is 0 for p > 2; for p = 2 it exists only when q = 2.
// Both the h.v products and the final product of duals are formed symmetrically,
// so d2_psi_p(x,h,v) == d2_psi_p(x,v,h) bit for bit.
template <typename Scalar, typename D1, typename D2, typename D3>
Scalar d2_psi_p(const LqSpace<Scalar>& space, Scalar p, const Eigen::MatrixBase<D1>& x,
                const Eigen::MatrixBase<D2>& h, const Eigen::MatrixBase<D3>& v) {
  detail::check_p(p);
  space.check(h);
  space.check(v);
  const Scalar q = space.q();
  const auto& w = space.weights();
  const Scalar nx = norm_q(space, x);
  if (nx == Scalar(0)) {
    if (p > Scalar(2)) return Scalar(0);
    if (q != Scalar(2))
      throw SingularPoint("d2_psi_p: second derivative undefined at x = 0 for p = 2 < q");
    Scalar s(0);
    for (Eigen::Index i = 0; i < h.size(); ++i) s += w[i] * (h[i] * v[i]);
    return Scalar(2) * s;
  }
  Scalar quad(0), dual_h(0), dual_v(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar wx = w[i] * detail::abs_pow<Scalar>(x[i], q - Scalar(2));
    quad += wx * (h[i] * v[i]);
    dual_h += wx * x[i] * h[i];
    dual_v += wx * x[i] * v[i];
  }
  Scalar result = p * (q - Scalar(1)) * std::pow(nx, p - q) * quad;
  if (p != q) result += p * (p - q) * std::pow(nx, p - Scalar(2) * q) * (dual_h * dual_v);
  return result;
}

// (psi(x + eps h + eps v) - psi(x + eps h) - psi(x + eps v) + psi(x)) / eps^2.
template <typename Scalar, typename D1, typename D2, typename D3>
Scalar finite_diff_d2(const LqSpace<Scalar>& space, Scalar p, const Eigen::MatrixBase<D1>& x,
                      const Eigen::MatrixBase<D2>& h, const Eigen::MatrixBase<D3>& v, Scalar eps) {
  require(eps > Scalar(0), "finite_diff_d2: eps must be > 0");
  space.check(x);
  space.check(h);
  space.check(v);
  using Vec = LqVector<Scalar>;
  const Vec xh = x + eps * h;
  const Vec xv = x + eps * v;
  const Vec xhv = xh + eps * v;
  return (psi_p(space, p, xhv) - psi_p(space, p, xh) - psi_p(space, p, xv) + psi_p(space, p, x)) /
         (eps * eps);
}

// One Richardson level on the forward difference: error O(eps^2) instead of O(eps).
template <typename Scalar, typename D1, typename D2, typename D3>
Scalar finite_diff_d2_richardson(const LqSpace<Scalar>& space, Scalar p,
                                 const Eigen::MatrixBase<D1>& x, const Eigen::MatrixBase<D2>& h,
                                 const Eigen::MatrixBase<D3>& v, Scalar eps = Scalar(1e-4)) {
  return Scalar(2) * finite_diff_d2(space, p, x, h, v, eps / Scalar(2)) -
         finite_diff_d2(space, p, x, h, v, eps);
}

struct SmoothnessConstants {
  double c_p;        // diagonal constant: |D2 psi(x)(u,u)| <= c_p |x|^{p-2} |u|^2
  double c_tilde_p;  // bilinear constant: |D2 psi(x)(u,v)| <= c~_p |x|^{p-2} |u| |v|
};

inline SmoothnessConstants smoothness_constants(double p, double q) {
  require(p >= 2 && q >= 2, "smoothness_constants: need p >= 2 and q >= 2");
  return {p * (std::max(p, q) - 1.0), p * (std::max(p, 2.0 * q - p) - 1.0)};
}

struct SmoothnessReport {
  double p = 0;
  double q = 0;
  int dim = 0;
  int samples = 0;
  double max_ratio = 0;           // sup |D2(x)(u,v)| / (|x|^{p-2}|u||v|)
  double bound_c_tilde = 0;
  double max_diag_ratio = 0;      // same with u = v
  double bound_c = 0;
  double self_ratio = 0;          // ratio at u = v = x; equals p(p-1) when q = 2
  double max_fd_rel_error = 0;
  int violations = 0;
  LqVector<double> witness_x, witness_u, witness_v;

  bool pass(double fd_tolerance = 1e-4) const {
    return violations == 0 && max_ratio <= bound_c_tilde * (1 + 1e-12) &&
           max_diag_ratio <= bound_c * (1 + 1e-12) && max_fd_rel_error <= fd_tolerance;
  }
};

struct SmoothnessOptions {
  int fd_samples = 200;
  double fd_eps = 1e-4;
  // Random-walk refinement steps started from the best random triple.
  int refine_steps = 2000;
};

// Randomized certification of the Lq smoothness constants over Gaussian
// triples plus structured candidates (u = v = x, coordinate vectors, sign
// patterns, dual directions).  Deterministic for a given seed.
SmoothnessReport check_smoothness(const LqSpace<double>& space, double p, int n_samples,
                                  std::uint64_t seed, const SmoothnessOptions& options = {});

}  // namespace ergo
