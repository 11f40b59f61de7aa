#pragma once

#include <cstddef>
#include <vector>

namespace ergo {

// Continuous piecewise-linear distribution function on [0,1]: F(nodes[i]) = values[i],
// linear in between, nodes[0] = 0, nodes.back() = 1.  Carries the exact
// integrals the empirical statistics need.
class PiecewiseLinearCdf {
 public:
  PiecewiseLinearCdf() : PiecewiseLinearCdf({0.0, 1.0}, {0.0, 1.0}) {}
  PiecewiseLinearCdf(std::vector<double> nodes, std::vector<double> values);

  // F(t) = t.
  static PiecewiseLinearCdf uniform() { return {}; }

  double operator()(double t) const;

  // Index i of the cell [nodes[i], nodes[i+1]] containing t (last cell for t = 1).
  std::size_t cell(double t) const;

  // int_a^1 F(t) dt.
  double upper_integral(double a) const;

  // int_0^1 F(t)^2 dt.
  double square_integral() const { return square_integral_; }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> lower_integrals_;  // int_0^{nodes[i]} F
  double square_integral_ = 0;
};

}  // namespace ergo
