#include "ergo/cdf.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/errors.hpp"

namespace ergo {

PiecewiseLinearCdf::PiecewiseLinearCdf(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  require(nodes_.size() >= 2 && nodes_.size() == values_.size(),
          "PiecewiseLinearCdf: need >= 2 matching nodes and values");
  require(nodes_.front() == 0.0 && nodes_.back() == 1.0,
          "PiecewiseLinearCdf: nodes must span [0,1]");
  require(values_.front() == 0.0 && values_.back() == 1.0,
          "PiecewiseLinearCdf: F(0) = 0 and F(1) = 1 required");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    require(nodes_[i] > nodes_[i - 1], "PiecewiseLinearCdf: nodes must increase");
    require(values_[i] >= values_[i - 1], "PiecewiseLinearCdf: values must be nondecreasing");
  }
  lower_integrals_.assign(nodes_.size(), 0.0);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const double w = nodes_[i] - nodes_[i - 1];
    const double a = values_[i - 1];
    const double b = values_[i];
    lower_integrals_[i] = lower_integrals_[i - 1] + 0.5 * w * (a + b);
    square_integral_ += w * (a * a + a * b + b * b) / 3.0;
  }
}

std::size_t PiecewiseLinearCdf::cell(double t) const {
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  if (it == nodes_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(idx, nodes_.size() - 2);
}

double PiecewiseLinearCdf::operator()(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("cdf: t outside [0,1]");
  const std::size_t i = cell(t);
  const double w = nodes_[i + 1] - nodes_[i];
  const double s = (t - nodes_[i]) / w;
  return values_[i] + s * (values_[i + 1] - values_[i]);
}

double PiecewiseLinearCdf::upper_integral(double a) const {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("cdf: a outside [0,1]");
  const std::size_t i = cell(a);
  const double Fa = (*this)(a);
  const double partial = 0.5 * (a - nodes_[i]) * (values_[i] + Fa);
  return lower_integrals_.back() - (lower_integrals_[i] + partial);
}

}  // namespace ergo
