#pragma once

#include <span>

namespace ergo {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double slope_se = 0;
};

// Weighted least squares line through (x, y); empty weights means equal weights.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

}  // namespace ergo
