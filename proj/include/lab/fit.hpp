#pragma once

#include <span>

namespace lab::fit {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of log y on log x after dropping the
/// `drop_smallest` rows with the smallest x. Needs >= 4 remaining points,
/// all strictly positive. r2 is 1 when y is constant.
SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, int drop_smallest = 0);

}  // namespace lab::fit
