#pragma once

#include <utility>
#include <vector>

namespace atc {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares, on (log x, log y) when loglog is set.  Needs at
// least three points; throws ConstraintViolation otherwise and when all x
// coincide.
FitResult fit_slope(const std::vector<std::pair<double, double>>& points, bool loglog = true);

}  // namespace atc
