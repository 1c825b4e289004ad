#include "atc/fit.hpp"

#include "atc/errors.hpp"

#include <cmath>

namespace atc {

FitResult fit_slope(const std::vector<std::pair<double, double>>& points, bool loglog) {
  if (points.size() < 3) throw ConstraintViolation("slope fit needs at least 3 points");
  std::vector<double> x, y;
  for (auto [px, py] : points) {
    if (loglog) {
      if (!(px > 0.0) || !(py > 0.0)) throw ConstraintViolation("log-log fit needs positive data");
      px = std::log(px);
      py = std::log(py);
    }
    if (!std::isfinite(px) || !std::isfinite(py)) throw ConstraintViolation("non-finite fit data");
    x.push_back(px);
    y.push_back(py);
  }
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 1e-300 || sxx <= 1e-24 * (mx * mx * n)) throw ConstraintViolation("degenerate abscissa");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace atc
