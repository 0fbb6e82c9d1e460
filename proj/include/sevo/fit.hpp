#pragma once

#include <span>

namespace sevo {

/// Ordinary least squares of log(y) on log(x).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;   // natural log of the prefactor
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Inputs must be positive. A series whose logs are constant to within 1e-3
/// is treated as an exact flat fit (R^2 = 1): R^2 carries no information there.
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y);

}  // namespace sevo
