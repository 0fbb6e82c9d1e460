#include "sevo/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sevo/error.hpp"

namespace sevo {

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit: size mismatch");
  if (x.size() < 2) throw Error(ErrorCode::EmptyWindow, "fit: need at least two points");
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw Error(ErrorCode::NonPositiveValues, "fit: log-log fit needs positive finite values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::EmptyWindow, "fit: abscissae are all equal");

  LogLogFit f;
  f.points = m;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += r * r;
    spread = std::max(spread, std::abs(ly[i] - my));
  }
  if (spread < 1e-3) {
    f.r_squared = 1.0;
  } else {
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  }
  f.slope_stderr = m > 2 ? std::sqrt(ss_res / (m - 2) / sxx) : 0.0;
  return f;
}

}  // namespace sevo
