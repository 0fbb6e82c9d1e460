#include "sevo/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "sevo/error.hpp"
#include "sevo/fit.hpp"

namespace sevo::kernels {

namespace {

// phi1(z) = (1 - e^{-z}) / z, so that int_0^t e^{-cs} ds = t phi1(ct).
double phi1(double z) {
  if (z == 0.0) return 1.0;
  return -std::expm1(-z) / z;
}

// phi2(z) = (z - 1 + e^{-z}) / z^2, so that int_0^t (t-s) e^{-cs} ds = t^2 phi2(ct).
double phi2(double z) {
  if (std::abs(z) < 0.5) {
    // sum_j (-z)^j / (j+2)!
    double term = 0.5;
    double sum = term;
    for (int j = 1; j < 24; ++j) {
      term *= -z / (j + 2);
      sum += term;
    }
    return sum;
  }
  return (z + std::expm1(-z)) / (z * z);
}

// M_m(t) = int_0^t s^m e^{-s} ds for m = 0..5.
std::array<double, 6> exp_moments(double t) {
  std::array<double, 6> mom{};
  if (t < 1.0) {
    for (int m = 0; m < 6; ++m) {
      // sum_j (-1)^j t^{m+1+j} / (j! (m+1+j))
      double pow_t = std::pow(t, m + 1);
      double fact = 1.0;
      double sum = 0.0;
      for (int j = 0; j < 30; ++j) {
        if (j > 0) {
          pow_t *= -t;
          fact *= j;
        }
        sum += pow_t / (fact * (m + 1 + j));
      }
      mom[m] = sum;
    }
    return mom;
  }
  const double e = std::exp(-t);
  mom[0] = -std::expm1(-t);
  double pow_t = 1.0;
  for (int m = 1; m < 6; ++m) {
    pow_t *= t;
    mom[m] = m * mom[m - 1] - pow_t * e;
  }
  return mom;
}

}  // namespace

bool ModeSymbol::degenerate() const noexcept { return std::abs(a - 1.0) < kSeamWidth; }

PropagatorSample propagator(double t, double a) {
  if (!(t >= 0.0) || !(a >= 0.0) || !std::isfinite(t) || !std::isfinite(a))
    throw Error(ErrorCode::DomainError, "propagator needs finite t >= 0 and a >= 0");
  t = std::min(t, kMaxTime);
  PropagatorSample s;
  s.t = t;
  const double e1 = std::exp(-t);
  const double d = a - 1.0;
  if (std::abs(d) < kSeamWidth) {
    // Four-term expansion in d = a - 1 around the double root.
    const auto mom = exp_moments(t);
    double k1 = 0.0, i1 = 0.0, i2 = 0.0;
    double coef = 1.0;  // (-d)^{m-1} / m!
    double pow_t = 1.0;
    for (int m = 1; m <= 4; ++m) {
      coef /= m;
      pow_t *= t;
      k1 += coef * pow_t * e1;
      i1 += coef * mom[m];
      i2 += coef * (t * mom[m] - mom[m + 1]);
      coef *= -d;
    }
    s.k1 = k1;
    s.i1 = i1;
    s.i2 = i2;
  } else {
    const double ea = std::exp(-a * t);
    const double inv = 1.0 / (1.0 - a);
    s.k1 = (ea - e1) * inv;
    s.i1 = t * (phi1(a * t) - phi1(t)) * inv;
    s.i2 = t * t * (phi2(a * t) - phi2(t)) * inv;
  }
  s.k0 = s.k1 + e1;
  s.dk0 = -a * s.k1;
  s.dk1 = e1 - a * s.k1;
  return s;
}

double ode_residual(double t, double a, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::DomainError, "stencil width must be positive");
  const double he = h / (1.0 + a);
  double worst = 0.0;
  for (int which = 0; which < 2; ++which) {
    auto value = [&](double tt) {
      const auto p = propagator(tt, a);
      return which == 0 ? p.k0 : p.k1;
    };
    auto deriv = [&](double tt) {
      const auto p = propagator(tt, a);
      return which == 0 ? p.dk0 : p.dk1;
    };
    double second;
    if (t >= he) {
      second = (deriv(t + he) - deriv(t - he)) / (2.0 * he);
    } else {
      second = (-3.0 * deriv(t) + 4.0 * deriv(t + he) - deriv(t + 2.0 * he)) / (2.0 * he);
    }
    const double res = std::abs(second + (1.0 + a) * deriv(t) + a * value(t));
    worst = std::max(worst, res);
  }
  return worst;
}

std::vector<double> log_grid(double t_min, double t_max, std::size_t count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2)
    throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < t_min < t_max and >= 2 points");
  std::vector<double> g(count);
  const double l0 = std::log(t_min), l1 = std::log(t_max);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = t_min;
  g.back() = t_max;
  return g;
}

const char* regime_name(Regime r) noexcept { return r == Regime::L2L2 ? "L2L2" : "L1L2"; }

DecayProfile decay_profile(double s, Regime regime, int n, double sigma,
                           const std::vector<double>& t_grid) {
  if (!(s >= 0.0) || n < 1 || !(sigma >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "decay profile needs s >= 0, n >= 1, sigma >= 1");
  if (t_grid.size() < 2) throw Error(ErrorCode::EmptyWindow, "decay profile needs >= 2 times");

  DecayProfile prof;
  prof.regime = regime;
  prof.s = s;
  prof.n = n;
  prof.sigma = sigma;

  if (regime == Regime::L2L2) {
    const double theta = s / (2.0 * sigma);
    prof.expected = -theta;
    const auto a_grid = log_grid(1e-10, 1e6, 4001);
    for (double t : t_grid) {
      double best = theta == 0.0 ? std::abs(propagator(t, 0.0).k1) : 0.0;
      for (double a : a_grid) best = std::max(best, std::pow(a, theta) * std::abs(propagator(t, a).k1));
      prof.points.push_back({t, best});
    }
  } else {
    prof.expected = -n / (4.0 * sigma);
    const double omega = 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
    const double r_min = 1e-6;
    const auto r_grid = log_grid(r_min, 1.0, 2048);
    const double dlog = std::log(r_grid[1] / r_grid[0]);
    for (double t : t_grid) {
      // [0, r_min]: K1 is flat there to O(r_min^{2 sigma} t).
      const double k_low = propagator(t, 0.0).k1;
      double integral = omega * std::pow(r_min, n) / n * k_low * k_low;
      for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double r = r_grid[i];
        const double k1 = propagator(t, std::pow(r, 2.0 * sigma)).k1;
        const double w = (i == 0 || i + 1 == r_grid.size()) ? 0.5 : 1.0;
        integral += w * dlog * omega * std::pow(r, n) * k1 * k1;
      }
      prof.points.push_back({t, std::sqrt(integral)});
    }
  }

  std::vector<double> ts, vs;
  for (const auto& p : prof.points) {
    ts.push_back(p.t);
    vs.push_back(p.value);
  }
  const auto fit = fit_log_log(ts, vs);
  prof.slope = fit.slope;
  prof.intercept = fit.intercept;
  prof.r_squared = fit.r_squared;
  prof.slope_stderr = fit.slope_stderr;
  if (fit.r_squared < 0.99) {
    throw Error(ErrorCode::FitUnstable, "decay profile fit has R^2 = " + std::to_string(fit.r_squared));
  }
  return prof;
}

}  // namespace sevo::kernels
