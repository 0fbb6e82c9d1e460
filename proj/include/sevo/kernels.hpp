#pragma once

// Fourier multipliers of the linear damped sigma-evolution equation. Per mode
// with symbol a = |xi|^{2 sigma} the equation reads
//
//   u'' + (1 + a) u' + a u = 0,    roots -a and -1,
//
// and K0, K1 are the solutions with (u, u')(0) = (1, 0) and (0, 1).

#include <string>
#include <vector>

namespace sevo::kernels {

/// |a - 1| below this switches to the expansion around the double root.
constexpr double kSeamWidth = 1e-4;
/// Propagation times are clamped here; exponentials underflow to zero beyond.
constexpr double kMaxTime = 1e6;

struct ModeSymbol {
  double a = 0.0;

  double lambda_plus() const noexcept { return -a; }
  double lambda_minus() const noexcept { return -1.0; }
  bool degenerate() const noexcept;
};

struct PropagatorSample {
  double t = 0.0;
  double k0 = 1.0;
  double k1 = 0.0;
  double dk0 = 0.0;
  double dk1 = 1.0;
  double i1 = 0.0;  // int_0^t K1(s) ds
  double i2 = 0.0;  // int_0^t (t - s) K1(s) ds
};

/// Closed-form multipliers at time t >= 0 for symbol a >= 0.
PropagatorSample propagator(double t, double a);

/// max over K0, K1 of |u'' + (1 + a) u' + a u| at t. u' is the analytic
/// derivative and u'' a centred difference of it with stencil h / (1 + a)
/// (one-sided second order near t = 0).
double ode_residual(double t, double a, double h);

enum class Regime { L2L2, L1L2 };

struct ProfilePoint {
  double t = 0.0;
  double value = 0.0;
};

struct DecayProfile {
  Regime regime = Regime::L2L2;
  double s = 0.0;
  int n = 1;
  double sigma = 1.0;
  std::vector<ProfilePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  double expected = 0.0;
};

/// L2L2: sup_a a^{s/(2 sigma)} |K1(t, a)| on a log-spaced a-grid.
/// L1L2: (int_{|xi| <= 1} |K1(t, |xi|^{2 sigma})|^2 dxi)^{1/2} by radial
/// quadrature on 2048 log-uniform nodes in [1e-6, 1].
/// Fits log value against log t; throws FitUnstable if R^2 < 0.99.
DecayProfile decay_profile(double s, Regime regime, int n, double sigma,
                           const std::vector<double>& t_grid);

/// Log-spaced times, `count` points from t_min to t_max inclusive.
std::vector<double> log_grid(double t_min, double t_max, std::size_t count);

const char* regime_name(Regime r) noexcept;

}  // namespace sevo::kernels
