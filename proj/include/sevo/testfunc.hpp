#pragma once

// Test-function machinery for the blow-up argument: sigma_bar, the spatial
// weight psi(x) = <x>^{-n - 2 sigma_bar}, the time cutoff eta, their product
// Phi_R, spectral fractional Laplacians on periodic grids, and the numeric
// certificates built from them.

#include <span>
#include <vector>

#include "sevo/grid.hpp"
#include "sevo/solver.hpp"

namespace sevo::testfunc {

/// 1 when sigma is an integer (within 1e-12), else its fractional part.
double sigma_bar(double sigma);

struct TestFunctionParams {
  int n = 1;
  double sigma = 1.0;
  double R = 1.0;
  int mu = 16;  // eta = (1 - s^3)^mu on the transition layer

  double sbar() const { return sigma_bar(sigma); }
  /// Spatial decay order n + 2 sigma_bar.
  double q() const { return n + 2.0 * sbar(); }
};

/// <x>^{-q} evaluated from |x|^2.
double bracket_power(double r2, double q);
/// psi(x) = (1 + |x|^2)^{-n/2 - sbar}.
double psi(std::span<const double> x, int n, double sbar);

struct EtaSample {
  double value = 1.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// eta(t) = 1 on [0, 1/2], (1 - s^3)^mu with s = 2t - 1 on (1/2, 1), 0 for
/// t >= 1. C^2 across t = 1/2.
EtaSample eta(double t, int mu = 16);
/// int_0^1 eta(t) dt.
double eta_integral(int mu = 16);

/// Phi_R(t, x) = eta(R^{-2 sigma} t) psi(x / R).
double phi_R(double t, std::span<const double> x, const TestFunctionParams& tp);

/// (-Delta)^nu through the multiplier |xi|^{2 nu}. The checked variant throws
/// DataLeakage when |field| on the box boundary exceeds 1e-10 of its peak.
RealField frac_laplacian_grid(const GridSpec& grid, std::span<const double> field, double nu);
RealField frac_laplacian_unchecked(const GridSpec& grid, std::span<const double> field, double nu);

/// Weight exponent of the pointwise bound for (-Delta)^nu <x>^{-q}: n + 2m when
/// nu = m is an integer, n + 2s when nu = m + s with s in (0, 1).
double weighted_decay_exponent(double nu, int n);

struct WeightedDecayResult {
  double nu = 0.0;
  double q = 0.0;
  double weight_exponent = 0.0;
  double ratio_coarse = 0.0;  // grid with N points
  double ratio_fine = 0.0;    // grid with 2N points, same L
  double relative_change = 0.0;
  bool stable = false;        // relative_change < 10%
};

/// sup over |x| <= L/4 of |(-Delta)^nu <x>^{-q}| <x>^{weight} on one grid.
double weighted_decay_ratio(double nu, double q, const GridSpec& grid);
/// The ratio on `grid` and on the same box with twice the points.
WeightedDecayResult check_weighted_decay(double nu, double q, const GridSpec& grid);

struct ScalingLevel {
  double dx = 0.0;
  std::size_t N = 0;
  double error = 0.0;
};

struct ScalingResult {
  double nu = 0.0;
  double R = 1.0;
  double q = 0.0;
  std::vector<ScalingLevel> levels;  // one per dx, coarse to fine
  double error = 0.0;                // finest level
  bool decreasing = false;
};

/// max over |x| <= L/4 of |(-Delta)^nu (phi_R)(x) - R^{-2 nu} ((-Delta)^nu phi)(x / R)|,
/// divided by max |R^{-2 nu} ((-Delta)^nu phi)|, with phi = <x>^{-q}, on one
/// centred grid of half-length 64 R and spacing dx. n = 1 or 2.
double scaling_identity_error(double nu, double R, double q, int n, double dx);
ScalingResult check_scaling_identity(double nu, double R, double q = 3.0, int n = 1,
                              const std::vector<double>& dx_ladder = {0.5, 0.25, 0.125});

struct EtaCondition {
  double lambda = 2.0;
  double lambda_conj = 2.0;
  int mu = 16;
  double sup = 0.0;           // over the sampled t in [1/2, 1)
  double approach_sup = 0.0;  // over 1 - t <= 1e-3
  double exponent = 0.0;      // mu - 2 lambda', the power of (1 - t) near t = 1
  double closest = 0.0;       // smallest sampled 1 - t
  bool violated = false;      // approach_sup above 1e6
};

/// Samples eta^{-lambda'/lambda} (|eta'|^{lambda'} + |eta''|^{lambda'}) on
/// [1/2, 1) with 1 - t down to 1e-8. The condition counts as violated when the
/// quantity exceeds 1e6 on the approach 1 - t <= 1e-3 to the zero of eta.
EtaCondition eta_condition(double lambda, int mu = 16);
/// Same, throwing ConditionViolated (with the exponent) when violated.
EtaCondition verify_eta_condition(double lambda, int mu = 16);

/// Snapshot times for F_R quadrature: 0, log-spaced up to R^{2 sigma}/2, then
/// `dense` uniform nodes on [R^{2 sigma}/2, R^{2 sigma}], merged over R values.
std::vector<double> functional_schedule(const std::vector<double>& R_values, double sigma,
                                        int log_nodes = 24, int dense = 32);

/// F_R = int int |u|^p Phi_R dx dt: trapezoid in t over the snapshots inside
/// [0, R^{2 sigma}] (closed with eta = 0 at R^{2 sigma}), grid sum in x.
/// Throws InsufficientSnapshots below 16 nodes.
double functional_F_R(const std::vector<solver::Snapshot>& snapshots, const GridSpec& grid,
                      std::size_t component, double p, const TestFunctionParams& tp);

struct FunctionalScaling {
  std::vector<double> R;
  std::vector<double> F;
  double slope = 0.0;
  double r_squared = 0.0;
  double reference = 0.0;  // -2 sigma + (n + 2 sigma)/p'
};

FunctionalScaling functional_scaling(const std::vector<solver::Snapshot>& snapshots,
                                     const GridSpec& grid, std::size_t component, double p,
                                     const std::vector<double>& R_values, double sigma, int mu = 16);

struct GnScalingRow {
  double dilation = 1.0;
  double lhs = 0.0;  // ||u||_{L^q}
  double rhs = 0.0;  // ||u||_{L^2}^{1 - theta} || |D|^s u ||_{L^2}^theta
  double ratio = 0.0;
};

struct GnScaling {
  double theta = 0.0;
  std::vector<GnScalingRow> rows;
  double spread = 0.0;  // max ratio / min ratio - 1
};

/// Gaussians u(x) = exp(-|lambda x|^2) for each dilation lambda, with the
/// interpolation q1 = q2 = 2, a = 0. L^q by grid quadrature, L^2 and H^s by
/// Parseval.
GnScaling gn_scaling_check(double q, double s, int n, const std::vector<double>& dilations,
                           const GridSpec& grid);

}  // namespace sevo::testfunc
