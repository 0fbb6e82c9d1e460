#pragma once

// Experiment drivers: power-law fits with verdicts, decay-rate experiments,
// blow-up runs, lifespan sweeps and convergence studies.

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sevo/exponents.hpp"
#include "sevo/grid.hpp"
#include "sevo/solver.hpp"

namespace sevo::harness {

using exponents::SystemParams;
using solver::InitialData;
using solver::RunResult;

struct Window {
  double t_min = 0.0;
  double t_max = 0.0;
};

/// Slope of log y against log t with a verdict. The pass interval is
/// [expected_low - tolerance, expected_high + tolerance]; a point expectation
/// has expected_low = expected_high = expected.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
  Window window;
  double expected = 0.0;
  double expected_low = 0.0;
  double expected_high = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

constexpr double kMinRSquared = 0.98;
constexpr std::size_t kMinFitPoints = 8;

/// Verdict for a fitted slope against [low, high] widened by tolerance.
bool fit_verdict(double slope, double r_squared, double low, double high, double tolerance);

/// Least squares on the points with t inside the window. Throws EmptyWindow
/// below `min_points` points and NonPositiveValues for y <= 0 in the window.
FitResult fit_power_law(std::span<const double> t, std::span<const double> y, Window window,
                        double expected, double tolerance,
                        std::size_t min_points = kMinFitPoints);
/// Same with an expected interval.
FitResult fit_power_law_range(std::span<const double> t, std::span<const double> y, Window window,
                        double expected_low, double expected_high, double tolerance,
                        std::size_t min_points = kMinFitPoints);

struct PeriodizationError {
  double l2 = 0.0;      // torus sum / free-space integral - 1 for |u_hat|^2
  double hsigma = 0.0;  // same with the weight |xi|^{2 sigma}
  double worst() const noexcept;
};

/// Discrepancy between torus Parseval sums and the free-space integrals
/// (2 pi)^{-n} int w(xi) |u_hat|^2 for the linear evolution of one Gaussian
/// component at time t. The zero mode inflates the L2 sum and the missing
/// low modes deflate the H^sigma sum once the solution spreads to the box scale.
PeriodizationError periodization_error(const GridSpec& grid, double sigma,
                                       const solver::ComponentData& data, double t);

/// First time on `times` (at or after t_min) where |error| of any component
/// reaches `threshold`; the previous time closes the window. The last time if
/// never.
double free_space_horizon(const GridSpec& grid, double sigma, const InitialData& data,
                          std::span<const double> times, double t_min, double threshold = 0.1);

struct XnormRow {
  double t = 0.0;
  std::vector<double> value;  // per component
};

struct XnormDiagnostic {
  std::vector<double> loss;   // eps_l per component, eps_k = 0
  std::vector<XnormRow> rows;
  std::vector<double> ratio;  // max / min per component over the window
  bool bounded = false;       // every ratio below 10
};

/// (1 + t)^{n/(4 sigma) - eps_l} ||u_l|| + (1 + t)^{n/(4 sigma) + 1/2 - eps_l} || |D|^sigma u_l ||
/// over the series rows with t <= t_max. Loss values come from the exponent
/// report at `eps` (zero in the linear case or when the report has none).
XnormDiagnostic xnorm_diagnostic(const RunResult& run, const SystemParams& params, double eps,
                                 double t_max, bool nonlinear = true);

struct DecayConfig {
  SystemParams params;
  GridSpec grid;
  InitialData data;
  double t_end = 1e4;
  double dt = 0.1;
  int records_per_decade = 20;
  double t_min = 20.0;
  double window_threshold = 0.1;
  double loss_eps = 0.01;  // the small eps of the loss-of-decay sequence
  double tolerance = 0.1;
  bool nonlinear = true;
};

struct ComponentDecay {
  FitResult l2;
  FitResult hsigma;
};

struct DecayExperiment {
  Window window;
  std::vector<ComponentDecay> fits;
  XnormDiagnostic xnorm;
  RunResult run;
  bool interrupted = false;  // run cut short; no fits
  bool pass = false;
};

/// Runs the solver to t_end and fits every norm series on [t_min, t2], t2 from
/// free_space_horizon. Expected slopes: [-n/(4 sigma), -n/(4 sigma) + eps_l] for
/// the L2 norm of components l < k (the Hsigma norm shifted by -1/2), the
/// linear rate for the last one. Throws ConditionsUnmet when the global
/// hypotheses fail (nonlinear runs only) and BlowUpDuringDecayExperiment.
DecayExperiment decay_experiment(const DecayConfig& cfg);

struct BlowupConfig {
  SystemParams params;
  GridSpec grid;
  InitialData data;
  double t_cap = 1e3;
  double dt = 0.05;
  bool adaptive = true;
  int records_per_decade = 20;
  double blowup_threshold = 1e8;
};

struct BlowupExperiment {
  bool expected_blowup = false;  // subcritical classification
  RunResult run;
  bool pass = false;
};

/// Single run to t_cap. Passes when the outcome matches the classification:
/// blow-up before the cap for subcritical systems, none otherwise.
BlowupExperiment blowup_experiment(const BlowupConfig& cfg);

struct LifespanConfig {
  SystemParams params;
  GridSpec grid;
  InitialData shape;  // epsilon is replaced per run
  std::vector<double> epsilons;
  double dt = 0.05;
  bool adaptive = true;
  double first_cap = 1e3;  // cap for the largest epsilon
  double cap_factor = 100.0;
  double tolerance = 0.3;
  int records_per_decade = 10;
  double blowup_threshold = 1e8;
};

struct LifespanPoint {
  double epsilon = 0.0;
  std::optional<double> lifespan;
  double uncertainty = 0.0;
  double cap = 0.0;
  bool exceeded_cap = false;
  std::size_t steps = 0;
  bool interrupted = false;
};

struct LifespanSweep {
  double expected = 0.0;  // lifespan exponent
  std::vector<LifespanPoint> points;  // in the order of cfg.epsilons
  std::optional<FitResult> fit;       // absent with fewer than 4 blow-ups
  bool monotone = false;              // T nonincreasing in eps over the blow-ups
  bool interrupted = false;
  bool pass = false;
};

constexpr std::size_t kMinLifespanPoints = 4;

/// Fits T(eps) and applies the verdict. Missing lifespans are skipped.
LifespanSweep assess_lifespans(std::vector<LifespanPoint> points, double expected,
                               double tolerance);

/// Throws NotSubcritical before any run for non-subcritical systems and
/// InvalidArgument for non-positive data means. The largest epsilon runs first
/// with cfg.first_cap; the others get cap_factor * T_max * (eps / eps_max)^expected
/// and run in parallel.
LifespanSweep lifespan_sweep(const LifespanConfig& cfg);

struct ConvergenceConfig {
  SystemParams params;
  GridSpec grid;
  InitialData data;
  double t_end = 1.0;
  std::vector<double> dt_ladder{1e-2, 5e-3, 2.5e-3};
  double dt_reference = 3.125e-4;
  std::vector<std::size_t> N_ladder{128, 256, 512};
  double ratio_target = 4.0;
  double ratio_tolerance = 1.0;
  double tail_limit = 1e-10;
  double spatial_epsilon = 1e-3;  // data size of the N ladder runs
};

struct TemporalRow {
  double dt = 0.0;
  double error = 0.0;        // relative L2 distance to the reference at t_end
  double ratio = std::numeric_limits<double>::quiet_NaN();  // previous error / this error
  double linear_error = 0.0; // same with the nonlinearity off
};

struct SpatialRow {
  std::size_t N = 0;
  double tail = 0.0;  // max |c_m| over N/4 <= |m| < N/2, relative to max |c_m|
};

struct ConvergenceTable {
  std::vector<TemporalRow> temporal;
  std::vector<SpatialRow> spatial;
  double observed_order = 0.0;  // log2 of the last ratio
  bool temporal_pass = false;
  bool spatial_pass = false;
  bool pass = false;
};

/// Fixed-step runs to t_end. Needs at least 3 entries in each ladder.
ConvergenceTable convergence_study(const ConvergenceConfig& cfg);

}  // namespace sevo::harness
