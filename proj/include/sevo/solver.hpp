#pragma once

// Pseudo-spectral exponential integrator for the coupled system on a periodic
// box. Each step applies the exact per-mode linear propagator and integrates
// the Duhamel term with the nonlinearity interpolated linearly in time
// (predictor-corrector, second order).

#include <map>
#include <optional>
#include <vector>

#include "sevo/exponents.hpp"
#include "sevo/grid.hpp"

namespace sevo::solver {

using exponents::SystemParams;

struct ComponentData {
  double a0 = 1.0;     // u_0 = eps * a0 * exp(-|x - c|^2 / w^2)
  double a1 = 1.0;     // u_1 = eps * a1 * exp(-|x - c|^2 / w^2)
  double width = 1.0;  // w
  std::vector<double> center;  // empty means the origin

  bool operator==(const ComponentData&) const = default;
};

struct InitialData {
  double epsilon = 1.0;
  std::vector<ComponentData> components;

  bool operator==(const InitialData&) const = default;
};

struct FieldState {
  double time = 0.0;
  std::vector<Spectrum> u_hat;
  std::vector<Spectrum> v_hat;
  /// Physical u per component, kept in sync by Solver.
  std::vector<RealField> u_phys;
  bool blown_up = false;

  std::size_t components() const noexcept { return u_hat.size(); }
};

struct DataReport {
  std::vector<double> mean_u0;
  std::vector<double> mean_u1;
  /// ||u0||_{L1} + ||u0||_{H^sigma} + ||u1||_{L1} + ||u1||_{L2} per component.
  std::vector<double> data_norm;
  double total_norm = 0.0;
};

struct ComponentNorms {
  double l2 = 0.0;
  double hsigma = 0.0;  // || |D|^sigma u ||_{L2}
  double sup = 0.0;
  double mean = 0.0;
};

struct SolverOptions {
  bool nonlinear = true;
  bool dealias = true;
  double blowup_threshold = 1e8;
};

struct StepReport {
  bool blowup = false;
  std::vector<double> sup;
  double imag_ratio = 0.0;  // max |Im u| / max |Re u| over components
};

class Solver {
 public:
  Solver(SystemParams params, GridSpec grid, SolverOptions options = {});

  const Grid& grid() const noexcept { return grid_; }
  const SystemParams& params() const noexcept { return params_; }
  const SolverOptions& options() const noexcept { return options_; }
  const Fft& fft() const noexcept { return fft_; }

  /// Spectral initial state from Gaussian data. Throws DataLeakage when a
  /// Gaussian exceeds 1e-8 of its peak at the box boundary.
  FieldState make_initial_data(const InitialData& data, DataReport* report = nullptr) const;

  /// Builds a state from spectral coefficients (u_phys is recomputed).
  FieldState make_state(std::vector<Spectrum> u_hat, std::vector<Spectrum> v_hat,
                        double time = 0.0) const;

  /// Advances in place by dt. On blow-up (sup above threshold or non-finite)
  /// the state is still advanced and marked.
  StepReport step(FieldState& state, double dt);

  std::vector<ComponentNorms> norms(const FieldState& state) const;

  /// Nonlinear source spectra |u_{l-1}|^{p_l} (dealiased) for every component.
  std::vector<Spectrum> nonlinear_terms(const std::vector<RealField>& u_phys) const;

 private:
  struct Coefficients {
    std::vector<double> k0, k1, dk0, dk1, i1, i2;
  };
  const Coefficients& coefficients(double dt);
  void refresh(FieldState& state, StepReport* report) const;

  SystemParams params_;
  Grid grid_;
  Fft fft_;
  SolverOptions options_;
  std::map<double, Coefficients> cache_;
};

struct RunConfig {
  double t_end = 1.0;
  double dt = 0.05;
  bool adaptive = false;   // halve dt when sup changes by more than 10% in a step
  double dt_min = 1e-12;
  int records_per_decade = 20;
  double first_record = 0.01;
  std::vector<double> snapshot_times;  // full-field snapshots (sorted)
  bool nonlinear = true;
  double blowup_threshold = 1e8;

  bool operator==(const RunConfig&) const = default;
};

struct NormRow {
  double t = 0.0;
  std::vector<ComponentNorms> comps;
};

struct Snapshot {
  double t = 0.0;
  std::vector<RealField> u;  // physical field per component
};

struct RunResult {
  std::vector<NormRow> series;
  bool blowup = false;
  std::optional<double> blowup_time;
  double blowup_uncertainty = 0.0;
  double t_final = 0.0;
  double max_imag_ratio = 0.0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  bool interrupted = false;
  std::vector<Snapshot> snapshots;
  DataReport data;
};

/// Output schedule: 0, then records_per_decade log-spaced times per decade
/// from first_record, then t_end; merged with snapshot times.
std::vector<double> output_schedule(const RunConfig& cfg);

RunResult run(const SystemParams& params, const GridSpec& grid, const InitialData& data,
              const RunConfig& cfg);

/// Same, from an explicit starting state.
RunResult run_from(Solver& solver, FieldState state, const RunConfig& cfg);

}  // namespace sevo::solver
