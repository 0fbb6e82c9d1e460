#pragma once

// Experiment configuration, tabular and JSON persistence, and log-log SVG plots.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sevo/exponents.hpp"
#include "sevo/grid.hpp"
#include "sevo/solver.hpp"

namespace sevo::io {

using Json = nlohmann::json;

enum class ExperimentKind { Exponents, Kernels, Simulate, Decay, Blowup, Lifespan, Testfunc, Convergence };

const char* kind_name(ExperimentKind kind) noexcept;
/// Throws Usage for unknown names.
ExperimentKind parse_kind(const std::string& name);

struct RunSettings {
  double t_end = 1e4;
  double dt = 0.1;
  bool adaptive = false;
  int records_per_decade = 20;
  bool nonlinear = true;
  double blowup_threshold = 1e8;
  bool operator==(const RunSettings&) const = default;
};

struct DecaySettings {
  double t_min = 20.0;
  double loss_eps = 0.01;
  bool operator==(const DecaySettings&) const = default;
};

struct LifespanSettings {
  std::vector<double> epsilons{0.05, 0.1, 0.2, 0.4};
  double first_cap = 1e3;
  double cap_factor = 100.0;
  bool operator==(const LifespanSettings&) const = default;
};

struct ConvergenceSettings {
  double t_end = 1.0;
  std::vector<double> dt_ladder{1e-2, 5e-3, 2.5e-3};
  double dt_reference = 3.125e-4;
  std::vector<std::size_t> N_ladder{128, 256, 512};
  double spatial_epsilon = 1e-3;
  bool operator==(const ConvergenceSettings&) const = default;
};

struct TestfuncSettings {
  std::vector<double> scaling_nu{0.5, 1.0, 1.5};
  std::vector<double> scaling_R{2.0, 4.0, 8.0};
  std::vector<double> weight_nu{1.0, 1.5};
  int mu = 16;
  std::vector<double> dilations{0.5, 1.0, 2.0, 4.0};
  bool operator==(const TestfuncSettings&) const = default;
};

struct Tolerances {
  double decay_slope = 0.1;
  double lifespan_slope = 0.3;
  double kernel_slope = 0.05;
  double kernel_residual = 1e-6;
  double convergence_ratio = 1.0;
  double spectral_tail = 1e-10;
  double window_threshold = 0.1;
  double scaling_error = 1e-3;
  double gn_spread = 0.01;
  bool operator==(const Tolerances&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Exponents;
  exponents::SystemParams params{1, 1.0, {3.0, 4.0}};
  std::size_t N = 512;  // grid points per dimension; the dimension is params.n
  double L = 40.0;
  solver::InitialData data;  // one entry per component, or one shared entry
  RunSettings run;
  DecaySettings decay;
  LifespanSettings lifespan;
  ConvergenceSettings convergence;
  TestfuncSettings testfunc;
  Tolerances tolerances;
  std::string output_dir;  // empty: $SEVO_OUTPUT_ROOT (or ./sevo-out) / <kind>-<hash>
  std::uint64_t seed = 0;

  GridSpec grid() const { return {params.n, N, L}; }
  /// Data with one entry per component (a single entry is replicated).
  solver::InitialData resolved_data() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for one experiment kind (the reference configurations).
ExperimentConfig default_config(ExperimentKind kind);

Json to_json(const ExperimentConfig& cfg);
/// Fields missing from `doc` keep the defaults of its kind. Unknown keys and
/// ill-typed values throw InvalidArgument naming the path. Also accepts the
/// {"config", "hash"} form written to output directories. With `kind` set, a
/// document without "kind" takes it and a different "kind" throws Usage.
ExperimentConfig config_from_json(const Json& doc, std::optional<ExperimentKind> kind = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> kind = std::nullopt);

/// FNV-1a 64 of the canonical (sorted-key, compact) serialization.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t hash);

/// Sets `dotted.path` to `value`, parsed as JSON when possible and as a string
/// otherwise. Throws Usage for unknown paths.
void apply_override(ExperimentConfig& cfg, const std::string& path, const std::string& value);

/// Resolved output directory for a config (not created).
std::filesystem::path output_directory(const ExperimentConfig& cfg);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Parses files written by write_csv (numeric cells only).
CsvTable read_csv(const std::filesystem::path& path);

/// t, l2_1..l2_k, hs_1..hs_k, sup_1..sup_k, mean_1..mean_k.
CsvTable norms_table(const std::vector<solver::NormRow>& series, std::size_t k);

void write_json(const std::filesystem::path& path, const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

/// log y = intercept + slope log x, drawn over [x_min, x_max].
struct PlotLine {
  std::string label;
  double slope = 0.0;
  double intercept = 0.0;
  double x_min = 1.0;
  double x_max = 10.0;
  bool guide = false;  // dotted expected-slope guide; dashed fit otherwise
};

/// Static log-log plot. Non-positive points are skipped.
std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series,
                       const std::vector<PlotLine>& lines);

}  // namespace sevo::io
