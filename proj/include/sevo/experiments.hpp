#pragma once

// Experiment dispatch: runs one configured experiment, writes its output
// directory and produces a JSON summary plus a short text report.

#include <filesystem>
#include <string>

#include "sevo/harness.hpp"
#include "sevo/io.hpp"

namespace sevo::io {

struct ExperimentOutcome {
  bool pass = false;
  bool interrupted = false;  // partial outputs were written
  Json summary;
  std::string text;
  std::filesystem::path output_dir;
};

/// Validates, runs, and writes config.json plus the kind-specific files
/// (CSV tables, JSON summary, SVG plots) when `write_files` is set.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files = true);

Json to_json(const exponents::ExponentReport& report);
Json to_json(const harness::FitResult& fit);

}  // namespace sevo::io
