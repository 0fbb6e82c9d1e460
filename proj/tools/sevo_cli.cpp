#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sevo/sevo.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

struct CliError {
  std::string message;
};

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::optional<int> n;
  std::optional<double> sigma;
  std::string p;
  std::string eps;
  std::string out;
  std::optional<std::size_t> threads;
  bool json = false;
  bool no_write = false;
};

using ConfigPtr = std::unique_ptr<sevo_config, decltype(&sevo_config_free)>;
using ResultPtr = std::unique_ptr<sevo_result, decltype(&sevo_result_free)>;

void check(sevo_status status) {
  if (status != SEVO_OK) throw CliError{sevo_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  sevo_string_free(s);
  return out;
}

// "2,3.5" -> "[2,3.5]"; each entry must be a number.
std::string number_list(const std::string& flag, const std::string& text) {
  std::string out = "[";
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    try {
      std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size())
      throw CliError{"Usage: " + flag + " expects a comma-separated list of numbers, got '" + text + "'"};
    out += (start ? "," : "") + item;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out + "]";
}

void set(sevo_config* cfg, const std::string& path, const std::string& value) { check(sevo_config_set(cfg, path.c_str(), value.c_str())); }

int run(const std::string& kind, const Options& o) {
  sevo_config* raw = nullptr;
  if (o.config.empty()) {
    check(sevo_config_new(kind.c_str(), &raw));
  } else {
    check(sevo_config_load_as(o.config.c_str(), kind.c_str(), &raw));
  }
  ConfigPtr cfg(raw, sevo_config_free);
  if (o.n) set(cfg.get(), "params.n", std::to_string(*o.n));
  if (o.sigma) set(cfg.get(), "params.sigma", CLI::detail::to_string(*o.sigma));
  if (!o.p.empty()) set(cfg.get(), "params.p", number_list("--p", o.p));
  if (!o.eps.empty()) {
    if (kind == "lifespan") {
      set(cfg.get(), "lifespan.epsilons", number_list("--eps", o.eps));
    } else {
      set(cfg.get(), "data.epsilon", o.eps);
    }
  }
  if (!o.out.empty()) set(cfg.get(), "output_dir", "\"" + o.out + "\"");
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw CliError{"Usage: --set expects path=value, got '" + s + "'"};
    set(cfg.get(), s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.threads) sevo_set_max_threads(*o.threads);

  sevo_result* res_raw = nullptr;
  check(sevo_run(cfg.get(), o.no_write ? 0 : 1, &res_raw));
  ResultPtr res(res_raw, sevo_result_free);
  char* s = nullptr;
  if (o.json) {
    check(sevo_result_summary_json(res.get(), &s));
    std::cout << take(s) << "\n";
  } else {
    check(sevo_result_text(res.get(), &s));
    std::cout << take(s);
  }
  if (!o.no_write) {
    check(sevo_result_output_dir(res.get(), &s));
    std::cerr << "output: " << take(s) << "\n";
  }
  if (sevo_result_interrupted(res.get())) {
    std::cerr << "interrupted; partial outputs written\n";
    return kExitError;
  }
  const bool pass = sevo_result_passed(res.get());
  std::cerr << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitPass : kExitFailed;
}

extern "C" void on_interrupt(int) { sevo_request_cancel(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for weakly coupled fractional damped wave systems", "sevo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sevo_version());
  Options o;
  const std::vector<std::pair<const char*, const char*>> kinds = {
      {"exponents", "Exponent report: gamma, classification, lifespan and decay rates"},
      {"kernels", "Decay profiles of the linear multipliers and ODE residual check"},
      {"simulate", "Single nonlinear run with norm time series"},
      {"decay", "Global-existence decay experiment with fitted rates"},
      {"blowup", "Single blow-up detection run"},
      {"lifespan", "Lifespan sweep over data sizes with fitted scaling"},
      {"testfunc", "Test-function and interpolation inequality checks"},
      {"convergence", "Temporal and spatial convergence study"}};
  for (const auto& [name, help] : kinds) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "Override a config field: dotted.path=value (repeatable)");
    sub->add_option("--n", o.n, "Space dimension");
    sub->add_option("--sigma", o.sigma, "Order of the fractional Laplacian");
    sub->add_option("--p", o.p, "Exponents p_1,...,p_k");
    sub->add_option("--eps", o.eps,
                    std::string(name) == std::string("lifespan") ? "Data sizes, comma-separated" : "Data size");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Maximum worker threads (0: all cores)");
    sub->add_flag("--json", o.json, "Print the JSON summary instead of the text report");
    sub->add_flag("--no-write", o.no_write, "Do not write an output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitError;
  }
}
