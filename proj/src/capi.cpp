#include "sevo/sevo.h"

#include <cstring>
#include <new>
#include <string>

#include "sevo/error.hpp"
#include "sevo/experiments.hpp"
#include "sevo/exponents.hpp"
#include "sevo/kernels.hpp"
#include "sevo/runtime.hpp"

struct sevo_config {
  sevo::io::ExperimentConfig cfg;
};

struct sevo_result {
  sevo::io::ExperimentOutcome outcome;
};

namespace {

thread_local std::string last_error;

sevo_status fail(sevo_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
sevo_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SEVO_OK;
  } catch (const sevo::Error& e) {
    return fail(static_cast<sevo_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SEVO_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SEVO_INTERNAL, e.what());
  } catch (...) {
    return fail(SEVO_INTERNAL, "unknown failure");
  }
}

void require(const void* ptr, const char* name) {
  if (!ptr) throw sevo::Error(sevo::ErrorCode::InvalidArgument, std::string(name) + " is null");
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sevo::exponents::SystemParams params_from(int n, double sigma, const double* p, size_t k) {
  require(p, "p");
  sevo::exponents::SystemParams params{n, sigma, std::vector<double>(p, p + k)};
  params.validate();
  return params;
}

}  // namespace

extern "C" {

const char* sevo_version(void) { return "1.0.0"; }

const char* sevo_status_name(sevo_status status) {
  if (status == SEVO_OK) return "Ok";
  if (status == SEVO_INTERNAL) return "Internal";
  if (status >= SEVO_INVALID_ARGUMENT && status <= SEVO_CANCELLED)
    return sevo::error_code_name(static_cast<sevo::ErrorCode>(status));
  return "Unknown";
}

const char* sevo_last_error(void) { return last_error.c_str(); }

void sevo_string_free(char* s) { delete[] s; }

sevo_status sevo_gamma(int n, double sigma, const double* p, size_t k, double* gamma) {
  return guarded([&] {
    require(gamma, "gamma");
    const auto g = sevo::exponents::compute_gamma(params_from(n, sigma, p, k));
    std::copy(g.gamma.begin(), g.gamma.end(), gamma);
  });
}

sevo_status sevo_lifespan_exponent(int n, double sigma, const double* p, size_t k, double* exponent) {
  return guarded([&] {
    require(exponent, "exponent");
    *exponent = sevo::exponents::lifespan_exponent(params_from(n, sigma, p, k));
  });
}

sevo_status sevo_propagator(double t, double a, double* k0, double* k1) {
  return guarded([&] {
    require(k0, "k0");
    require(k1, "k1");
    const auto s = sevo::kernels::propagator(t, a);
    *k0 = s.k0;
    *k1 = s.k1;
  });
}

sevo_status sevo_config_new(const char* kind, sevo_config** out) {
  return guarded([&] {
    require(kind, "kind");
    require(out, "out");
    *out = new sevo_config{sevo::io::default_config(sevo::io::parse_kind(kind))};
  });
}

sevo_status sevo_config_from_json(const char* json, sevo_config** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    sevo::io::Json doc;
    try {
      doc = sevo::io::Json::parse(json);
    } catch (const sevo::io::Json::parse_error& e) {
      throw sevo::Error(sevo::ErrorCode::InvalidArgument, std::string("config: ") + e.what());
    }
    *out = new sevo_config{sevo::io::config_from_json(doc)};
  });
}

sevo_status sevo_config_load(const char* path, sevo_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sevo_config{sevo::io::load_config(path)};
  });
}

sevo_status sevo_config_load_as(const char* path, const char* kind, sevo_config** out) {
  return guarded([&] {
    require(path, "path");
    require(kind, "kind");
    require(out, "out");
    *out = new sevo_config{sevo::io::load_config(path, sevo::io::parse_kind(kind))};
  });
}

sevo_status sevo_config_set(sevo_config* cfg, const char* path, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(path, "path");
    require(value, "value");
    sevo::io::apply_override(cfg->cfg, path, value);
  });
}

sevo_status sevo_config_to_json(const sevo_config* cfg, char** json) {
  return guarded([&] {
    require(cfg, "cfg");
    require(json, "json");
    *json = duplicate(sevo::io::to_json(cfg->cfg).dump(2));
  });
}

sevo_status sevo_config_hash(const sevo_config* cfg, uint64_t* hash) {
  return guarded([&] {
    require(cfg, "cfg");
    require(hash, "hash");
    *hash = sevo::io::config_hash(cfg->cfg);
  });
}

void sevo_config_free(sevo_config* cfg) { delete cfg; }

sevo_status sevo_run(const sevo_config* cfg, int write_files, sevo_result** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new sevo_result{sevo::io::run_experiment(cfg->cfg, write_files != 0)};
  });
}

int sevo_result_passed(const sevo_result* result) { return result && result->outcome.pass ? 1 : 0; }

int sevo_result_interrupted(const sevo_result* result) {
  return result && result->outcome.interrupted ? 1 : 0;
}

sevo_status sevo_result_summary_json(const sevo_result* result, char** json) {
  return guarded([&] {
    require(result, "result");
    require(json, "json");
    *json = duplicate(result->outcome.summary.dump(2));
  });
}

sevo_status sevo_result_text(const sevo_result* result, char** text) {
  return guarded([&] {
    require(result, "result");
    require(text, "text");
    *text = duplicate(result->outcome.text);
  });
}

sevo_status sevo_result_output_dir(const sevo_result* result, char** path) {
  return guarded([&] {
    require(result, "result");
    require(path, "path");
    *path = duplicate(result->outcome.output_dir.string());
  });
}

void sevo_result_free(sevo_result* result) { delete result; }

void sevo_request_cancel(void) { sevo::request_cancel(); }

void sevo_reset_cancel(void) { sevo::reset_cancel(); }

void sevo_set_max_threads(size_t n) { sevo::set_max_threads(n); }

}  // extern "C"
