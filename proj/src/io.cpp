#include "sevo/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sevo/error.hpp"

namespace sevo::io {

namespace {

constexpr std::array<std::pair<ExperimentKind, const char*>, 8> kKinds{{
    {ExperimentKind::Exponents, "exponents"},
    {ExperimentKind::Kernels, "kernels"},
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::Decay, "decay"},
    {ExperimentKind::Blowup, "blowup"},
    {ExperimentKind::Lifespan, "lifespan"},
    {ExperimentKind::Testfunc, "testfunc"},
    {ExperimentKind::Convergence, "convergence"},
}};

Json component_json(const solver::ComponentData& c) {
  return {{"a0", c.a0}, {"a1", c.a1}, {"width", c.width}, {"center", c.center}};
}

// Overlays `patch` onto `base`, rejecting keys the base does not have.
void overlay(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw Error(ErrorCode::InvalidArgument, "config: " + path + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string where = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw Error(ErrorCode::InvalidArgument, "config: unknown key " + where);
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), where);
    } else {
      slot = it.value();
    }
  }
}

template <class T>
T get(const Json& doc, const char* key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!doc.contains(key)) throw Error(ErrorCode::InvalidArgument, "config: missing " + where);
  const Json& v = doc.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, "config: " + where + " must be a number");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw Error(ErrorCode::InvalidArgument, "config: " + where + " must be true or false");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw Error(ErrorCode::InvalidArgument, "config: " + where + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, "config: " + where + " must be non-negative");
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, "config: " + where + " must be a string");
  }
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "config: " + where + " has the wrong type");
  }
}

template <class T>
std::vector<T> get_list(const Json& doc, const char* key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  const Json& v = doc.at(key);
  if (!v.is_array()) throw Error(ErrorCode::InvalidArgument, "config: " + where + " must be a list");
  std::vector<T> out;
  for (const auto& e : v) {
    const bool ok = std::is_integral_v<T> ? e.is_number_unsigned() || (e.is_number_integer() && e.get<long long>() >= 0)
                                          : e.is_number();
    if (!ok) throw Error(ErrorCode::InvalidArgument, "config: " + where + " has a non-numeric entry");
    out.push_back(e.get<T>());
  }
  return out;
}

solver::ComponentData component_from_json(const Json& doc, const std::string& path) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "config: " + path + " must be an object");
  Json full = component_json({});
  overlay(full, doc, path);
  solver::ComponentData c;
  c.a0 = get<double>(full, "a0", path);
  c.a1 = get<double>(full, "a1", path);
  c.width = get<double>(full, "width", path);
  c.center = get_list<double>(full, "center", path);
  return c;
}

}  // namespace

const char* kind_name(ExperimentKind kind) noexcept {
  for (const auto& [k, name] : kKinds)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kKinds)
    if (name == n) return k;
  std::string known;
  for (const auto& [k, n] : kKinds) known += (known.empty() ? "" : ", ") + std::string(n);
  throw Error(ErrorCode::Usage, "unknown experiment '" + name + "' (expected one of " + known + ")");
}

solver::InitialData ExperimentConfig::resolved_data() const {
  solver::InitialData d = data;
  const std::size_t k = params.k();
  if (d.components.size() == 1 && k > 1) d.components.assign(k, d.components.front());
  if (d.components.size() != k) {
    throw Error(ErrorCode::InvalidArgument, "data.components has " + std::to_string(data.components.size()) +
                                                " entries for " + std::to_string(k) + " components");
  }
  return d;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.data.epsilon = 1e-3;
  c.data.components = {{1.0, 1.0, 1.0, {}}};
  switch (kind) {
    case ExperimentKind::Simulate:
      c.run.t_end = 100.0;
      break;
    case ExperimentKind::Blowup:
    case ExperimentKind::Lifespan:
      c.params.p = {2.0, 2.0};
      c.N = 8192;
      c.L = 320.0;
      c.data.epsilon = 0.3;
      c.data.components = {{1.0, 1.0, 0.25, {}}};
      c.run.t_end = 1e3;
      c.run.dt = 0.05;
      c.run.adaptive = true;
      c.run.records_per_decade = 10;
      break;
    case ExperimentKind::Convergence:
      c.data.epsilon = 0.5;
      break;
    default:
      break;
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json comps = Json::array();
  for (const auto& comp : c.data.components) comps.push_back(component_json(comp));
  Json doc;
  doc["kind"] = kind_name(c.kind);
  doc["params"] = {{"n", c.params.n}, {"sigma", c.params.sigma}, {"p", c.params.p}};
  doc["grid"] = {{"N", c.N}, {"L", c.L}};
  doc["data"] = {{"epsilon", c.data.epsilon}, {"components", comps}};
  doc["run"] = {{"t_end", c.run.t_end},
                {"dt", c.run.dt},
                {"adaptive", c.run.adaptive},
                {"records_per_decade", c.run.records_per_decade},
                {"nonlinear", c.run.nonlinear},
                {"blowup_threshold", c.run.blowup_threshold}};
  doc["decay"] = {{"t_min", c.decay.t_min}, {"loss_eps", c.decay.loss_eps}};
  doc["lifespan"] = {{"epsilons", c.lifespan.epsilons},
                     {"first_cap", c.lifespan.first_cap},
                     {"cap_factor", c.lifespan.cap_factor}};
  doc["convergence"] = {{"t_end", c.convergence.t_end},
                        {"dt_ladder", c.convergence.dt_ladder},
                        {"dt_reference", c.convergence.dt_reference},
                        {"N_ladder", c.convergence.N_ladder},
                        {"spatial_epsilon", c.convergence.spatial_epsilon}};
  doc["testfunc"] = {{"scaling_nu", c.testfunc.scaling_nu},
                     {"scaling_R", c.testfunc.scaling_R},
                     {"weight_nu", c.testfunc.weight_nu},
                     {"mu", c.testfunc.mu},
                     {"dilations", c.testfunc.dilations}};
  const auto& t = c.tolerances;
  doc["tolerances"] = {{"decay_slope", t.decay_slope},
                       {"lifespan_slope", t.lifespan_slope},
                       {"kernel_slope", t.kernel_slope},
                       {"kernel_residual", t.kernel_residual},
                       {"convergence_ratio", t.convergence_ratio},
                       {"spectral_tail", t.spectral_tail},
                       {"window_threshold", t.window_threshold},
                       {"scaling_error", t.scaling_error},
                       {"gn_spread", t.gn_spread}};
  doc["output_dir"] = c.output_dir;
  doc["seed"] = c.seed;
  return doc;
}

ExperimentConfig config_from_json(const Json& input, std::optional<ExperimentKind> fallback_kind) {
  const bool wrapped = input.is_object() && input.size() == 2 && input.contains("config") && input.contains("hash");
  const Json& doc = wrapped ? input["config"] : input;
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "config: top level must be an object");
  ExperimentKind kind = fallback_kind.value_or(ExperimentKind::Exponents);
  if (doc.contains("kind")) kind = parse_kind(get<std::string>(doc, "kind", ""));
  if (fallback_kind && kind != *fallback_kind)
    throw Error(ErrorCode::Usage, std::string("config is for '") + kind_name(kind) + "', not '" +
                                      kind_name(*fallback_kind) + "'");
  Json full = to_json(default_config(kind));
  Json patch = doc;
  // Components are replaced as a whole list, each entry filled from defaults.
  Json comps;
  if (patch.contains("data") && patch["data"].is_object() && patch["data"].contains("components")) {
    comps = patch["data"]["components"];
    patch["data"].erase("components");
    if (!comps.is_array()) throw Error(ErrorCode::InvalidArgument, "config: data.components must be a list");
  }
  overlay(full, patch, "");

  ExperimentConfig c;
  c.kind = kind;
  const Json& p = full["params"];
  c.params.n = get<int>(p, "n", "params");
  c.params.sigma = get<double>(p, "sigma", "params");
  c.params.p = get_list<double>(p, "p", "params");
  c.N = get<std::size_t>(full["grid"], "N", "grid");
  c.L = get<double>(full["grid"], "L", "grid");
  c.data.epsilon = get<double>(full["data"], "epsilon", "data");
  if (comps.is_null()) {
    c.data.components = default_config(kind).data.components;
  } else {
    for (std::size_t i = 0; i < comps.size(); ++i)
      c.data.components.push_back(component_from_json(comps[i], "data.components." + std::to_string(i)));
  }
  const Json& r = full["run"];
  c.run.t_end = get<double>(r, "t_end", "run");
  c.run.dt = get<double>(r, "dt", "run");
  c.run.adaptive = get<bool>(r, "adaptive", "run");
  c.run.records_per_decade = get<int>(r, "records_per_decade", "run");
  c.run.nonlinear = get<bool>(r, "nonlinear", "run");
  c.run.blowup_threshold = get<double>(r, "blowup_threshold", "run");
  c.decay.t_min = get<double>(full["decay"], "t_min", "decay");
  c.decay.loss_eps = get<double>(full["decay"], "loss_eps", "decay");
  const Json& l = full["lifespan"];
  c.lifespan.epsilons = get_list<double>(l, "epsilons", "lifespan");
  c.lifespan.first_cap = get<double>(l, "first_cap", "lifespan");
  c.lifespan.cap_factor = get<double>(l, "cap_factor", "lifespan");
  const Json& cv = full["convergence"];
  c.convergence.t_end = get<double>(cv, "t_end", "convergence");
  c.convergence.dt_ladder = get_list<double>(cv, "dt_ladder", "convergence");
  c.convergence.dt_reference = get<double>(cv, "dt_reference", "convergence");
  c.convergence.N_ladder = get_list<std::size_t>(cv, "N_ladder", "convergence");
  c.convergence.spatial_epsilon = get<double>(cv, "spatial_epsilon", "convergence");
  const Json& tf = full["testfunc"];
  c.testfunc.scaling_nu = get_list<double>(tf, "scaling_nu", "testfunc");
  c.testfunc.scaling_R = get_list<double>(tf, "scaling_R", "testfunc");
  c.testfunc.weight_nu = get_list<double>(tf, "weight_nu", "testfunc");
  c.testfunc.mu = get<int>(tf, "mu", "testfunc");
  c.testfunc.dilations = get_list<double>(tf, "dilations", "testfunc");
  const Json& t = full["tolerances"];
  c.tolerances.decay_slope = get<double>(t, "decay_slope", "tolerances");
  c.tolerances.lifespan_slope = get<double>(t, "lifespan_slope", "tolerances");
  c.tolerances.kernel_slope = get<double>(t, "kernel_slope", "tolerances");
  c.tolerances.kernel_residual = get<double>(t, "kernel_residual", "tolerances");
  c.tolerances.convergence_ratio = get<double>(t, "convergence_ratio", "tolerances");
  c.tolerances.spectral_tail = get<double>(t, "spectral_tail", "tolerances");
  c.tolerances.window_threshold = get<double>(t, "window_threshold", "tolerances");
  c.tolerances.scaling_error = get<double>(t, "scaling_error", "tolerances");
  c.tolerances.gn_spread = get<double>(t, "gn_spread", "tolerances");
  c.output_dir = get<std::string>(full, "output_dir", "");
  c.seed = get<std::uint64_t>(full, "seed", "");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> fallback_kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc, fallback_kind);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  Json doc = to_json(cfg);
  doc.erase("output_dir");
  const std::string text = doc.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  std::array<char, 17> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + 16, hash, 16);
  std::string s(buf.data(), end);
  return std::string(16 - s.size(), '0') + s;
}

void apply_override(ExperimentConfig& cfg, const std::string& path, const std::string& value) {
  Json doc = to_json(cfg);
  Json* node = &doc;
  std::stringstream ss(path);
  std::string token;
  std::vector<std::string> tokens;
  while (std::getline(ss, token, '.')) tokens.push_back(token);
  if (tokens.empty()) throw Error(ErrorCode::Usage, "empty override path");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (node->is_object()) {
      if (!node->contains(t)) throw Error(ErrorCode::Usage, "unknown config path '" + path + "'");
      node = &(*node)[t];
    } else if (node->is_array()) {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), idx);
      if (ec != std::errc() || ptr != t.data() + t.size() || idx >= node->size())
        throw Error(ErrorCode::Usage, "bad index '" + t + "' in config path '" + path + "'");
      node = &(*node)[idx];
    } else {
      throw Error(ErrorCode::Usage, "config path '" + path + "' goes below a scalar");
    }
  }
  Json v;
  try {
    v = Json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    v = value;
  }
  *node = v;
  try {
    cfg = config_from_json(doc);
  } catch (const Error& e) {
    throw Error(ErrorCode::Usage, "override " + path + "=" + value + ": " + e.what());
  }
}

std::filesystem::path output_directory(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  const char* root = std::getenv("SEVO_OUTPUT_ROOT");
  const std::filesystem::path base = root && *root ? root : "sevo-out";
  return base / (std::string(kind_name(cfg.kind)) + "-" + hash_hex(config_hash(cfg)).substr(0, 12));
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, comma, v);
      if (ec != std::errc() || ptr != comma)
        throw Error(ErrorCode::Io, path.string() + ": bad number '" + std::string(p, comma) + "'");
      row.push_back(v);
      p = comma + 1;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable norms_table(const std::vector<solver::NormRow>& series, std::size_t k) {
  CsvTable t;
  t.header.push_back("t");
  for (const char* prefix : {"l2_", "hs_", "sup_", "mean_"})
    for (std::size_t l = 1; l <= k; ++l) t.header.push_back(prefix + std::to_string(l));
  for (const auto& r : series) {
    std::vector<double> row{r.t};
    for (std::size_t l = 0; l < k; ++l) row.push_back(r.comps[l].l2);
    for (std::size_t l = 0; l < k; ++l) row.push_back(r.comps[l].hsigma);
    for (std::size_t l = 0; l < k; ++l) row.push_back(r.comps[l].sup);
    for (std::size_t l = 0; l < k; ++l) row.push_back(r.comps[l].mean);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace sevo::io
