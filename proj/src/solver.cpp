#include "sevo/solver.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <cmath>
#include <limits>

#include "sevo/error.hpp"
#include "sevo/kernels.hpp"
#include "sevo/runtime.hpp"

namespace sevo::solver {

namespace {

constexpr double kLeakageLimit = 1e-8;
constexpr double kTinyMagnitude = 1e-300;
constexpr std::size_t kCoefficientCacheLimit = 64;

double abs_power(double u, double p) {
  const double m = std::abs(u);
  if (m < kTinyMagnitude) return 0.0;
  return std::exp(p * std::log(m));
}

}  // namespace

Solver::Solver(SystemParams params, GridSpec grid, SolverOptions options)
    : params_(std::move(params)), grid_(grid, params_.sigma), fft_(grid), options_(options) {
  params_.validate();
  if (params_.n != grid.n) {
    throw Error(ErrorCode::InvalidArgument, "grid dimension must match the system dimension n");
  }
}

FieldState Solver::make_initial_data(const InitialData& data, DataReport* report) const {
  const std::size_t k = params_.k();
  if (data.components.size() != k) {
    throw Error(ErrorCode::InvalidArgument, "initial data must describe every component");
  }
  const auto& spec = grid_.spec();
  std::vector<Spectrum> u_hat(k), v_hat(k);
  DataReport rep;
  const double cell = spec.cell_volume();
  const double box = spec.box_volume();
  const auto xi2 = grid_.xi_squared();

  for (std::size_t l = 0; l < k; ++l) {
    const auto& c = data.components[l];
    if (!(c.width > 0.0)) throw Error(ErrorCode::InvalidArgument, "Gaussian width must be positive");
    std::array<double, 2> center{0.0, 0.0};
    if (!c.center.empty()) {
      if (c.center.size() != static_cast<std::size_t>(spec.n))
        throw Error(ErrorCode::InvalidArgument, "center needs one coordinate per dimension");
      for (int d = 0; d < spec.n; ++d) center[d] = c.center[d];
    }
    const double amp0 = data.epsilon * c.a0;
    const double amp1 = data.epsilon * c.a1;
    if (amp0 != 0.0 || amp1 != 0.0) {
      double edge = std::numeric_limits<double>::infinity();
      for (int d = 0; d < spec.n; ++d) edge = std::min(edge, spec.L - std::abs(center[d]));
      const double tail = edge > 0.0 ? std::exp(-(edge * edge) / (c.width * c.width)) : 1.0;
      if (tail > kLeakageLimit) {
        throw Error(ErrorCode::DataLeakage,
                    "Gaussian of component " + std::to_string(l + 1) + " reaches " +
                        std::to_string(tail) + " of its peak at the box boundary");
      }
    }
    RealField u0(grid_.size()), u1(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const auto x = grid_.position(i);
      double r2 = 0.0;
      for (int d = 0; d < spec.n; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
      const double g = std::exp(-r2 / (c.width * c.width));
      u0[i] = amp0 * g;
      u1[i] = amp1 * g;
    }
    u_hat[l] = fft_.forward_real(u0);
    v_hat[l] = fft_.forward_real(u1);

    double l1_0 = 0.0, l1_1 = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      l1_0 += std::abs(u0[i]) * cell;
      l1_1 += std::abs(u1[i]) * cell;
    }
    double hs0 = 0.0, l2_1 = 0.0;
    for (std::size_t m = 0; m < grid_.size(); ++m) {
      hs0 += std::pow(1.0 + xi2[m], params_.sigma) * std::norm(u_hat[l][m]);
      l2_1 += std::norm(v_hat[l][m]);
    }
    rep.mean_u0.push_back(u_hat[l][0].real());
    rep.mean_u1.push_back(v_hat[l][0].real());
    const double norm = l1_0 + std::sqrt(box * hs0) + l1_1 + std::sqrt(box * l2_1);
    rep.data_norm.push_back(norm);
    rep.total_norm += norm;
  }
  if (report) *report = std::move(rep);
  return make_state(std::move(u_hat), std::move(v_hat), 0.0);
}

FieldState Solver::make_state(std::vector<Spectrum> u_hat, std::vector<Spectrum> v_hat,
                              double time) const {
  if (u_hat.size() != params_.k() || v_hat.size() != params_.k())
    throw Error(ErrorCode::InvalidArgument, "state needs k components");
  for (std::size_t l = 0; l < u_hat.size(); ++l) {
    if (u_hat[l].size() != grid_.size() || v_hat[l].size() != grid_.size())
      throw Error(ErrorCode::InvalidArgument, "state size does not match the grid");
  }
  FieldState s;
  s.time = time;
  s.u_hat = std::move(u_hat);
  s.v_hat = std::move(v_hat);
  refresh(s, nullptr);
  return s;
}

void Solver::refresh(FieldState& state, StepReport* report) const {
  state.u_phys.resize(state.u_hat.size());
  bool blown = false;
  double ratio = 0.0;
  std::vector<double> sups;
  for (std::size_t l = 0; l < state.u_hat.size(); ++l) {
    double imag = 0.0;
    state.u_phys[l] = fft_.backward_real(state.u_hat[l], &imag);
    double sup = 0.0;
    bool finite = std::isfinite(imag);
    for (double v : state.u_phys[l]) {
      if (!std::isfinite(v)) finite = false;
      sup = std::max(sup, std::abs(v));
    }
    if (!finite) sup = std::numeric_limits<double>::infinity();
    if (!finite || sup > options_.blowup_threshold) blown = true;
    if (sup > 0.0 && std::isfinite(sup)) ratio = std::max(ratio, imag / sup);
    sups.push_back(sup);
  }
  state.blown_up = blown;
  if (report) {
    report->blowup = blown;
    report->sup = std::move(sups);
    report->imag_ratio = ratio;
  }
}

const Solver::Coefficients& Solver::coefficients(double dt) {
  if (auto it = cache_.find(dt); it != cache_.end()) return it->second;
  if (cache_.size() >= kCoefficientCacheLimit) cache_.clear();
  Coefficients c;
  const auto a = grid_.symbol();
  const std::size_t m = a.size();
  c.k0.resize(m);
  c.k1.resize(m);
  c.dk0.resize(m);
  c.dk1.resize(m);
  c.i1.resize(m);
  c.i2.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto s = kernels::propagator(dt, a[i]);
    c.k0[i] = s.k0;
    c.k1[i] = s.k1;
    c.dk0[i] = s.dk0;
    c.dk1[i] = s.dk1;
    c.i1[i] = s.i1;
    c.i2[i] = s.i2;
  }
  return cache_.emplace(dt, std::move(c)).first->second;
}

std::vector<Spectrum> Solver::nonlinear_terms(const std::vector<RealField>& u_phys) const {
  const std::size_t k = params_.k();
  const auto mask = grid_.dealias_mask();
  std::vector<Spectrum> out(k);
  RealField buf(grid_.size());
  for (std::size_t l = 0; l < k; ++l) {
    const auto& src = u_phys[(l + k - 1) % k];
    const double p = params_.p[l];
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = abs_power(src[i], p);
    out[l] = fft_.forward_real(buf);
    if (options_.dealias) {
      for (std::size_t i = 0; i < buf.size(); ++i) out[l][i] *= mask[i];
    }
  }
  return out;
}

StepReport Solver::step(FieldState& state, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const auto& c = coefficients(dt);
  const std::size_t k = params_.k();
  const std::size_t m = grid_.size();

  if (!options_.nonlinear) {
    for (std::size_t l = 0; l < k; ++l) {
      auto& u = state.u_hat[l];
      auto& v = state.v_hat[l];
      for (std::size_t i = 0; i < m; ++i) {
        const Complex u0 = u[i], v0 = v[i];
        u[i] = c.k0[i] * u0 + c.k1[i] * v0;
        v[i] = c.dk0[i] * u0 + c.dk1[i] * v0;
      }
    }
  } else {
    const auto n0 = nonlinear_terms(state.u_phys);
    std::vector<Spectrum> lin_u(k, Spectrum(m)), lin_v(k, Spectrum(m));
    std::vector<RealField> pred_phys(k);
    for (std::size_t l = 0; l < k; ++l) {
      const auto& u = state.u_hat[l];
      const auto& v = state.v_hat[l];
      Spectrum pred(m);
      for (std::size_t i = 0; i < m; ++i) {
        lin_u[l][i] = c.k0[i] * u[i] + c.k1[i] * v[i];
        lin_v[l][i] = c.dk0[i] * u[i] + c.dk1[i] * v[i];
        pred[i] = lin_u[l][i] + c.i1[i] * n0[l][i];
      }
      pred_phys[l] = fft_.backward_real(pred);
    }
    const auto n1 = nonlinear_terms(pred_phys);
    const double inv_dt = 1.0 / dt;
    for (std::size_t l = 0; l < k; ++l) {
      auto& u = state.u_hat[l];
      auto& v = state.v_hat[l];
      for (std::size_t i = 0; i < m; ++i) {
        const Complex slope = (n1[l][i] - n0[l][i]) * inv_dt;
        u[i] = lin_u[l][i] + c.i1[i] * n0[l][i] + c.i2[i] * slope;
        v[i] = lin_v[l][i] + c.k1[i] * n0[l][i] + c.i1[i] * slope;
      }
    }
  }
  state.time += dt;
  StepReport rep;
  refresh(state, &rep);
  return rep;
}

std::vector<ComponentNorms> Solver::norms(const FieldState& state) const {
  const double box = grid_.spec().box_volume();
  const auto a = grid_.symbol();
  std::vector<ComponentNorms> out(state.components());
  for (std::size_t l = 0; l < state.components(); ++l) {
    double l2 = 0.0, hs = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double w = std::norm(state.u_hat[l][i]);
      l2 += w;
      hs += a[i] * w;
    }
    out[l].l2 = std::sqrt(box * l2);
    out[l].hsigma = std::sqrt(box * hs);
    out[l].mean = state.u_hat[l][0].real();
    double sup = 0.0;
    if (l < state.u_phys.size()) {
      for (double v : state.u_phys[l]) sup = std::max(sup, std::abs(v));
    }
    out[l].sup = sup;
  }
  return out;
}

std::vector<double> output_schedule(const RunConfig& cfg) {
  std::vector<double> times;
  if (cfg.records_per_decade > 0 && cfg.first_record > 0.0) {
    for (int j = 0;; ++j) {
      const double t = cfg.first_record * std::pow(10.0, static_cast<double>(j) / cfg.records_per_decade);
      if (t >= cfg.t_end) break;
      times.push_back(t);
    }
  }
  for (double t : cfg.snapshot_times)
    if (t > 0.0 && t <= cfg.t_end) times.push_back(t);
  times.push_back(cfg.t_end);
  std::sort(times.begin(), times.end());
  std::vector<double> out;
  for (double t : times) {
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  }
  return out;
}

namespace {

bool is_snapshot_time(const RunConfig& cfg, double t) {
  return std::any_of(cfg.snapshot_times.begin(), cfg.snapshot_times.end(),
                     [t](double s) { return std::abs(s - t) <= 1e-12 * std::max(1.0, t); });
}

double relative_change(const std::vector<double>& before, const std::vector<double>& after) {
  double worst = 0.0;
  for (std::size_t l = 0; l < before.size(); ++l) {
    if (!std::isfinite(after[l])) return std::numeric_limits<double>::infinity();
    if (before[l] < kTinyMagnitude) continue;
    worst = std::max(worst, std::abs(after[l] - before[l]) / before[l]);
  }
  return worst;
}

}  // namespace

RunResult run_from(Solver& solver, FieldState state, const RunConfig& cfg) {
  if (!(cfg.t_end > state.time)) throw Error(ErrorCode::InvalidArgument, "t_end must exceed the start time");
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  RunResult res;
  const auto schedule = output_schedule(cfg);

  auto record = [&](const FieldState& s) {
    res.series.push_back({s.time, solver.norms(s)});
    if (is_snapshot_time(cfg, s.time)) res.snapshots.push_back({s.time, s.u_phys});
  };
  record(state);
  if (state.blown_up) {
    res.blowup = true;
    res.blowup_time = state.time;
    res.t_final = state.time;
    return res;
  }

  std::vector<double> sup_prev;
  for (const auto& c : solver.norms(state)) sup_prev.push_back(c.sup);

  double dt = cfg.dt;
  int calm_steps = 0;
  std::size_t next = 0;
  while (next < schedule.size() && schedule[next] <= state.time) ++next;

  while (next < schedule.size()) {
    if (cancel_requested()) {
      res.interrupted = true;
      break;
    }
    const double target = schedule[next];
    const double remaining = target - state.time;
    const bool lands = dt >= remaining * (1.0 - 1e-12);
    const double h = lands ? remaining : dt;
    FieldState saved = state;
    const auto rep = solver.step(state, h);

    if (cfg.adaptive && h > cfg.dt_min) {
      const double change = relative_change(sup_prev, rep.sup);
      if (change > 0.1) {
        state = std::move(saved);
        dt = h / 2.0;
        calm_steps = 0;
        ++res.rejected;
        continue;
      }
      calm_steps = change < 0.025 ? calm_steps + 1 : 0;
      if (calm_steps >= 10 && dt < cfg.dt) {
        dt = std::min(2.0 * dt, cfg.dt);
        calm_steps = 0;
      }
    }
    ++res.steps;
    res.max_imag_ratio = std::max(res.max_imag_ratio, rep.imag_ratio);

    if (rep.blowup) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 4; ++it) {
        const double mid = 0.5 * (lo + hi);
        FieldState trial = saved;
        if (solver.step(trial, mid).blowup) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      res.blowup = true;
      res.blowup_time = saved.time + hi;
      res.blowup_uncertainty = hi - lo;
      res.t_final = saved.time;
      return res;
    }
    sup_prev = rep.sup;
    if (lands) {
      state.time = target;
      record(state);
      ++next;
    }
  }
  res.t_final = state.time;
  return res;
}

RunResult run(const SystemParams& params, const GridSpec& grid, const InitialData& data,
              const RunConfig& cfg) {
  SolverOptions opts;
  opts.nonlinear = cfg.nonlinear;
  opts.blowup_threshold = cfg.blowup_threshold;
  Solver solver(params, grid, opts);
  DataReport report;
  auto state = solver.make_initial_data(data, &report);
  auto res = run_from(solver, std::move(state), cfg);
  res.data = std::move(report);
  return res;
}

}  // namespace sevo::solver
