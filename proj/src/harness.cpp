#include "sevo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "sevo/error.hpp"
#include "sevo/fit.hpp"
#include "sevo/kernels.hpp"
#include "sevo/runtime.hpp"

namespace sevo::harness {

namespace {

constexpr double kXnormBound = 10.0;
// Gaussian spectra exp(-w^2 xi^2 / 4) are negligible beyond xi = 12 / w.
constexpr double kSpectralReach = 12.0;

double linear_amplitude(double xi2, double sigma, double t, const solver::ComponentData& c) {
  const auto s = kernels::propagator(t, std::pow(xi2, sigma));
  return c.a0 * s.k0 + c.a1 * s.k1;
}

double relative_distance(const std::vector<Spectrum>& a, const std::vector<Spectrum>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    for (std::size_t i = 0; i < a[l].size(); ++i) {
      num += std::norm(a[l][i] - b[l][i]);
      den += std::norm(b[l][i]);
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::vector<Spectrum> fixed_step_run(const SystemParams& params, const GridSpec& grid,
                                     const InitialData& data, double dt, double t_end,
                                     bool nonlinear) {
  solver::SolverOptions opt;
  opt.nonlinear = nonlinear;
  solver::Solver s(params, grid, opt);
  auto st = s.make_initial_data(data);
  const long steps = std::max(1L, std::lround(t_end / dt));
  const double h = t_end / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) {
    if (cancel_requested()) throw Error(ErrorCode::Cancelled, "convergence study interrupted");
    s.step(st, h);
    if (st.blown_up) throw Error(ErrorCode::InvalidArgument, "convergence run blew up");
  }
  return st.u_hat;
}

std::vector<double> loss_values(const SystemParams& params, double eps, bool nonlinear) {
  std::vector<double> loss(params.k(), 0.0);
  if (!nonlinear) return loss;
  const auto rep = exponents::make_report(params, eps);
  for (std::size_t j = 0; j < params.k(); ++j) loss[rep.relabeling.old_index[j]] = rep.epsilon_seq[j];
  return loss;
}

}  // namespace

bool fit_verdict(double slope, double r_squared, double low, double high, double tolerance) {
  return slope >= low - tolerance && slope <= high + tolerance && r_squared >= kMinRSquared;
}

FitResult fit_power_law(std::span<const double> t, std::span<const double> y, Window window,
                        double expected, double tolerance, std::size_t min_points) {
  return fit_power_law_range(t, y, window, expected, expected, tolerance, min_points);
}

FitResult fit_power_law_range(std::span<const double> t, std::span<const double> y,
                              Window window, double expected_low, double expected_high, double tolerance,
                              std::size_t min_points) {
  if (t.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit: t and y differ in length");
  std::vector<double> tw, yw;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_min || t[i] > window.t_max) continue;
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw Error(ErrorCode::NonPositiveValues, "fit: non-positive value at t = " + std::to_string(t[i]));
    tw.push_back(t[i]);
    yw.push_back(y[i]);
  }
  if (tw.size() < min_points) {
    throw Error(ErrorCode::EmptyWindow, "fit: " + std::to_string(tw.size()) + " points in [" +
                                            std::to_string(window.t_min) + ", " +
                                            std::to_string(window.t_max) + "], need " +
                                            std::to_string(min_points));
  }
  const auto f = fit_log_log(tw, yw);
  FitResult r;
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r_squared = f.r_squared;
  r.slope_stderr = f.slope_stderr;
  r.points = f.points;
  r.window = window;
  r.expected_low = std::min(expected_low, expected_high);
  r.expected_high = std::max(expected_low, expected_high);
  r.expected = expected_low;
  r.tolerance = tolerance;
  r.pass = fit_verdict(r.slope, r.r_squared, r.expected_low, r.expected_high, tolerance);
  return r;
}

double PeriodizationError::worst() const noexcept {
  return std::max(std::abs(l2), std::abs(hsigma));
}

PeriodizationError periodization_error(const GridSpec& grid, double sigma,
                                       const solver::ComponentData& c, double t) {
  grid.validate();
  const int n = grid.n;
  const double w = c.width;
  const double xi_max = kSpectralReach / w;
  const auto spectrum2 = [&](double xi2) {
    const double g = std::exp(-w * w * xi2 / 4.0) * linear_amplitude(xi2, sigma, t, c);
    return g * g;
  };

  const double dk = std::numbers::pi / grid.L;
  const long M = static_cast<long>(std::ceil(xi_max / dk)) + 1;
  double torus = 0.0, torus_hs = 0.0;
  const auto add = [&](double xi2) {
    const double v = spectrum2(xi2);
    torus += v;
    torus_hs += std::pow(xi2, sigma) * v;
  };
  if (n == 1) {
    for (long m = -M; m <= M; ++m) add(dk * dk * m * m);
  } else {
    for (long m1 = -M; m1 <= M; ++m1)
      for (long m2 = -M; m2 <= M; ++m2) add(dk * dk * (m1 * m1 + m2 * m2));
  }
  const double box = std::pow(2.0 * grid.L, n);
  torus /= box;
  torus_hs /= box;

  // Radial Simpson rule; the integrand varies on the scale 1 / sqrt(1 + t).
  const long nodes = 2 * std::max(2000L, static_cast<long>(xi_max * std::sqrt(1.0 + t) * 100.0));
  const double h = xi_max / static_cast<double>(nodes);
  double acc = 0.0, acc_hs = 0.0;
  for (long i = 0; i <= nodes; ++i) {
    const double r = i * h;
    const double wgt = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double v = wgt * spectrum2(r * r) * (n == 1 ? 1.0 : r);
    acc += v;
    acc_hs += std::pow(r * r, sigma) * v;
  }
  // Line measure 2 / (2 pi) for n = 1, ring measure 2 pi r / (2 pi)^2 for n = 2.
  const double measure = n == 1 ? h / 3.0 / std::numbers::pi : h / 3.0 / (2.0 * std::numbers::pi);
  PeriodizationError out;
  if (acc > 0.0) out.l2 = torus / (acc * measure) - 1.0;
  if (acc_hs > 0.0) out.hsigma = torus_hs / (acc_hs * measure) - 1.0;
  return out;
}

double free_space_horizon(const GridSpec& grid, double sigma, const InitialData& data,
                          std::span<const double> times, double t_min, double threshold) {
  double last = times.empty() ? t_min : times.back();
  double previous = t_min;
  for (double t : times) {
    if (t < t_min) continue;
    for (const auto& c : data.components) {
      if (c.a0 == 0.0 && c.a1 == 0.0) continue;
      if (periodization_error(grid, sigma, c, t).worst() >= threshold) return previous;
    }
    previous = t;
  }
  return last;
}

XnormDiagnostic xnorm_diagnostic(const RunResult& run, const SystemParams& params, double eps,
                                 double t_max, bool nonlinear) {
  XnormDiagnostic out;
  out.loss = loss_values(params, eps, nonlinear);
  const std::size_t k = params.k();
  const double r = params.n / (4.0 * params.sigma);
  std::vector<double> hi(k, 0.0), lo(k, std::numeric_limits<double>::infinity());
  for (const auto& row : run.series) {
    if (row.t > t_max) break;
    XnormRow xr;
    xr.t = row.t;
    xr.value.resize(k);
    for (std::size_t l = 0; l < k; ++l) {
      const double a = std::pow(1.0 + row.t, r - out.loss[l]);
      const double b = std::pow(1.0 + row.t, r + 0.5 - out.loss[l]);
      xr.value[l] = a * row.comps[l].l2 + b * row.comps[l].hsigma;
      hi[l] = std::max(hi[l], xr.value[l]);
      lo[l] = std::min(lo[l], xr.value[l]);
    }
    out.rows.push_back(std::move(xr));
  }
  out.ratio.resize(k);
  out.bounded = !out.rows.empty();
  for (std::size_t l = 0; l < k; ++l) {
    if (hi[l] == 0.0) {
      out.ratio[l] = 1.0;
    } else {
      out.ratio[l] = lo[l] > 0.0 ? hi[l] / lo[l] : std::numeric_limits<double>::infinity();
    }
    out.bounded = out.bounded && out.ratio[l] < kXnormBound;
  }
  return out;
}

DecayExperiment decay_experiment(const DecayConfig& cfg) {
  cfg.params.validate();
  if (cfg.nonlinear) {
    const auto flags = exponents::check_global_conditions(cfg.params);
    if (!flags.global_existence()) {
      std::string names;
      for (const auto& f : flags.failed_global()) names += (names.empty() ? "" : ", ") + f;
      throw Error(ErrorCode::ConditionsUnmet, "decay experiment needs the global hypotheses: " + names);
    }
  }
  const std::size_t k = cfg.params.k();
  const double r = cfg.params.n / (4.0 * cfg.params.sigma);
  std::vector<double> loss(k, 0.0);
  if (cfg.nonlinear) {
    const auto pred = exponents::predicted_decay(cfg.params, cfg.loss_eps);
    for (std::size_t l = 0; l < k; ++l) loss[l] = pred.l2[l] + r;
  }

  solver::RunConfig rc;
  rc.t_end = cfg.t_end;
  rc.dt = cfg.dt;
  rc.records_per_decade = cfg.records_per_decade;
  rc.first_record = 0.1;
  rc.nonlinear = cfg.nonlinear;

  DecayExperiment out;
  out.run = solver::run(cfg.params, cfg.grid, cfg.data, rc);
  if (out.run.interrupted) {
    out.interrupted = true;
    return out;
  }
  if (out.run.blowup) {
    throw Error(ErrorCode::BlowUpDuringDecayExperiment,
                "blow-up at t = " + std::to_string(out.run.blowup_time.value_or(out.run.t_final)) +
                    "; epsilon too large or the system is not supercritical");
  }

  std::vector<double> t;
  for (const auto& row : out.run.series) t.push_back(row.t);
  out.window = {cfg.t_min, free_space_horizon(cfg.grid, cfg.params.sigma, cfg.data, t, cfg.t_min,
                                              cfg.window_threshold)};
  out.pass = true;
  for (std::size_t l = 0; l < k; ++l) {
    std::vector<double> l2, hs;
    for (const auto& row : out.run.series) {
      l2.push_back(row.comps[l].l2);
      hs.push_back(row.comps[l].hsigma);
    }
    ComponentDecay cd;
    cd.l2 = fit_power_law_range(t, l2, out.window, -r, -r + loss[l], cfg.tolerance);
    cd.hsigma = fit_power_law_range(t, hs, out.window, -r - 0.5, -r - 0.5 + loss[l], cfg.tolerance);
    out.pass = out.pass && cd.l2.pass && cd.hsigma.pass;
    out.fits.push_back(cd);
  }
  out.xnorm = xnorm_diagnostic(out.run, cfg.params, cfg.loss_eps, out.window.t_max, cfg.nonlinear);
  out.pass = out.pass && out.xnorm.bounded;
  return out;
}

BlowupExperiment blowup_experiment(const BlowupConfig& cfg) {
  cfg.params.validate();
  BlowupExperiment out;
  out.expected_blowup = exponents::classify(cfg.params) == exponents::Classification::Subcritical;
  solver::RunConfig rc;
  rc.t_end = cfg.t_cap;
  rc.dt = cfg.dt;
  rc.adaptive = cfg.adaptive;
  rc.records_per_decade = cfg.records_per_decade;
  rc.blowup_threshold = cfg.blowup_threshold;
  out.run = solver::run(cfg.params, cfg.grid, cfg.data, rc);
  if (out.run.interrupted) {
    out.pass = false;
  } else if (out.expected_blowup) {
    out.pass = out.run.blowup && out.run.blowup_time && *out.run.blowup_time < cfg.t_cap;
  } else {
    out.pass = !out.run.blowup;
  }
  return out;
}

LifespanSweep assess_lifespans(std::vector<LifespanPoint> points, double expected,
                               double tolerance) {
  LifespanSweep out;
  out.expected = expected;
  out.points = std::move(points);
  std::vector<std::pair<double, double>> hits;
  for (const auto& p : out.points) {
    out.interrupted = out.interrupted || p.interrupted;
    if (p.lifespan) hits.emplace_back(p.epsilon, *p.lifespan);
  }
  std::sort(hits.begin(), hits.end());
  out.monotone = true;
  for (std::size_t i = 1; i < hits.size(); ++i)
    out.monotone = out.monotone && hits[i].second <= hits[i - 1].second;
  if (hits.size() >= kMinLifespanPoints) {
    std::vector<double> e, T;
    for (const auto& [eps, life] : hits) {
      e.push_back(eps);
      T.push_back(life);
    }
    out.fit = fit_power_law(e, T, {e.front(), e.back()}, expected, tolerance, kMinLifespanPoints);
  }
  out.pass = out.fit && out.fit->pass && out.monotone && !out.interrupted;
  return out;
}

LifespanSweep lifespan_sweep(const LifespanConfig& cfg) {
  cfg.params.validate();
  if (exponents::classify(cfg.params) != exponents::Classification::Subcritical)
    throw Error(ErrorCode::NotSubcritical, "lifespan sweeps need a subcritical system");
  if (cfg.epsilons.empty()) throw Error(ErrorCode::InvalidArgument, "lifespan sweep needs epsilons");
  for (double e : cfg.epsilons)
    if (!(e > 0.0) || !std::isfinite(e))
      throw Error(ErrorCode::InvalidArgument, "epsilons must be positive");
  if (cfg.shape.components.size() != cfg.params.k())
    throw Error(ErrorCode::InvalidArgument, "initial data must describe every component");
  for (const auto& c : cfg.shape.components)
    if (!(c.a0 >= 0.0 && c.a1 >= 0.0 && c.a0 + c.a1 > 0.0))
      throw Error(ErrorCode::InvalidArgument, "lifespan sweeps need data with positive means");
  const double expected = exponents::lifespan_exponent(cfg.params);

  std::vector<std::size_t> order(cfg.epsilons.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cfg.epsilons[a] > cfg.epsilons[b]; });

  std::vector<LifespanPoint> points(cfg.epsilons.size());
  const auto run_one = [&](std::size_t idx, double cap) {
    InitialData d = cfg.shape;
    d.epsilon = cfg.epsilons[idx];
    solver::RunConfig rc;
    rc.t_end = cap;
    rc.dt = cfg.dt;
    rc.adaptive = cfg.adaptive;
    rc.records_per_decade = cfg.records_per_decade;
    rc.blowup_threshold = cfg.blowup_threshold;
    const auto r = solver::run(cfg.params, cfg.grid, d, rc);
    LifespanPoint& p = points[idx];
    p.epsilon = d.epsilon;
    p.cap = cap;
    p.steps = r.steps;
    p.interrupted = r.interrupted;
    if (r.blowup && r.blowup_time) {
      p.lifespan = *r.blowup_time;
      p.uncertainty = r.blowup_uncertainty;
    } else {
      p.exceeded_cap = !r.interrupted;
    }
  };

  const std::size_t top = order.front();
  run_one(top, cfg.first_cap);
  const double eps_max = cfg.epsilons[top];
  const double scale = points[top].lifespan ? cfg.cap_factor * *points[top].lifespan : cfg.first_cap;
  if (!points[top].interrupted) {
    parallel_for(order.size() - 1, [&](std::size_t i) {
      const std::size_t idx = order[i + 1];
      if (cancel_requested()) {
        points[idx].epsilon = cfg.epsilons[idx];
        points[idx].interrupted = true;
        return;
      }
      run_one(idx, scale * std::pow(cfg.epsilons[idx] / eps_max, expected));
    });
  } else {
    for (std::size_t i = 1; i < order.size(); ++i) {
      points[order[i]].epsilon = cfg.epsilons[order[i]];
      points[order[i]].interrupted = true;
    }
  }
  return assess_lifespans(std::move(points), expected, cfg.tolerance);
}

ConvergenceTable convergence_study(const ConvergenceConfig& cfg) {
  if (cfg.dt_ladder.size() < 3 || cfg.N_ladder.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "convergence study needs at least 3 resolutions");
  ConvergenceTable out;
  const auto ref = fixed_step_run(cfg.params, cfg.grid, cfg.data, cfg.dt_reference, cfg.t_end, true);
  const auto ref_lin =
      fixed_step_run(cfg.params, cfg.grid, cfg.data, cfg.dt_reference, cfg.t_end, false);
  for (double dt : cfg.dt_ladder) {
    TemporalRow row;
    row.dt = dt;
    row.error = relative_distance(fixed_step_run(cfg.params, cfg.grid, cfg.data, dt, cfg.t_end, true), ref);
    row.linear_error =
        relative_distance(fixed_step_run(cfg.params, cfg.grid, cfg.data, dt, cfg.t_end, false), ref_lin);
    if (!out.temporal.empty() && row.error > 0.0) row.ratio = out.temporal.back().error / row.error;
    out.temporal.push_back(row);
  }
  out.temporal_pass = true;
  for (std::size_t i = 1; i < out.temporal.size(); ++i)
    out.temporal_pass = out.temporal_pass &&
                        std::abs(out.temporal[i].ratio - cfg.ratio_target) <= cfg.ratio_tolerance;
  out.observed_order = out.temporal.back().ratio > 0.0 ? std::log2(out.temporal.back().ratio) : 0.0;

  for (std::size_t N : cfg.N_ladder) {
    GridSpec g = cfg.grid;
    g.N = N;
    InitialData d = cfg.data;
    d.epsilon = cfg.spatial_epsilon;
    const auto u = fixed_step_run(cfg.params, g, d, cfg.dt_ladder.back(), cfg.t_end, true);
    const Grid tables(g, cfg.params.sigma);
    double peak = 0.0, tail = 0.0;
    for (const auto& comp : u) {
      for (std::size_t i = 0; i < comp.size(); ++i) {
        const double m = std::abs(comp[i]);
        peak = std::max(peak, m);
        // Largest |index| over the dimensions decides the band.
        std::size_t band = 0;
        if (g.n == 1) {
          band = static_cast<std::size_t>(std::abs(tables.mode_index(i)));
        } else {
          const long row = static_cast<long>(i / N), col = static_cast<long>(i % N);
          const long ir = row <= static_cast<long>(N / 2) ? row : row - static_cast<long>(N);
          const long ic = col <= static_cast<long>(N / 2) ? col : col - static_cast<long>(N);
          band = static_cast<std::size_t>(std::max(std::abs(ir), std::abs(ic)));
        }
        if (band >= N / 4) tail = std::max(tail, m);
      }
    }
    out.spatial.push_back({N, peak > 0.0 ? tail / peak : 0.0});
  }
  out.spatial_pass = out.spatial.back().tail < cfg.tail_limit;
  for (std::size_t i = 1; i < out.spatial.size(); ++i)
    out.spatial_pass = out.spatial_pass && out.spatial[i].tail <= out.spatial[i - 1].tail;
  out.pass = out.temporal_pass && out.spatial_pass;
  return out;
}

}  // namespace sevo::harness
