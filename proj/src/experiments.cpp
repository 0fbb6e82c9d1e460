#include "sevo/experiments.hpp"

#include <cmath>
#include <sstream>

#include "sevo/error.hpp"
#include "sevo/kernels.hpp"
#include "sevo/runtime.hpp"
#include "sevo/testfunc.hpp"

namespace sevo::io {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

Json nullable(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json run_json(const solver::RunResult& r) {
  return {{"blowup", r.blowup},
          {"blowup_time", nullable(r.blowup_time)},
          {"blowup_uncertainty", r.blowup_uncertainty},
          {"t_final", r.t_final},
          {"steps", r.steps},
          {"rejected", r.rejected},
          {"max_imag_ratio", r.max_imag_ratio},
          {"interrupted", r.interrupted},
          {"data_norm", r.data.data_norm},
          {"total_data_norm", r.data.total_norm},
          {"mean_u0", r.data.mean_u0},
          {"mean_u1", r.data.mean_u1}};
}

solver::RunConfig run_config(const ExperimentConfig& cfg) {
  solver::RunConfig rc;
  rc.t_end = cfg.run.t_end;
  rc.dt = cfg.run.dt;
  rc.adaptive = cfg.run.adaptive;
  rc.records_per_decade = cfg.run.records_per_decade;
  rc.nonlinear = cfg.run.nonlinear;
  rc.blowup_threshold = cfg.run.blowup_threshold;
  return rc;
}

// Straight line through the point (x0, y0) with the given slope.
PlotLine guide_through(const std::string& label, double slope, double x0, double y0, double x_min,
                       double x_max) {
  PlotLine g;
  g.label = label;
  g.slope = slope;
  g.intercept = std::log(y0) - slope * std::log(x0);
  g.x_min = x_min;
  g.x_max = x_max;
  g.guide = true;
  return g;
}

PlotLine fit_line(const std::string& label, const harness::FitResult& f) {
  return {label, f.slope, f.intercept, f.window.t_min, f.window.t_max, false};
}

class Writer {
 public:
  Writer(const ExperimentConfig& cfg, bool enabled) : enabled_(enabled) {
    if (!enabled_) return;
    dir_ = output_directory(cfg);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir_.string() + ": " + ec.message());
    write_json(dir_ / "config.json", {{"config", to_json(cfg)}, {"hash", hash_hex(config_hash(cfg))}});
  }
  const fs::path& dir() const { return dir_; }
  void csv(const char* name, const CsvTable& t) const {
    if (enabled_) write_csv(dir_ / name, t);
  }
  void json(const char* name, const Json& doc) const {
    if (enabled_) write_json(dir_ / name, doc);
  }
  void svg(const char* name, const std::string& text) const {
    if (enabled_) write_text(dir_ / name, text);
  }

 private:
  bool enabled_;
  fs::path dir_;
};

void exponents_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  const auto rep = exponents::make_report(cfg.params, cfg.decay.loss_eps);
  out.summary["report"] = to_json(rep);
  out.pass = true;
  std::ostringstream os;
  os << "gamma = " << vec(rep.gamma.gamma) << "\n";
  os << "largest gamma at component " << rep.gamma.argmax + 1 << ", n/(2 sigma) = "
     << num(cfg.params.critical_ratio()) << "\n";
  os << "classification: " << exponents::classification_name(rep.classification) << "\n";
  if (rep.lifespan) os << "lifespan exponent: " << num(*rep.lifespan) << "\n";
  os << "global existence hypotheses: " << (rep.flags.global_existence() ? "hold" : "fail") << "\n";
  if (rep.decay) {
    os << "predicted L2 decay: " << vec(rep.decay->l2) << "\n";
    os << "predicted H^sigma decay: " << vec(rep.decay->hsigma) << "\n";
  }
  os << "loss of decay (relabeled): " << vec(rep.epsilon_seq) << "\n";
  for (const auto& warn : rep.warnings) os << "warning: " << warn << "\n";
  out.text = os.str();
  w.json("exponents.json", out.summary["report"]);
}

void kernels_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  const auto t_grid = kernels::log_grid(10.0, 1000.0, 25);
  const double tol = cfg.tolerances.kernel_slope;
  struct Case {
    kernels::Regime regime;
    double s;
    int n;
    double sigma;
  };
  std::vector<Case> cases;
  for (auto [n, sigma] : {std::pair{1, 1.0}, std::pair{2, 1.0}, std::pair{1, 1.5}}) {
    cases.push_back({kernels::Regime::L2L2, sigma, n, sigma});
    cases.push_back({kernels::Regime::L2L2, 2.0 * sigma, n, sigma});
    cases.push_back({kernels::Regime::L1L2, 0.0, n, sigma});
  }
  CsvTable table;
  table.header.push_back("t");
  for (double t : t_grid) table.rows.push_back({t});
  std::vector<PlotSeries> series;
  std::vector<PlotLine> lines;
  Json profiles = Json::array();
  std::ostringstream os;
  out.pass = true;
  for (const auto& c : cases) {
    std::ostringstream name;
    name << kernels::regime_name(c.regime) << "_s" << num(c.s) << "_n" << c.n << "_sigma" << num(c.sigma);
    Json j = {{"name", name.str()}, {"regime", kernels::regime_name(c.regime)}, {"s", c.s},
              {"n", c.n}, {"sigma", c.sigma}};
    try {
      const auto p = kernels::decay_profile(c.s, c.regime, c.n, c.sigma, t_grid);
      const bool ok = std::abs(p.slope - p.expected) <= tol;
      out.pass = out.pass && ok;
      j.update({{"slope", p.slope}, {"expected", p.expected}, {"r_squared", p.r_squared},
                {"slope_stderr", p.slope_stderr}, {"pass", ok}});
      table.header.push_back(name.str());
      PlotSeries ps{name.str(), {}, {}, false};
      for (std::size_t i = 0; i < p.points.size(); ++i) {
        table.rows[i].push_back(p.points[i].value);
        ps.x.push_back(p.points[i].t);
        ps.y.push_back(p.points[i].value);
      }
      series.push_back(ps);
      lines.push_back(guide_through("slope " + num(p.expected), p.expected, t_grid.front(),
                                    p.points.front().value, t_grid.front(), t_grid.back()));
      os << name.str() << ": slope " << num(p.slope) << " expected " << num(p.expected) << " "
         << verdict(ok) << "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FitUnstable) throw;
      out.pass = false;
      j.update({{"error", e.what()}, {"pass", false}});
      os << name.str() << ": " << e.what() << " FAIL\n";
    }
    profiles.push_back(j);
  }

  // Residual of the modal ODE on [0, 50] x [0, 100], seam included.
  double residual = 0.0;
  std::vector<double> a_values;
  for (int i = 0; i <= 200; ++i) a_values.push_back(0.5 * i);
  for (double a : {1.0 - 1e-6, 1.0 + 1e-6, 1.0 - 5e-5, 1.0 + 5e-5}) a_values.push_back(a);
  for (int i = 0; i <= 100; ++i)
    for (double a : a_values) residual = std::max(residual, kernels::ode_residual(0.5 * i, a, 1e-4));
  double jump = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const auto c = kernels::propagator(0.5 * i, 1.0);
    for (double a : {1.0 - 1e-6, 1.0 + 1e-6}) {
      const auto s = kernels::propagator(0.5 * i, a);
      jump = std::max({jump, std::abs(s.k0 - c.k0), std::abs(s.k1 - c.k1)});
    }
  }
  const bool ode_ok = residual <= cfg.tolerances.kernel_residual && jump <= cfg.tolerances.kernel_residual;
  out.pass = out.pass && ode_ok;
  os << "ODE residual " << num(residual) << ", seam mismatch " << num(jump) << " " << verdict(ode_ok) << "\n";
  out.summary["profiles"] = profiles;
  out.summary["ode_residual"] = residual;
  out.summary["seam_mismatch"] = jump;
  out.text = os.str();
  w.csv("kernels.csv", table);
  w.json("kernels.json", out.summary);
  w.svg("kernels.svg", loglog_svg("Multiplier decay profiles", "t", "norm", series, lines));
}

void norms_plot(const Writer& w, const char* name, const std::string& title,
                const std::vector<solver::NormRow>& series, std::size_t k, bool sup,
                std::vector<PlotLine> lines = {}) {
  std::vector<PlotSeries> ps;
  for (std::size_t l = 0; l < k; ++l) {
    PlotSeries a{(sup ? "sup u_" : "L2 u_") + std::to_string(l + 1), {}, {}, false};
    PlotSeries b{"H^sigma u_" + std::to_string(l + 1), {}, {}, false};
    for (const auto& r : series) {
      a.x.push_back(r.t);
      a.y.push_back(sup ? r.comps[l].sup : r.comps[l].l2);
      b.x.push_back(r.t);
      b.y.push_back(r.comps[l].hsigma);
    }
    ps.push_back(a);
    if (!sup) ps.push_back(b);
  }
  w.svg(name, loglog_svg(title, "t", sup ? "sup norm" : "norm", ps, lines));
}

void simulate_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  const auto r = solver::run(cfg.params, cfg.grid(), cfg.resolved_data(), run_config(cfg));
  const std::size_t k = cfg.params.k();
  out.summary["run"] = run_json(r);
  out.interrupted = r.interrupted;
  out.pass = !r.interrupted;
  std::ostringstream os;
  os << "t_final " << num(r.t_final) << ", steps " << r.steps << ", rejected " << r.rejected << "\n";
  if (r.blowup) os << "blow-up at t = " << num(r.blowup_time.value_or(r.t_final)) << "\n";
  if (!r.series.empty()) {
    const auto& last = r.series.back();
    for (std::size_t l = 0; l < k; ++l)
      os << "u_" << l + 1 << ": L2 " << num(last.comps[l].l2) << ", sup " << num(last.comps[l].sup) << "\n";
  }
  out.text = os.str();
  w.csv("norms.csv", norms_table(r.series, k));
  w.json("summary.json", out.summary);
  norms_plot(w, "norms.svg", "Norms", r.series, k, false);
}

void decay_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  harness::DecayConfig dc;
  dc.params = cfg.params;
  dc.grid = cfg.grid();
  dc.data = cfg.resolved_data();
  dc.t_end = cfg.run.t_end;
  dc.dt = cfg.run.dt;
  dc.records_per_decade = cfg.run.records_per_decade;
  dc.t_min = cfg.decay.t_min;
  dc.window_threshold = cfg.tolerances.window_threshold;
  dc.loss_eps = cfg.decay.loss_eps;
  dc.tolerance = cfg.tolerances.decay_slope;
  dc.nonlinear = cfg.run.nonlinear;
  const auto ex = harness::decay_experiment(dc);
  const std::size_t k = cfg.params.k();
  out.interrupted = ex.interrupted;
  out.pass = ex.pass;
  out.summary["run"] = run_json(ex.run);
  w.csv("norms.csv", norms_table(ex.run.series, k));
  if (ex.interrupted) {
    out.text = "interrupted at t = " + num(ex.run.t_final) + "\n";
    w.json("decay.json", out.summary);
    return;
  }
  Json fits = Json::array();
  std::ostringstream os;
  os << "fit window [" << num(ex.window.t_min) << ", " << num(ex.window.t_max) << "]\n";
  std::vector<PlotLine> lines;
  for (std::size_t l = 0; l < k; ++l) {
    const auto& f = ex.fits[l];
    fits.push_back({{"component", l + 1}, {"l2", to_json(f.l2)}, {"hsigma", to_json(f.hsigma)}});
    os << "u_" << l + 1 << " L2 slope " << num(f.l2.slope) << " in [" << num(f.l2.expected_low) << ", "
       << num(f.l2.expected_high) << "] +- " << num(f.l2.tolerance) << " " << verdict(f.l2.pass) << "\n";
    os << "u_" << l + 1 << " H^sigma slope " << num(f.hsigma.slope) << " in [" << num(f.hsigma.expected_low)
       << ", " << num(f.hsigma.expected_high) << "] +- " << num(f.hsigma.tolerance) << " "
       << verdict(f.hsigma.pass) << "\n";
    lines.push_back(fit_line("fit L2 u_" + std::to_string(l + 1), f.l2));
    lines.push_back(fit_line("fit H^sigma u_" + std::to_string(l + 1), f.hsigma));
  }
  // Expected-slope guides anchored at the fitted value at t_min.
  for (const auto* f : {&ex.fits.back().l2, &ex.fits.back().hsigma}) {
    const double y0 = std::exp(f->intercept + f->slope * std::log(f->window.t_min));
    lines.push_back(guide_through("slope " + num(f->expected), f->expected, f->window.t_min, y0,
                                  f->window.t_min, f->window.t_max));
  }
  os << "xnorm max/min " << vec(ex.xnorm.ratio) << " " << verdict(ex.xnorm.bounded) << "\n";
  out.summary["window"] = {{"t_min", ex.window.t_min}, {"t_max", ex.window.t_max}};
  out.summary["fits"] = fits;
  out.summary["xnorm"] = {{"loss", ex.xnorm.loss}, {"ratio", ex.xnorm.ratio}, {"bounded", ex.xnorm.bounded}};
  out.text = os.str();

  CsvTable xt;
  xt.header.push_back("t");
  for (std::size_t l = 1; l <= k; ++l) xt.header.push_back("x_" + std::to_string(l));
  for (const auto& row : ex.xnorm.rows) {
    std::vector<double> r{row.t};
    r.insert(r.end(), row.value.begin(), row.value.end());
    xt.rows.push_back(std::move(r));
  }
  w.csv("xnorm.csv", xt);
  w.json("decay.json", out.summary);
  norms_plot(w, "decay.svg", "Decay of the norms", ex.run.series, k, false, lines);
}

void blowup_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  harness::BlowupConfig bc;
  bc.params = cfg.params;
  bc.grid = cfg.grid();
  bc.data = cfg.resolved_data();
  bc.t_cap = cfg.run.t_end;
  bc.dt = cfg.run.dt;
  bc.adaptive = cfg.run.adaptive;
  bc.records_per_decade = cfg.run.records_per_decade;
  bc.blowup_threshold = cfg.run.blowup_threshold;
  const auto ex = harness::blowup_experiment(bc);
  const std::size_t k = cfg.params.k();
  out.interrupted = ex.run.interrupted;
  out.pass = ex.pass;
  out.summary["run"] = run_json(ex.run);
  out.summary["expected_blowup"] = ex.expected_blowup;
  out.summary["t_cap"] = bc.t_cap;
  std::ostringstream os;
  os << "classification predicts " << (ex.expected_blowup ? "blow-up" : "global existence") << "\n";
  if (ex.run.blowup) {
    os << "blow-up at T = " << num(ex.run.blowup_time.value_or(ex.run.t_final)) << " +- "
       << num(ex.run.blowup_uncertainty) << " (cap " << num(bc.t_cap) << ")\n";
  } else {
    os << "no blow-up up to t = " << num(ex.run.t_final) << "\n";
  }
  os << "verdict " << verdict(ex.pass) << "\n";
  out.text = os.str();
  w.csv("norms.csv", norms_table(ex.run.series, k));
  w.json("blowup.json", out.summary);
  norms_plot(w, "blowup.svg", "Sup norms", ex.run.series, k, true);
}

void lifespan_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  harness::LifespanConfig lc;
  lc.params = cfg.params;
  lc.grid = cfg.grid();
  lc.shape = cfg.resolved_data();
  lc.epsilons = cfg.lifespan.epsilons;
  lc.dt = cfg.run.dt;
  lc.adaptive = cfg.run.adaptive;
  lc.first_cap = cfg.lifespan.first_cap;
  lc.cap_factor = cfg.lifespan.cap_factor;
  lc.tolerance = cfg.tolerances.lifespan_slope;
  lc.records_per_decade = cfg.run.records_per_decade;
  lc.blowup_threshold = cfg.run.blowup_threshold;
  const auto s = harness::lifespan_sweep(lc);
  out.interrupted = s.interrupted;
  out.pass = s.pass;
  Json pts = Json::array();
  CsvTable table{{"epsilon", "T"}, {}};
  PlotSeries ps{"T(eps)", {}, {}, true};
  std::ostringstream os;
  os << "epsilon        T              cap\n";
  for (const auto& p : s.points) {
    pts.push_back({{"epsilon", p.epsilon}, {"lifespan", nullable(p.lifespan)}, {"uncertainty", p.uncertainty},
                   {"cap", p.cap}, {"exceeded_cap", p.exceeded_cap}, {"steps", p.steps},
                   {"interrupted", p.interrupted}});
    os << num(p.epsilon) << "  ";
    if (p.lifespan) {
      table.rows.push_back({p.epsilon, *p.lifespan});
      ps.x.push_back(p.epsilon);
      ps.y.push_back(*p.lifespan);
      os << num(*p.lifespan);
    } else {
      os << (p.interrupted ? "interrupted" : "no blow-up at cap");
    }
    os << "  " << num(p.cap) << "\n";
  }
  std::vector<PlotLine> lines;
  out.summary["points"] = pts;
  out.summary["expected_slope"] = s.expected;
  out.summary["monotone"] = s.monotone;
  if (s.fit) {
    out.summary["fit"] = to_json(*s.fit);
    os << "fitted slope " << num(s.fit->slope) << " vs " << num(s.expected) << " +- " << num(s.fit->tolerance)
       << (s.monotone ? "" : " (T not monotone)") << " " << verdict(s.pass) << "\n";
    lines.push_back(fit_line("fit", *s.fit));
    const double x0 = s.fit->window.t_min;
    lines.push_back(guide_through("slope " + num(s.expected), s.expected, x0,
                                  std::exp(s.fit->intercept + s.fit->slope * std::log(x0)), x0,
                                  s.fit->window.t_max));
  } else {
    out.summary["fit"] = nullptr;
    os << "fewer than " << harness::kMinLifespanPoints << " blow-ups, no fit FAIL\n";
  }
  out.text = os.str();
  w.csv("lifespan.csv", table);
  w.json("lifespan.json", out.summary);
  w.svg("lifespan.svg", loglog_svg("Lifespan against data size", "epsilon", "T", {ps}, lines));
}

void testfunc_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  const auto& tf = cfg.testfunc;
  const int n = cfg.params.n;
  std::ostringstream os;
  out.pass = true;

  Json scaling = Json::array();
  for (double nu : tf.scaling_nu) {
    for (double R : tf.scaling_R) {
      const auto r = testfunc::check_scaling_identity(nu, R);
      const bool ok = r.error < cfg.tolerances.scaling_error && r.decreasing;
      out.pass = out.pass && ok;
      Json levels = Json::array();
      for (const auto& lv : r.levels) levels.push_back({{"dx", lv.dx}, {"N", lv.N}, {"error", lv.error}});
      scaling.push_back({{"nu", nu}, {"R", R}, {"error", r.error}, {"decreasing", r.decreasing},
                         {"levels", levels}, {"pass", ok}});
      os << "scaling identity nu=" << num(nu) << " R=" << num(R) << ": error " << num(r.error) << " "
         << verdict(ok) << "\n";
    }
  }

  Json weighted = Json::array();
  const GridSpec wgrid{1, 1024, 64.0};
  for (double nu : tf.weight_nu) {
    const double q = 1.0 + 2.0 * testfunc::sigma_bar(nu);
    const auto r = testfunc::check_weighted_decay(nu, q, wgrid);
    out.pass = out.pass && r.stable;
    weighted.push_back({{"nu", nu}, {"q", q}, {"weight_exponent", r.weight_exponent},
                        {"ratio_N", r.ratio_coarse}, {"ratio_2N", r.ratio_fine},
                        {"relative_change", r.relative_change}, {"stable", r.stable}});
    os << "weighted decay nu=" << num(nu) << ": sup ratio " << num(r.ratio_coarse) << " / "
       << num(r.ratio_fine) << " " << verdict(r.stable) << "\n";
  }

  Json eta = Json::array();
  const auto add_eta = [&](double lambda, int mu, bool expect_violation) {
    const auto e = testfunc::eta_condition(lambda, mu);
    const bool ok = e.violated == expect_violation;
    out.pass = out.pass && ok;
    eta.push_back({{"lambda", lambda}, {"lambda_conj", e.lambda_conj}, {"mu", mu}, {"sup", e.sup},
                   {"approach_sup", e.approach_sup}, {"exponent", e.exponent}, {"violated", e.violated},
                   {"expected_violation", expect_violation}, {"pass", ok}});
    os << "eta condition lambda=" << num(lambda) << " mu=" << mu << ": "
       << (e.violated ? "violated" : "finite") << " " << verdict(ok) << "\n";
  };
  for (double p : cfg.params.p) add_eta(p, tf.mu, !(p > 1.0 && (tf.mu - 2.0 * p / (p - 1.0)) >= 0.0));
  add_eta(2.0, 2, true);

  Json gn = Json::array();
  const GridSpec ggrid{n, n == 1 ? std::size_t{4096} : std::size_t{256}, 40.0};
  for (double p : cfg.params.p) {
    const double s = cfg.params.sigma;
    const double theta1 = (n / s) * (0.5 - 1.0 / p);
    const double theta2 = (n / s) * (0.5 - 1.0 / (2.0 * p));
    const double g1 = exponents::gn_theta(p, 2.0, 2.0, 0.0, s, n).theta;
    const double g2 = exponents::gn_theta(2.0 * p, 2.0, 2.0, 0.0, s, n).theta;
    const bool theta_ok = std::abs(g1 - theta1) <= 1e-12 && std::abs(g2 - theta2) <= 1e-12;
    const auto sc1 = testfunc::gn_scaling_check(p, s, n, tf.dilations, ggrid);
    const auto sc2 = testfunc::gn_scaling_check(2.0 * p, s, n, tf.dilations, ggrid);
    const bool spread_ok = sc1.spread < cfg.tolerances.gn_spread && sc2.spread < cfg.tolerances.gn_spread;
    out.pass = out.pass && theta_ok && spread_ok;
    gn.push_back({{"p", p}, {"theta_1", g1}, {"theta_1_hand", theta1}, {"theta_2", g2},
                  {"theta_2_hand", theta2}, {"spread_q_p", sc1.spread}, {"spread_q_2p", sc2.spread},
                  {"pass", theta_ok && spread_ok}});
    os << "GN p=" << num(p) << ": theta " << num(g1) << ", " << num(g2) << "; spread " << num(sc1.spread)
       << ", " << num(sc2.spread) << " " << verdict(theta_ok && spread_ok) << "\n";
  }

  out.summary["scaling_identity"] = scaling;
  out.summary["weighted_decay"] = weighted;
  out.summary["eta_condition"] = eta;
  out.summary["gagliardo_nirenberg"] = gn;
  out.text = os.str();
  w.json("testfunc.json", out.summary);
}

void convergence_experiment(const ExperimentConfig& cfg, const Writer& w, ExperimentOutcome& out) {
  harness::ConvergenceConfig cc;
  cc.params = cfg.params;
  cc.grid = cfg.grid();
  cc.data = cfg.resolved_data();
  cc.t_end = cfg.convergence.t_end;
  cc.dt_ladder = cfg.convergence.dt_ladder;
  cc.dt_reference = cfg.convergence.dt_reference;
  cc.N_ladder = cfg.convergence.N_ladder;
  cc.ratio_tolerance = cfg.tolerances.convergence_ratio;
  cc.tail_limit = cfg.tolerances.spectral_tail;
  cc.spatial_epsilon = cfg.convergence.spatial_epsilon;
  const auto tab = harness::convergence_study(cc);
  out.pass = tab.pass;
  CsvTable tt{{"dt", "error", "ratio", "linear_error"}, {}};
  CsvTable st{{"N", "tail"}, {}};
  Json temporal = Json::array(), spatial = Json::array();
  PlotSeries ps{"error", {}, {}, true};
  std::ostringstream os;
  for (const auto& r : tab.temporal) {
    tt.rows.push_back({r.dt, r.error, r.ratio, r.linear_error});
    temporal.push_back({{"dt", r.dt},
                        {"error", r.error},
                        {"ratio", std::isnan(r.ratio) ? Json(nullptr) : Json(r.ratio)},
                        {"linear_error", r.linear_error}});
    ps.x.push_back(r.dt);
    ps.y.push_back(r.error);
    os << "dt " << num(r.dt) << ": error " << num(r.error) << ", ratio " << (std::isnan(r.ratio) ? std::string("-") : num(r.ratio)) << ", linear "
       << num(r.linear_error) << "\n";
  }
  for (const auto& r : tab.spatial) {
    st.rows.push_back({static_cast<double>(r.N), r.tail});
    spatial.push_back({{"N", r.N}, {"tail", r.tail}});
    os << "N " << r.N << ": spectral tail " << num(r.tail) << "\n";
  }
  os << "temporal " << verdict(tab.temporal_pass) << ", spatial " << verdict(tab.spatial_pass) << ", order "
     << num(tab.observed_order) << "\n";
  out.summary["temporal"] = temporal;
  out.summary["spatial"] = spatial;
  out.summary["observed_order"] = tab.observed_order;
  out.summary["temporal_pass"] = tab.temporal_pass;
  out.summary["spatial_pass"] = tab.spatial_pass;
  out.text = os.str();
  std::vector<PlotLine> lines;
  if (!ps.x.empty()) {
    lines.push_back(guide_through("slope 2", 2.0, ps.x.front(), ps.y.front(), ps.x.back(), ps.x.front()));
  }
  w.csv("convergence.csv", tt);
  w.csv("spatial.csv", st);
  w.json("convergence.json", out.summary);
  w.svg("convergence.svg", loglog_svg("Temporal self-convergence", "dt", "relative error", {ps}, lines));
}

}  // namespace

Json to_json(const exponents::ExponentReport& r) {
  const auto& f = r.flags;
  Json doc;
  doc["params"] = {{"n", r.params.n}, {"sigma", r.params.sigma}, {"p", r.params.p}};
  doc["eps"] = r.eps;
  doc["gamma"] = r.gamma.gamma;
  doc["gamma_argmax"] = r.gamma.argmax + 1;
  doc["gamma_residual"] = r.gamma.residual;
  doc["critical_ratio"] = r.params.critical_ratio();
  doc["classification"] = exponents::classification_name(r.classification);
  doc["critical_case_open"] = r.critical_case_open;
  std::vector<std::size_t> order;
  for (auto i : r.relabeling.old_index) order.push_back(i + 1);
  doc["relabeling"] = order;
  doc["conditions"] = {{"p1_bound", f.p1_bound},
                       {"intermediate_bound", f.intermediate_bound},
                       {"low_dimension", f.low_dimension},
                       {"p_at_least_two", f.p_at_least_two},
                       {"supercritical", f.supercritical},
                       {"subcritical", f.subcritical},
                       {"lower_lifespan", f.lower_lifespan},
                       {"global_existence", f.global_existence()}};
  doc["epsilon_seq"] = r.epsilon_seq;
  doc["alpha_seq"] = r.alpha_seq;
  doc["beta_seq"] = r.beta_seq;
  doc["decay"] = r.decay ? Json{{"l2", r.decay->l2}, {"hsigma", r.decay->hsigma}} : Json(nullptr);
  doc["lifespan_exponent"] = nullable(r.lifespan);
  doc["warnings"] = r.warnings;
  return doc;
}

Json to_json(const harness::FitResult& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared},
          {"slope_stderr", f.slope_stderr},
          {"points", f.points},
          {"window", {f.window.t_min, f.window.t_max}},
          {"expected", f.expected},
          {"expected_interval", {f.expected_low, f.expected_high}},
          {"tolerance", f.tolerance},
          {"pass", f.pass}};
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files) {
  cfg.params.validate();
  if (cfg.kind != ExperimentKind::Exponents && cfg.kind != ExperimentKind::Kernels &&
      cfg.kind != ExperimentKind::Testfunc) {
    cfg.grid().validate();
    cfg.resolved_data();
  }
  ExperimentOutcome out;
  const Writer w(cfg, write_files);
  out.output_dir = w.dir();
  out.summary["kind"] = kind_name(cfg.kind);
  out.summary["hash"] = hash_hex(config_hash(cfg));
  switch (cfg.kind) {
    case ExperimentKind::Exponents: exponents_experiment(cfg, w, out); break;
    case ExperimentKind::Kernels: kernels_experiment(cfg, w, out); break;
    case ExperimentKind::Simulate: simulate_experiment(cfg, w, out); break;
    case ExperimentKind::Decay: decay_experiment(cfg, w, out); break;
    case ExperimentKind::Blowup: blowup_experiment(cfg, w, out); break;
    case ExperimentKind::Lifespan: lifespan_experiment(cfg, w, out); break;
    case ExperimentKind::Testfunc: testfunc_experiment(cfg, w, out); break;
    case ExperimentKind::Convergence: convergence_experiment(cfg, w, out); break;
  }
  out.summary["pass"] = out.pass;
  out.summary["interrupted"] = out.interrupted;
  if (out.interrupted) out.pass = false;
  if (write_files) write_json(out.output_dir / "summary.json", out.summary);
  return out;
}

}  // namespace sevo::io
