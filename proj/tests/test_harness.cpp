#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "sevo/error.hpp"
#include "sevo/harness.hpp"
#include "sevo/kernels.hpp"

using namespace sevo;
using namespace sevo::harness;

namespace {

SystemParams pair(double p1, double p2) { return {1, 1.0, {p1, p2}}; }

InitialData gaussians(double eps) {
  InitialData d;
  d.epsilon = eps;
  d.components = {{1.0, 1.0, 1.0, {}}, {1.0, 1.0, 1.0, {}}};
  return d;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

// Poisson summation for a Gaussian lattice sum with spacing pi / L against
// the integral: 2 sum_{k >= 1} (weight) exp(-(2 L k)^2 / (2 w^2)).
double poisson_l2(double L, double w) {
  double s = 0.0;
  for (int k = 1; k < 20; ++k) s += 2.0 * std::exp(-std::pow(2.0 * L * k, 2) / (2.0 * w * w));
  return s;
}
double poisson_h1(double L, double w) {
  double s = 0.0;
  for (int k = 1; k < 20; ++k) {
    const double x2 = std::pow(2.0 * L * k, 2);
    s += 2.0 * (1.0 - x2 / (w * w)) * std::exp(-x2 / (2.0 * w * w));
  }
  return s;
}

}  // namespace

TEST_CASE("fit recovers planted exponents") {
  const auto t = kernels::log_grid(10.0, 1000.0, 40);
  std::vector<double> y(t.size()), z(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    y[i] = std::pow(1.0 + t[i], -0.5);
    z[i] = 3.0 * std::pow(t[i], -2.0);
  }
  const auto f = fit_power_law(t, y, {10.0, 1000.0}, -0.5, 0.01);
  CHECK(std::abs(f.slope + 0.5) <= 0.01);
  CHECK(f.pass);
  CHECK(f.points == 40);
  const auto g = fit_power_law(t, z, {10.0, 1000.0}, -2.0, 1e-9);
  CHECK(g.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(g.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(g.r_squared == doctest::Approx(1.0));
}

TEST_CASE("fit under 1% multiplicative noise") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto t = kernels::log_grid(10.0, 1000.0, 40);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = std::pow(t[i], -0.75) * std::exp(noise(rng));
    worst = std::max(worst, std::abs(fit_power_law(t, y, {10.0, 1000.0}, -0.75, 0.03).slope + 0.75));
  }
  CHECK(worst <= 0.03);
}

TEST_CASE("fit window and value guards") {
  const auto t = kernels::log_grid(1.0, 100.0, 20);
  std::vector<double> y(t.size(), 1.0);
  CHECK(code_of([&] { fit_power_law(t, y, {50.0, 100.0}, 0.0, 0.1); }) == ErrorCode::EmptyWindow);
  y[10] = 0.0;
  CHECK(code_of([&] { fit_power_law(t, y, {1.0, 100.0}, 0.0, 0.1); }) == ErrorCode::NonPositiveValues);
  // Outside the window the value is ignored.
  CHECK_NOTHROW(fit_power_law(t, y, {t[11], 100.0}, 0.0, 0.1, 5));
}

TEST_CASE("verdict uses the widened interval and R^2") {
  CHECK(fit_verdict(-0.2, 0.99, -0.25, -0.24, 0.05));
  CHECK_FALSE(fit_verdict(-0.18, 0.99, -0.25, -0.24, 0.05));
  CHECK(fit_verdict(-0.30, 0.99, -0.25, -0.24, 0.05));
  CHECK_FALSE(fit_verdict(-0.25, 0.97, -0.25, -0.24, 0.05));
}

TEST_CASE("periodization error matches Poisson summation at t = 0") {
  for (double L : {1.0, 1.5, 2.0}) {
    const auto e = periodization_error({1, 64, L}, 1.0, {1.0, 0.0, 1.0, {}}, 0.0);
    CHECK(e.l2 == doctest::Approx(poisson_l2(L, 1.0)).epsilon(1e-8));
    CHECK(e.hsigma == doctest::Approx(poisson_h1(L, 1.0)).epsilon(1e-8));
  }
  // The 2D lattice sum factorises.
  const double one = poisson_l2(1.5, 1.0);
  const auto e2 = periodization_error({2, 64, 1.5}, 1.0, {1.0, 0.0, 1.0, {}}, 0.0);
  CHECK(e2.l2 == doctest::Approx((1.0 + one) * (1.0 + one) - 1.0).epsilon(1e-8));
}

TEST_CASE("periodization error grows as the solution spreads") {
  const GridSpec g{1, 512, 40.0};
  const solver::ComponentData c{1.0, 1.0, 1.0, {}};
  double prev = 0.0;
  for (double t : {50.0, 100.0, 150.0, 200.0, 300.0}) {
    const auto e = periodization_error(g, 1.0, c, t);
    CHECK(e.l2 >= 0.0);
    CHECK(e.hsigma <= 0.0);
    CHECK(e.worst() > prev);
    prev = e.worst();
  }
  CHECK(periodization_error(g, 1.0, c, 20.0).worst() < 1e-10);
  const auto times = kernels::log_grid(1.0, 1e4, 81);
  const double t2 = free_space_horizon(g, 1.0, gaussians(1e-3), times, 20.0);
  CHECK(t2 > 120.0);
  CHECK(t2 < 160.0);
}

TEST_CASE("xnorm diagnostic") {
  RunResult run;
  for (double t : kernels::log_grid(0.1, 100.0, 30)) {
    solver::NormRow row;
    row.t = t;
    row.comps.resize(2);
    for (auto& c : row.comps) {
      c.l2 = std::pow(1.0 + t, -0.25);
      c.hsigma = std::pow(1.0 + t, -0.75);
    }
    run.series.push_back(row);
  }
  auto x = xnorm_diagnostic(run, pair(3, 4), 0.01, 100.0, false);
  for (const auto& row : x.rows)
    for (double v : row.value) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x.bounded);
  CHECK(x.ratio[0] == doctest::Approx(1.0));

  // The loss of decay enters the weights of the non-maximal component.
  x = xnorm_diagnostic(run, pair(3, 4), 0.01, 100.0, true);
  CHECK(x.loss[1] == 0.0);
  CHECK(x.loss[0] > 0.0);

  for (auto& row : run.series)
    for (auto& c : row.comps) c.l2 = c.hsigma = 0.0;
  x = xnorm_diagnostic(run, pair(3, 4), 0.01, 100.0, true);
  for (const auto& row : x.rows)
    for (double v : row.value) CHECK(v == 0.0);
  CHECK(x.bounded);

  for (auto& row : run.series)
    for (auto& c : row.comps) c.l2 = c.hsigma = row.t;
  CHECK_FALSE(xnorm_diagnostic(run, pair(3, 4), 0.01, 100.0, true).bounded);
}

TEST_CASE("linear decay slopes agree with the multiplier profile") {
  DecayConfig cfg;
  cfg.params = pair(3, 4);
  cfg.grid = {1, 512, 40.0};
  cfg.data = gaussians(1e-3);
  cfg.t_end = 300.0;
  cfg.nonlinear = false;
  const auto ex = decay_experiment(cfg);
  const auto prof = kernels::decay_profile(0.0, kernels::Regime::L1L2, 1, 1.0,
                                           kernels::log_grid(ex.window.t_min, ex.window.t_max, 20));
  for (const auto& f : ex.fits) {
    CHECK(std::abs(f.l2.slope - prof.slope) <= 0.02);
    CHECK(f.l2.expected_low == f.l2.expected_high);
    CHECK(f.l2.pass);
    CHECK(f.hsigma.pass);
  }
  CHECK(ex.pass);
}

TEST_CASE("nonlinear decay experiment on a short horizon") {
  DecayConfig cfg;
  cfg.params = pair(3, 4);
  cfg.grid = {1, 512, 40.0};
  cfg.data = gaussians(1e-3);
  cfg.t_end = 300.0;
  const auto ex = decay_experiment(cfg);
  REQUIRE(ex.fits.size() == 2);
  CHECK(ex.fits[0].l2.expected_high > ex.fits[0].l2.expected_low);
  CHECK(ex.fits[1].l2.expected_high == ex.fits[1].l2.expected_low);
  CHECK(ex.fits[1].l2.slope == doctest::Approx(-0.25).epsilon(0.1));
  CHECK(ex.fits[1].hsigma.slope == doctest::Approx(-0.75).epsilon(0.1));
  CHECK(ex.xnorm.bounded);
  CHECK(ex.pass);
}

TEST_CASE("decay experiment guards") {
  DecayConfig cfg;
  cfg.params = pair(2, 2);
  cfg.grid = {1, 256, 40.0};
  cfg.data = gaussians(1e-3);
  cfg.t_end = 10.0;
  CHECK(code_of([&] { decay_experiment(cfg); }) == ErrorCode::ConditionsUnmet);
  cfg.params = pair(3, 4);
  cfg.data = gaussians(5.0);
  cfg.t_end = 100.0;
  CHECK(code_of([&] { decay_experiment(cfg); }) == ErrorCode::BlowUpDuringDecayExperiment);
}

TEST_CASE("blow-up experiment verdicts follow the classification") {
  BlowupConfig cfg;
  cfg.params = pair(2, 2);
  cfg.grid = {1, 256, 40.0};
  cfg.data = gaussians(3.0);
  cfg.t_cap = 50.0;
  auto ex = blowup_experiment(cfg);
  CHECK(ex.expected_blowup);
  CHECK(ex.run.blowup);
  CHECK(ex.pass);

  cfg.params = pair(3, 4);
  cfg.data = gaussians(1e-3);
  cfg.t_cap = 10.0;
  ex = blowup_experiment(cfg);
  CHECK_FALSE(ex.expected_blowup);
  CHECK(ex.pass);
}

TEST_CASE("synthetic lifespans") {
  std::vector<LifespanPoint> pts;
  for (double e : {0.05, 0.1, 0.2, 0.4}) {
    LifespanPoint p;
    p.epsilon = e;
    p.lifespan = 7.0 * std::pow(e, -2.0);
    pts.push_back(p);
  }
  auto s = assess_lifespans(pts, -2.0, 0.3);
  REQUIRE(s.fit);
  CHECK(s.fit->slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(s.monotone);
  CHECK(s.pass);

  // A missing point leaves too few for a fit.
  pts[1].lifespan.reset();
  pts[1].exceeded_cap = true;
  s = assess_lifespans(pts, -2.0, 0.3);
  CHECK_FALSE(s.fit);
  CHECK_FALSE(s.pass);

  // Five points with one missing still fit.
  LifespanPoint extra;
  extra.epsilon = 0.8;
  extra.lifespan = 7.0 / 0.64;
  pts.push_back(extra);
  s = assess_lifespans(pts, -2.0, 0.3);
  REQUIRE(s.fit);
  CHECK(s.pass);

  // A lifespan that grows with eps breaks monotonicity.
  *pts[0].lifespan = 1.0;
  s = assess_lifespans(pts, -2.0, 0.3);
  CHECK_FALSE(s.monotone);
  CHECK_FALSE(s.pass);
}

TEST_CASE("lifespan sweep guards and caps") {
  LifespanConfig cfg;
  cfg.params = pair(3, 4);
  cfg.grid = {1, 256, 40.0};
  cfg.shape = gaussians(1.0);
  cfg.epsilons = {1.0, 2.0};
  CHECK(code_of([&] { lifespan_sweep(cfg); }) == ErrorCode::NotSubcritical);
  cfg.params = pair(2, 2);
  cfg.shape.components[0].a0 = -1.0;
  CHECK(code_of([&] { lifespan_sweep(cfg); }) == ErrorCode::InvalidArgument);

  cfg.shape = gaussians(1.0);
  cfg.epsilons = {2.0, 3.0, 2.5, 4.0};
  cfg.first_cap = 100.0;
  const auto s = lifespan_sweep(cfg);
  CHECK(s.expected == doctest::Approx(-2.0));
  CHECK(s.monotone);
  REQUIRE(s.points.size() == 4);
  const double t_max = *s.points[3].lifespan;
  CHECK(s.points[3].cap == 100.0);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(s.points[i].lifespan);
    CHECK(s.points[i].epsilon == cfg.epsilons[i]);
    CHECK(s.points[i].cap == doctest::Approx(100.0 * t_max * std::pow(cfg.epsilons[i] / 4.0, -2.0)));
    CHECK(*s.points[i].lifespan > t_max);
  }
  REQUIRE(s.fit);
}

TEST_CASE("convergence study") {
  ConvergenceConfig cfg;
  cfg.params = pair(3, 4);
  cfg.grid = {1, 512, 40.0};
  cfg.data = gaussians(0.5);
  const auto tab = convergence_study(cfg);
  REQUIRE(tab.temporal.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) CHECK(tab.temporal[i].ratio == doctest::Approx(4.0).epsilon(0.25));
  for (const auto& r : tab.temporal) CHECK(r.linear_error <= 1e-11);
  REQUIRE(tab.spatial.size() == 3);
  CHECK(tab.spatial[2].tail < 1e-10);
  CHECK(tab.spatial[1].tail < tab.spatial[0].tail);
  CHECK(tab.observed_order == doctest::Approx(2.0).epsilon(0.1));
  CHECK(tab.pass);

  cfg.N_ladder = {128, 256};
  CHECK(code_of([&] { convergence_study(cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("identical configurations give identical runs") {
  solver::RunConfig rc;
  rc.t_end = 5.0;
  rc.dt = 0.05;
  rc.adaptive = true;
  const auto a = solver::run(pair(2, 2), {1, 256, 40.0}, gaussians(0.8), rc);
  const auto b = solver::run(pair(2, 2), {1, 256, 40.0}, gaussians(0.8), rc);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) {
    CHECK(a.series[i].t == b.series[i].t);
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(a.series[i].comps[l].l2 == b.series[i].comps[l].l2);
      CHECK(a.series[i].comps[l].sup == b.series[i].comps[l].sup);
    }
  }
}
