#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sevo/error.hpp"
#include "sevo/testfunc.hpp"

using namespace sevo;
using namespace sevo::testfunc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Cancelled;
}

// -(d/dx)^2 (1 + x^2)^{-q/2}
double minus_second_derivative(double x, double q) {
  const double b = 1.0 + x * x;
  return q * std::pow(b, -q / 2 - 1) - q * (q + 2) * x * x * std::pow(b, -q / 2 - 2);
}

std::vector<solver::Snapshot> constant_snapshots(const GridSpec& g, const std::vector<double>& times, double c) {
  std::vector<solver::Snapshot> out;
  for (double t : times) out.push_back({t, {RealField(g.size(), c), RealField(g.size(), c)}});
  return out;
}

}  // namespace

TEST_CASE("sigma bar") {
  CHECK(sigma_bar(2.0) == 1.0);
  CHECK(sigma_bar(1.0) == 1.0);
  CHECK(sigma_bar(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigma_bar(1.0 + 1e-13) == 1.0);
  CHECK(sigma_bar(2.25) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(code_of([] { sigma_bar(0.5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("psi and eta values") {
  const double origin[1] = {0.0};
  const double one[1] = {1.0};
  CHECK(psi(origin, 1, 1.0) == 1.0);
  CHECK(psi(one, 1, 1.0) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
  CHECK(eta(0.3).value == 1.0);
  CHECK(eta(1.2).value == 0.0);
  CHECK(eta(0.0).d1 == 0.0);
  CHECK(eta(0.7).value > 0.0);
  CHECK(eta(0.7).value < 1.0);
}

TEST_CASE("eta is C2 at one half and monotone") {
  const auto right = eta(0.5 + 1e-12);
  CHECK(std::abs(right.value - 1.0) <= 1e-8);
  CHECK(std::abs(right.d1) <= 1e-8);
  CHECK(std::abs(right.d2) <= 1e-8);
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.5 + 0.5 * i / 1000.0;
    const double v = eta(t).value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("eta derivatives agree with finite differences") {
  for (int mu : {2, 16}) {
    for (double t : {0.55, 0.6, 0.75, 0.9, 0.97}) {
      const double h = 1e-5;
      const double fd1 = (eta(t + h, mu).value - eta(t - h, mu).value) / (2 * h);
      const double fd2 = (eta(t + h, mu).d1 - eta(t - h, mu).d1) / (2 * h);
      CHECK(eta(t, mu).d1 == doctest::Approx(fd1).epsilon(1e-6));
      CHECK(eta(t, mu).d2 == doctest::Approx(fd2).epsilon(1e-6));
    }
  }
}

TEST_CASE("eta integral") {
  for (int mu : {1, 2, 16}) {
    const int m = 20000;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * eta(static_cast<double>(i) / m, mu).value;
    }
    CHECK(eta_integral(mu) == doctest::Approx(acc / (3.0 * m)).epsilon(1e-9));
  }
  CHECK(eta_integral(1) == doctest::Approx(0.5 + 0.5 * 0.75).epsilon(1e-14));
}

TEST_CASE("phi_R factorises") {
  TestFunctionParams tp;
  tp.R = 2.0;
  const double x[1] = {3.0};
  const double x_over_r[1] = {1.5};
  CHECK(phi_R(0.1, x, tp) == doctest::Approx(psi(x_over_r, 1, 1.0)).epsilon(1e-15));
  CHECK(phi_R(3.0, x, tp) == doctest::Approx(eta(0.75).value * psi(x_over_r, 1, 1.0)).epsilon(1e-14));
  CHECK(phi_R(4.0, x, tp) == 0.0);
}

TEST_CASE("fractional Laplacian on the grid") {
  const GridSpec g{1, 256, 20.0};
  Grid grid(g, 1.0);
  CHECK(code_of([&] { frac_laplacian_grid(g, RealField(g.size(), 2.0), 1.0); }) == ErrorCode::DataLeakage);
  for (double v : frac_laplacian_unchecked(g, RealField(g.size(), 2.0), 0.7)) CHECK(std::abs(v) <= 1e-14);

  RealField mode(g.size());
  const double xi = 5.0 * std::numbers::pi / g.L;
  for (std::size_t i = 0; i < mode.size(); ++i) mode[i] = std::cos(xi * grid.position(i)[0]);
  const auto lm = frac_laplacian_unchecked(g, mode, 0.75);
  for (std::size_t i = 0; i < mode.size(); ++i) CHECK(std::abs(lm[i] - std::pow(xi, 1.5) * mode[i]) <= 1e-12);

  RealField gauss(g.size());
  for (std::size_t i = 0; i < gauss.size(); ++i) {
    const double x = grid.position(i)[0];
    gauss[i] = std::exp(-x * x);
  }
  const auto lg = frac_laplacian_grid(g, gauss, 1.0);
  for (std::size_t i = 0; i < gauss.size(); ++i) {
    const double x = grid.position(i)[0];
    CHECK(std::abs(lg[i] - (2.0 - 4.0 * x * x) * std::exp(-x * x)) <= 1e-8);
  }
}

TEST_CASE("fractional Laplacian of the slowly decaying bracket matches the classical one") {
  const GridSpec g{1, 1024, 64.0};
  Grid grid(g, 1.0);
  RealField f(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = bracket_power(std::pow(grid.position(i)[0], 2), 3.0);
  const auto lap = frac_laplacian_unchecked(g, f, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = grid.position(i)[0];
    if (std::abs(x) > 16.0) continue;
    CHECK(std::abs(lap[i] - minus_second_derivative(x, 3.0)) <= 1e-7);
  }
}

TEST_CASE("weight exponents of the fractional Laplacian bound") {
  CHECK(weighted_decay_exponent(1.0, 1) == 3.0);
  CHECK(weighted_decay_exponent(2.0, 2) == 6.0);
  CHECK(weighted_decay_exponent(1.5, 1) == doctest::Approx(2.0));
  CHECK(weighted_decay_exponent(0.5, 1) == doctest::Approx(2.0));
}

TEST_CASE("weighted decay ratios are finite and grid-stable") {
  const GridSpec g{1, 1024, 64.0};
  for (auto [nu, q] : {std::pair{1.0, 3.0}, std::pair{0.5, 2.0}, std::pair{1.5, 2.0}}) {
    const auto r = check_weighted_decay(nu, q, g);
    CHECK(std::isfinite(r.ratio_coarse));
    CHECK(r.ratio_fine > 0.0);
    CHECK(r.stable);
  }
}

TEST_CASE("scaling identity of the fractional Laplacian") {
  CHECK(scaling_identity_error(1.0, 1.0, 3.0, 1, 0.25) == 0.0);
  auto r = check_scaling_identity(1.0, 2.0);
  CHECK(r.error < 1e-3);
  CHECK(r.decreasing);
  r = check_scaling_identity(0.5, 4.0);
  CHECK(r.error < 1e-3);
  CHECK(r.decreasing);
  CHECK(code_of([] { scaling_identity_error(1.0, 2.5, 3.0, 1, 0.25); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scaling identity in two dimensions") {
  CHECK(scaling_identity_error(1.0, 2.0, 4.0, 2, 0.25) < 1e-3);
}

TEST_CASE("eta condition") {
  const auto ok = eta_condition(2.0, 16);
  CHECK(ok.lambda_conj == doctest::Approx(2.0));
  CHECK(ok.exponent == doctest::Approx(12.0));
  CHECK_FALSE(ok.violated);
  CHECK(std::isfinite(ok.sup));
  CHECK(ok.closest <= 1e-8 * 1.0000001);

  const auto bad = eta_condition(2.0, 2);
  CHECK(bad.violated);
  CHECK(bad.exponent == doctest::Approx(-2.0));
  CHECK(code_of([] { verify_eta_condition(2.0, 2); }) == ErrorCode::ConditionViolated);

  // lambda' = 3 (lambda = 1.5): bounded once mu > 6.
  CHECK_FALSE(eta_condition(1.5, 8).violated);
  CHECK(eta_condition(1.5, 4).violated);

  // On [0, 1/2] the quantity vanishes identically.
  for (double t : {0.0, 0.2, 0.5}) {
    CHECK(eta(t).d1 == 0.0);
    CHECK(eta(t).d2 == 0.0);
  }
}

TEST_CASE("functional F_R") {
  const GridSpec g{1, 256, 40.0};
  TestFunctionParams tp;
  tp.R = 2.0;
  const auto times = functional_schedule({2.0}, 1.0, 24, 400);

  CHECK(functional_F_R(constant_snapshots(g, times, 0.0), g, 0, 2.0, tp) == 0.0);

  // Constant field: c^p R^{2 sigma} int eta * sum psi_R.
  Grid grid(g, 1.0);
  double psi_sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = grid.position(i)[0] / tp.R;
    psi_sum += std::pow(1.0 + x * x, -1.5) * g.cell_volume();
  }
  const double c = 0.3;
  const double expect = std::pow(c, 2.5) * 4.0 * eta_integral(16) * psi_sum;
  const double got = functional_F_R(constant_snapshots(g, times, c), g, 1, 2.5, tp);
  CHECK(got == doctest::Approx(expect).epsilon(1e-4));

  // Homogeneity of degree p and monotonicity in |u|.
  const double doubled = functional_F_R(constant_snapshots(g, times, 2 * c), g, 1, 2.5, tp);
  CHECK(doubled == doctest::Approx(std::pow(2.0, 2.5) * got).epsilon(1e-12));
  CHECK(functional_F_R(constant_snapshots(g, times, -1.5 * c), g, 1, 2.5, tp) > got);

  std::vector<double> few(times.begin(), times.begin() + 10);
  CHECK(code_of([&] { functional_F_R(constant_snapshots(g, few, c), g, 0, 2.0, tp); }) ==
        ErrorCode::InsufficientSnapshots);
}

TEST_CASE("F_R from solver snapshots of the mass mode") {
  const GridSpec g{1, 128, 40.0};
  solver::SolverOptions opt;
  opt.nonlinear = false;
  solver::Solver s({1, 1.0, {2, 2}}, g, opt);
  std::vector<Spectrum> u(2, Spectrum(g.size())), v(2, Spectrum(g.size()));
  u[0][0] = 0.5;
  u[1][0] = 0.5;
  auto st = s.make_state(u, v);
  solver::RunConfig cfg;
  cfg.t_end = 4.0;
  cfg.dt = 0.1;
  cfg.snapshot_times = functional_schedule({2.0}, 1.0, 24, 200);
  const auto res = solver::run_from(s, st, cfg);
  TestFunctionParams tp;
  tp.R = 2.0;
  const double got = functional_F_R(res.snapshots, g, 0, 2.0, tp);
  const auto direct = functional_F_R(constant_snapshots(g, cfg.snapshot_times, 0.5), g, 0, 2.0, tp);
  CHECK(got == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("functional scaling reference exponent") {
  const GridSpec g{1, 128, 40.0};
  const auto times = functional_schedule({1.0, 2.0, 4.0}, 1.0);
  const auto sc = functional_scaling(constant_snapshots(g, times, 1.0), g, 0, 2.0, {1.0, 2.0, 4.0}, 1.0);
  CHECK(sc.reference == doctest::Approx(-2.0 + 3.0 / 2.0));
  // A constant field gives F_R ~ R^{2 sigma} * R^n until psi_R feels the box.
  CHECK(sc.slope > 2.0);
}

TEST_CASE("GN scaling on Gaussian dilations") {
  const GridSpec g{1, 4096, 40.0};
  for (double p : {2.0, 3.0, 4.0}) {
    for (double q : {p, 2.0 * p}) {
      const auto r = gn_scaling_check(q, 1.0, 1, {0.5, 1.0, 2.0, 4.0}, g);
      CHECK(r.theta == doctest::Approx(0.5 - 1.0 / q).epsilon(1e-14));
      CHECK(r.spread < 0.01);
    }
  }
}
