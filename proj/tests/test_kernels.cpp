#include <cmath>

#include "doctest.h"
#include "sevo/kernels.hpp"

using namespace sevo::kernels;

namespace {

// Oracles straight from the two roots, evaluated in long double.
long double k1_ref(long double t, long double a) {
  if (a == 1.0L) return t * std::exp(-t);
  return (std::exp(-a * t) - std::exp(-t)) / (1.0L - a);
}
long double k0_ref(long double t, long double a) {
  if (a == 1.0L) return (1.0L + t) * std::exp(-t);
  return (std::exp(-a * t) - a * std::exp(-t)) / (1.0L - a);
}
// int_0^t k1 and int_0^t (t - s) k1(s) ds in closed form, long double. The
// difference quotient loses |log10(1 - a)| digits of the 19 available.
long double expint(long double t, long double c, bool weighted) {
  if (c == 0.0L) return weighted ? t * t / 2.0L : t;
  const long double e = -std::expm1(-c * t);
  return weighted ? t / c - e / (c * c) : e / c;
}
long double quad(long double t, long double a, bool weighted) {
  if (a == 1.0L) {
    const long double e = std::exp(-t);
    const long double m1 = 1.0L - (1.0L + t) * e;
    const long double m2 = 2.0L - (t * t + 2.0L * t + 2.0L) * e;
    return weighted ? t * m1 - m2 : m1;
  }
  return (expint(t, a, weighted) - expint(t, 1.0L, weighted)) / (1.0L - a);
}

}  // namespace

TEST_CASE("initial values") {
  for (double a : {0.0, 0.3, 1.0, 1.00005, 7.0, 1e4}) {
    const auto s = propagator(0.0, a);
    CHECK(s.k0 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(s.k1) <= 1e-15);
    CHECK(s.dk1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(s.i1) <= 1e-15);
  }
}

TEST_CASE("mass mode and double root closed forms") {
  for (double t : {0.1, 1.0, 3.0, 20.0}) {
    auto s = propagator(t, 0.0);
    CHECK(s.k0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.k1 == doctest::Approx(-std::expm1(-t)).epsilon(1e-14));
    s = propagator(t, 1.0);
    CHECK(s.k1 == doctest::Approx(t * std::exp(-t)).epsilon(1e-14));
    CHECK(s.k0 == doctest::Approx((1 + t) * std::exp(-t)).epsilon(1e-14));
  }
}

TEST_CASE("propagator matches the root formulas and quadrature") {
  for (double a : {0.0, 0.01, 0.5, 0.99, 0.99995, 1.0, 1.00003, 1.5, 10.0, 100.0}) {
    for (double t : {0.05, 0.5, 2.0, 10.0}) {
      const auto s = propagator(t, a);
      const double scale = 1.0;
      CHECK(std::abs(s.k1 - static_cast<double>(k1_ref(t, a))) <= 1e-12 * scale);
      CHECK(std::abs(s.k0 - static_cast<double>(k0_ref(t, a))) <= 1e-12 * scale);
      CHECK(std::abs(s.i1 - static_cast<double>(quad(t, a, false))) <= 1e-10);
      CHECK(std::abs(s.i2 - static_cast<double>(quad(t, a, true))) <= 1e-10);
    }
  }
}

TEST_CASE("derivative identities") {
  for (double a : {0.2, 3.0, 50.0}) {
    for (double t : {0.3, 2.0, 9.0}) {
      const auto s = propagator(t, a);
      CHECK(s.dk0 == doctest::Approx(-a * s.k1).epsilon(1e-13));
      const double dk1 = static_cast<double>((a * std::exp(-a * (long double)t) - std::exp(-(long double)t)) / (a - 1.0L));
      CHECK(std::abs(s.dk1 - dk1) <= 1e-12);
    }
  }
}

TEST_CASE("ODE residual") {
  CHECK(ode_residual(1.0, 0.5, 1e-4) <= 1e-6);
  CHECK(ode_residual(2.0, 1.0, 1e-4) <= 1e-6);
  CHECK(ode_residual(0.0, 0.5, 1e-4) <= 1e-4);
  for (double a : {0.0, 0.25, 1.0, 1.00001, 3.0, 30.0, 100.0})
    for (double t : {0.0, 0.01, 1.0, 10.0, 50.0}) CHECK(ode_residual(t, a, 1e-4) <= 1e-6);
}

TEST_CASE("branch continuity across the seam") {
  for (double t = 0.0; t <= 50.0; t += 0.5) {
    const auto c = propagator(t, 1.0);
    for (double a : {1.0 - 1e-6, 1.0 + 1e-6}) {
      const auto s = propagator(t, a);
      CHECK(std::abs(s.k1 - c.k1) <= 1e-6);
      CHECK(std::abs(s.k0 - c.k0) <= 1e-6);
      // i1 itself moves by |a - 1| / a^2 at large t, so it is held to its exact value.
      CHECK(std::abs(s.i1 - static_cast<double>(quad(t, a, false))) <= 1e-10);
    }
    // Both sides of the seam boundary agree far more tightly.
    const double edge = 1.0 + kSeamWidth;
    const auto in = propagator(t, std::nextafter(edge, 0.0));
    const auto out = propagator(t, edge);
    CHECK(std::abs(in.k1 - out.k1) <= 1e-12);
    CHECK(std::abs(in.i1 - out.i1) <= 1e-11);
    CHECK(std::abs(in.i2 - out.i2) <= 1e-10);
  }
}

TEST_CASE("semigroup composition of the modal system") {
  for (double a : {0.0, 0.4, 1.0, 2.5, 40.0}) {
    const double t = 0.7, s = 1.9;
    const auto pt = propagator(t, a), ps = propagator(s, a), pts = propagator(t + s, a);
    // M(t) = [[k0, k1], [dk0, dk1]]
    const double m00 = ps.k0 * pt.k0 + ps.k1 * pt.dk0;
    const double m01 = ps.k0 * pt.k1 + ps.k1 * pt.dk1;
    const double m10 = ps.dk0 * pt.k0 + ps.dk1 * pt.dk0;
    const double m11 = ps.dk0 * pt.k1 + ps.dk1 * pt.dk1;
    CHECK(std::abs(m00 - pts.k0) <= 1e-10);
    CHECK(std::abs(m01 - pts.k1) <= 1e-10);
    CHECK(std::abs(m10 - pts.dk0) <= 1e-10);
    CHECK(std::abs(m11 - pts.dk1) <= 1e-10);
  }
}

TEST_CASE("positivity and decay") {
  for (double a : {0.0, 0.1, 1.0, 5.0, 1e3})
    for (double t : {0.0, 0.1, 1.0, 10.0, 1e3, 1e7}) {
      const auto s = propagator(t, a);
      CHECK(s.k1 >= 0.0);
      CHECK(std::isfinite(s.k0));
      CHECK(std::isfinite(s.i2));
    }
  CHECK(propagator(1e4, 2.0).k1 == 0.0);
  CHECK(propagator(1e4, 2.0).k0 == 0.0);
}

TEST_CASE("decay profiles") {
  const auto ts = log_grid(10.0, 1000.0, 25);
  auto p = decay_profile(2.0, Regime::L2L2, 1, 1.0, ts);
  CHECK(std::abs(p.slope + 1.0) <= 0.05);
  p = decay_profile(1.0, Regime::L2L2, 1, 1.0, ts);
  CHECK(std::abs(p.slope + 0.5) <= 0.05);
  p = decay_profile(0.0, Regime::L2L2, 1, 1.0, ts);
  CHECK(std::abs(p.slope) <= 0.05);
  p = decay_profile(0.0, Regime::L1L2, 1, 1.0, ts);
  CHECK(std::abs(p.slope + 0.25) <= 0.05);
  p = decay_profile(0.0, Regime::L1L2, 2, 1.0, ts);
  CHECK(std::abs(p.slope + 0.5) <= 0.05);
}

TEST_CASE("log grid endpoints") {
  const auto g = log_grid(10.0, 1000.0, 3);
  CHECK(g[0] == 10.0);
  CHECK(g[1] == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(g[2] == 1000.0);
}
