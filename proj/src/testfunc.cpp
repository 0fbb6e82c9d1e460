#include "sevo/testfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sevo/error.hpp"
#include "sevo/exponents.hpp"
#include "sevo/fit.hpp"

namespace sevo::testfunc {

namespace {

constexpr double kIntegerTolerance = 1e-12;
constexpr double kEdgeLimit = 1e-10;
constexpr double kEtaViolation = 1e6;
constexpr double kApproachGap = 1e-3;
constexpr std::size_t kMinFunctionalNodes = 16;

double squared_radius(const std::array<double, 2>& x, int n) {
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
  return r2;
}

RealField apply_multiplier(const GridSpec& spec, std::span<const double> field, double nu) {
  if (field.size() != spec.size()) throw Error(ErrorCode::InvalidArgument, "field size does not match the grid");
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "fractional order must be positive");
  Grid grid(spec, 1.0);
  Fft fft(spec);
  auto coeffs = fft.forward_real(field);
  const auto mult = grid.power_symbol(nu);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= mult[i];
  return fft.backward_real(coeffs);
}

// Samples <x>^{-q} on the grid, centred at the origin.
RealField bracket_field(const Grid& grid, double q, double scale = 1.0) {
  RealField f(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = grid.position(i);
    x[0] /= scale;
    x[1] /= scale;
    f[i] = bracket_power(squared_radius(x, grid.spec().n), q);
  }
  return f;
}

bool is_power_of_two(std::size_t v) { return v >= 2 && (v & (v - 1)) == 0; }

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double sigma_bar(double sigma) {
  if (!(sigma >= 1.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 1");
  const double nearest = std::round(sigma);
  if (std::abs(sigma - nearest) <= kIntegerTolerance) return 1.0;
  return sigma - std::floor(sigma);
}

double bracket_power(double r2, double q) { return std::pow(1.0 + r2, -0.5 * q); }

double psi(std::span<const double> x, int n, double sbar) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return bracket_power(r2, n + 2.0 * sbar);
}

EtaSample eta(double t, int mu) {
  if (mu < 1) throw Error(ErrorCode::InvalidArgument, "eta smoothness parameter must be >= 1");
  EtaSample e;
  if (t <= 0.5) return e;
  if (t >= 1.0) return {0.0, 0.0, 0.0};
  const double s = 2.0 * t - 1.0;
  const double w = (1.0 - s) * (1.0 + s + s * s);
  const double m = mu;
  e.value = std::pow(w, m);
  e.d1 = 2.0 * (-3.0 * m * s * s * std::pow(w, m - 1.0));
  e.d2 = 4.0 * (-6.0 * m * s * std::pow(w, m - 1.0) + 9.0 * m * (m - 1.0) * std::pow(s, 4) * std::pow(w, m - 2.0));
  return e;
}

double eta_integral(int mu) {
  if (mu < 1) throw Error(ErrorCode::InvalidArgument, "eta smoothness parameter must be >= 1");
  // int_0^1 (1 - s^3)^mu ds = Gamma(1/3) Gamma(mu + 1) / (3 Gamma(mu + 4/3))
  const double m = mu;
  const double layer = std::exp(std::lgamma(1.0 / 3.0) + std::lgamma(m + 1.0) - std::lgamma(m + 4.0 / 3.0)) / 3.0;
  return 0.5 + 0.5 * layer;
}

double phi_R(double t, std::span<const double> x, const TestFunctionParams& tp) {
  if (!(tp.R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  const double horizon = std::pow(tp.R, 2.0 * tp.sigma);
  double r2 = 0.0;
  for (double v : x) r2 += (v / tp.R) * (v / tp.R);
  return eta(t / horizon, tp.mu).value * bracket_power(r2, tp.q());
}

RealField frac_laplacian_grid(const GridSpec& grid, std::span<const double> field, double nu) {
  grid.validate();
  if (field.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "field size does not match the grid");
  double peak = 0.0, edge = 0.0;
  const std::size_t N = grid.N;
  for (std::size_t i = 0; i < field.size(); ++i) {
    peak = std::max(peak, std::abs(field[i]));
    const bool on_edge = grid.n == 1 ? i == 0 : (i / N == 0 || i % N == 0);
    if (on_edge) edge = std::max(edge, std::abs(field[i]));
  }
  if (peak > 0.0 && edge > kEdgeLimit * peak) {
    throw Error(ErrorCode::DataLeakage,
                "field reaches " + std::to_string(edge / peak) + " of its peak at the box boundary");
  }
  return apply_multiplier(grid, field, nu);
}

RealField frac_laplacian_unchecked(const GridSpec& grid, std::span<const double> field, double nu) {
  grid.validate();
  return apply_multiplier(grid, field, nu);
}

double weighted_decay_exponent(double nu, int n) {
  const double m = std::floor(nu + kIntegerTolerance);
  const double s = nu - m;
  if (std::abs(s) <= kIntegerTolerance) return n + 2.0 * m;
  return n + 2.0 * s;
}

double weighted_decay_ratio(double nu, double q, const GridSpec& spec) {
  if (!(q > spec.n)) throw Error(ErrorCode::InvalidArgument, "weighted decay ratio needs q > n");
  Grid grid(spec, 1.0);
  const auto f = bracket_field(grid, q);
  const auto lap = frac_laplacian_unchecked(spec, f, nu);
  const double w = weighted_decay_exponent(nu, spec.n);
  const double inner = spec.L / 4.0;
  double sup = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) {
    const double r2 = squared_radius(grid.position(i), spec.n);
    if (r2 > inner * inner) continue;
    sup = std::max(sup, std::abs(lap[i]) * std::pow(1.0 + r2, 0.5 * w));
  }
  return sup;
}

WeightedDecayResult check_weighted_decay(double nu, double q, const GridSpec& grid) {
  WeightedDecayResult r;
  r.nu = nu;
  r.q = q;
  r.weight_exponent = weighted_decay_exponent(nu, grid.n);
  r.ratio_coarse = weighted_decay_ratio(nu, q, grid);
  GridSpec fine = grid;
  fine.N *= 2;
  r.ratio_fine = weighted_decay_ratio(nu, q, fine);
  r.relative_change = std::abs(r.ratio_fine - r.ratio_coarse) / std::max(r.ratio_fine, 1e-300);
  r.stable = std::isfinite(r.ratio_fine) && r.relative_change < 0.1;
  return r;
}

double scaling_identity_error(double nu, double R, double q, int n, double dx) {
  const double Ri = std::round(R);
  if (!(R >= 1.0) || std::abs(R - Ri) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "scaling check needs an integer R >= 1");
  const auto r = static_cast<std::size_t>(Ri);
  const double L = 64.0 * Ri;
  const double count = 2.0 * L / dx;
  const auto N = static_cast<std::size_t>(std::llround(count));
  if (std::abs(count - static_cast<double>(N)) > 1e-9 || !is_power_of_two(N))
    throw Error(ErrorCode::InvalidArgument, "128 R / dx must be a power of two");
  const GridSpec spec{n, N, L};
  Grid grid(spec, 1.0);
  const auto scaled = frac_laplacian_unchecked(spec, bracket_field(grid, q, Ri), nu);
  const auto base = frac_laplacian_unchecked(spec, bracket_field(grid, q), nu);
  const double factor = std::pow(Ri, -2.0 * nu);
  const double inner = L / 4.0;
  const auto half = static_cast<long>(N / 2);
  const auto ri = static_cast<long>(r);

  // Grid index of the point with signed offset m per dimension.
  auto index = [&](long m0, long m1) {
    const auto j0 = static_cast<std::size_t>(m0 + half);
    if (n == 1) return j0;
    return j0 * N + static_cast<std::size_t>(m1 + half);
  };
  const long reach = static_cast<long>(std::floor(inner / (Ri * dx) + 1e-9));
  double scale = 0.0, worst = 0.0;
  const long m1_reach = n == 2 ? reach : 0;
  for (long m0 = -reach; m0 <= reach; ++m0) {
    for (long m1 = -m1_reach; m1 <= m1_reach; ++m1) {
      const double xr = Ri * dx * std::sqrt(static_cast<double>(m0 * m0 + m1 * m1));
      if (xr > inner + 1e-12) continue;
      const double ref = factor * base[index(m0, m1)];
      const double val = scaled[index(m0 * ri, m1 * ri)];
      scale = std::max(scale, std::abs(ref));
      worst = std::max(worst, std::abs(val - ref));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

ScalingResult check_scaling_identity(double nu, double R, double q, int n, const std::vector<double>& dx_ladder) {
  if (dx_ladder.empty()) throw Error(ErrorCode::InvalidArgument, "dx ladder is empty");
  ScalingResult res;
  res.nu = nu;
  res.R = R;
  res.q = q;
  for (double dx : dx_ladder) {
    const double err = scaling_identity_error(nu, R, q, n, dx);
    res.levels.push_back({dx, static_cast<std::size_t>(std::llround(128.0 * R / dx)), err});
  }
  res.error = res.levels.back().error;
  res.decreasing = true;
  for (std::size_t i = 1; i < res.levels.size(); ++i) {
    // Once at roundoff level the error may stall; that still counts as converged.
    const bool floor = res.levels[i].error <= 1e-12;
    if (!floor && !(res.levels[i].error < res.levels[i - 1].error)) res.decreasing = false;
  }
  return res;
}

EtaCondition eta_condition(double lambda, int mu) {
  if (!(lambda > 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must exceed 1");
  if (mu < 1) throw Error(ErrorCode::InvalidArgument, "eta smoothness parameter must be >= 1");
  EtaCondition c;
  c.lambda = lambda;
  c.mu = mu;
  c.lambda_conj = lambda / (lambda - 1.0);
  c.exponent = mu - 2.0 * c.lambda_conj;
  const double lc = c.lambda_conj;
  const double m = mu;

  std::vector<double> gaps;  // 1 - t
  for (int i = 1; i < 2000; ++i) gaps.push_back(0.5 * (1.0 - i / 2000.0));
  for (int i = 0; i <= 400; ++i) gaps.push_back(0.5 * std::pow(2e-8, i / 400.0));
  c.closest = *std::min_element(gaps.begin(), gaps.end());

  double sup = 0.0, tail = 0.0;
  for (double g : gaps) {
    const double s = 1.0 - 2.0 * g;
    const double lw = std::log(2.0 * g) + std::log1p(s + s * s);  // log(1 - s^3)
    const double log_eta = m * lw;
    const double log_d1 = std::log(6.0 * m * s * s) + (m - 1.0) * lw;
    const double bracket = 9.0 * m * (m - 1.0) * std::pow(s, 4) - 6.0 * m * s * std::exp(lw);
    const double log_d2 = std::log(4.0) + (m - 2.0) * lw + std::log(std::abs(bracket));
    const double log_q = -(lc - 1.0) * log_eta + log_sum_exp(lc * log_d1, lc * log_d2);
    sup = std::max(sup, std::exp(log_q));
    if (g <= kApproachGap) tail = std::max(tail, std::exp(log_q));
  }
  c.sup = sup;
  c.approach_sup = tail;
  c.violated = !(tail <= kEtaViolation);
  return c;
}

EtaCondition verify_eta_condition(double lambda, int mu) {
  auto c = eta_condition(lambda, mu);
  if (c.violated) {
    throw Error(ErrorCode::ConditionViolated,
                "eta condition grows like (1 - t)^" + std::to_string(c.exponent) +
                    " near t = 1 (reaches " + std::to_string(c.approach_sup) + "); raise mu to at least " +
                    std::to_string(2.0 * c.lambda_conj));
  }
  return c;
}

std::vector<double> functional_schedule(const std::vector<double>& R_values, double sigma, int log_nodes,
                                        int dense) {
  if (log_nodes < 2 || dense < 2) throw Error(ErrorCode::InvalidArgument, "schedule needs >= 2 nodes per part");
  std::vector<double> t{0.0};
  for (double R : R_values) {
    if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");
    const double T = std::pow(R, 2.0 * sigma);
    const double half = 0.5 * T;
    const double l0 = std::log(half * 1e-3), l1 = std::log(half);
    for (int i = 0; i < log_nodes; ++i) t.push_back(std::exp(l0 + (l1 - l0) * i / (log_nodes - 1.0)));
    for (int i = 0; i < dense; ++i) t.push_back(half + half * i / (dense - 1.0));
  }
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t)
    if (out.empty() || v - out.back() > 1e-12 * std::max(1.0, v)) out.push_back(v);
  return out;
}

double functional_F_R(const std::vector<solver::Snapshot>& snapshots, const GridSpec& spec,
                      std::size_t component, double p, const TestFunctionParams& tp) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponent must be positive");
  if (!(tp.R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  const double T = std::pow(tp.R, 2.0 * tp.sigma);
  Grid grid(spec, 1.0);
  std::vector<double> weight(grid.size());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    auto x = grid.position(i);
    x[0] /= tp.R;
    x[1] /= tp.R;
    weight[i] = bracket_power(squared_radius(x, spec.n), tp.q());
  }
  const double cell = spec.cell_volume();

  std::vector<double> ts, gs;
  for (const auto& snap : snapshots) {
    if (snap.t > T * (1.0 + 1e-12)) continue;
    if (!ts.empty() && snap.t <= ts.back()) throw Error(ErrorCode::InvalidArgument, "snapshots must be sorted in time");
    if (component >= snap.u.size()) throw Error(ErrorCode::InvalidArgument, "snapshot lacks the component");
    const auto& u = snap.u[component];
    if (u.size() != weight.size()) throw Error(ErrorCode::InvalidArgument, "snapshot size does not match the grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = std::abs(u[i]);
      if (m > 0.0) acc += std::pow(m, p) * weight[i];
    }
    ts.push_back(snap.t);
    gs.push_back(eta(snap.t / T, tp.mu).value * acc * cell);
  }
  if (ts.size() < kMinFunctionalNodes) {
    throw Error(ErrorCode::InsufficientSnapshots,
                std::to_string(ts.size()) + " snapshots inside [0, R^{2 sigma}], need " +
                    std::to_string(kMinFunctionalNodes));
  }
  if (ts.back() < T * (1.0 - 1e-12)) {
    ts.push_back(T);
    gs.push_back(0.0);
  }
  double total = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i) total += 0.5 * (gs[i] + gs[i - 1]) * (ts[i] - ts[i - 1]);
  return total;
}

FunctionalScaling functional_scaling(const std::vector<solver::Snapshot>& snapshots, const GridSpec& grid,
                                     std::size_t component, double p, const std::vector<double>& R_values,
                                     double sigma, int mu) {
  if (!(p > 1.0)) throw Error(ErrorCode::InvalidArgument, "exponent must exceed 1");
  FunctionalScaling out;
  TestFunctionParams tp;
  tp.n = grid.n;
  tp.sigma = sigma;
  tp.mu = mu;
  for (double R : R_values) {
    tp.R = R;
    out.R.push_back(R);
    out.F.push_back(functional_F_R(snapshots, grid, component, p, tp));
  }
  const auto fit = fit_log_log(out.R, out.F);
  out.slope = fit.slope;
  out.r_squared = fit.r_squared;
  const double p_conj = p / (p - 1.0);
  out.reference = -2.0 * sigma + (grid.n + 2.0 * sigma) / p_conj;
  return out;
}

GnScaling gn_scaling_check(double q, double s, int n, const std::vector<double>& dilations, const GridSpec& spec) {
  if (spec.n != n) throw Error(ErrorCode::InvalidArgument, "grid dimension must match n");
  GnScaling out;
  out.theta = exponents::gn_theta(q, 2.0, 2.0, 0.0, s, n).theta;
  Grid grid(spec, s);
  Fft fft(spec);
  const double cell = spec.cell_volume();
  const double box = spec.box_volume();
  const auto sym = grid.symbol();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double lam : dilations) {
    if (!(lam > 0.0)) throw Error(ErrorCode::InvalidArgument, "dilations must be positive");
    RealField u(grid.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-lam * lam * squared_radius(grid.position(i), n));
    frac_laplacian_grid(spec, u, 1.0);  // leakage guard only
    const auto c = fft.forward_real(u);
    double l2 = 0.0, hs = 0.0, lq = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      l2 += std::norm(c[i]);
      hs += sym[i] * std::norm(c[i]);
    }
    for (double v : u) lq += std::pow(std::abs(v), q);
    GnScalingRow row;
    row.dilation = lam;
    row.lhs = std::pow(lq * cell, 1.0 / q);
    row.rhs = std::pow(std::sqrt(box * l2), 1.0 - out.theta) * std::pow(std::sqrt(box * hs), out.theta);
    row.ratio = row.lhs / row.rhs;
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    out.rows.push_back(row);
  }
  out.spread = out.rows.empty() ? 0.0 : hi / lo - 1.0;
  return out;
}

}  // namespace sevo::testfunc
