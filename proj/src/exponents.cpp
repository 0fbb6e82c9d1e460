#include "sevo/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sevo/error.hpp"

namespace sevo::exponents {

namespace {

// In-place LU with partial pivoting on a row-major k x k matrix, then solve.
std::vector<double> lu_solve(std::vector<double> m, std::vector<double> rhs, std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(m[r * k + col]) > std::abs(m[pivot * k + col])) pivot = r;
    }
    if (m[pivot * k + col] == 0.0) {
      throw Error(ErrorCode::SingularSystem, "P - I is singular");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(m[col * k + c], m[pivot * k + c]);
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = m[r * k + col] / m[col * k + col];
      m[r * k + col] = f;
      for (std::size_t c = col + 1; c < k; ++c) m[r * k + c] -= f * m[col * k + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(k);
  for (std::size_t i = k; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < k; ++c) s -= m[i * k + c] * x[c];
    x[i] = s / m[i * k + i];
  }
  return x;
}

// Row l of P - I: -1 on the diagonal, p_l in column l-1 (column k-1 for l = 0).
std::vector<double> p_minus_identity(const SystemParams& params) {
  const std::size_t k = params.k();
  std::vector<double> m(k * k, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    m[l * k + l] = -1.0;
    m[l * k + (l + k - 1) % k] += params.p[l];
  }
  return m;
}

std::vector<double> multiply(const std::vector<double>& m, const std::vector<double>& x) {
  const std::size_t k = x.size();
  std::vector<double> y(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) y[i] += m[i * k + j] * x[j];
  return y;
}

double relative_residual(const std::vector<double>& m, const std::vector<double>& x) {
  const auto y = multiply(m, x);
  double res = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    res = std::max(res, std::abs(y[i] - 1.0));
    scale = std::max(scale, std::abs(x[i]));
  }
  // Row norms of P - I are 1 + p_l; normalise by them so the bound is scale free.
  double row = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += std::abs(m[i * x.size() + j]);
    row = std::max(row, s);
  }
  return res / std::max(1.0, row * scale);
}

// Sum 1 + p_l + p_{l-1} p_l + ... + p_2 ... p_l over 0-based `last`.
double tail_product_sum(const std::vector<double>& p, std::size_t last) {
  double sum = 1.0;
  double prod = 1.0;
  for (std::size_t j = last; j >= 1; --j) {
    prod *= p[j];
    sum += prod;
  }
  return sum;
}

double product(const std::vector<double>& p, std::size_t first, std::size_t last) {
  double prod = 1.0;
  for (std::size_t j = first; j <= last; ++j) prod *= p[j];
  return prod;
}

}  // namespace

void SystemParams::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "space dimension n must be >= 1");
  if (!std::isfinite(sigma) || sigma < 1.0)
    throw Error(ErrorCode::InvalidArgument, "sigma must be a finite number >= 1");
  if (p.size() < 2) throw Error(ErrorCode::InvalidArgument, "need k >= 2 exponents");
  for (std::size_t l = 0; l < p.size(); ++l) {
    if (!std::isfinite(p[l])) throw Error(ErrorCode::InvalidArgument, "exponents must be finite");
    if (p[l] <= 1.0) {
      std::ostringstream os;
      os << "p_" << l + 1 << " = " << p[l] << " <= 1; P - I degenerates when p_1...p_k = 1";
      throw Error(ErrorCode::SingularSystem, os.str());
    }
  }
}

const char* classification_name(Classification c) noexcept {
  switch (c) {
    case Classification::Supercritical: return "Supercritical";
    case Classification::Critical: return "Critical";
    case Classification::Subcritical: return "Subcritical";
  }
  return "?";
}

GammaVector compute_gamma(const SystemParams& params) {
  params.validate();
  const std::size_t k = params.k();
  const auto m = p_minus_identity(params);
  GammaVector out;
  out.gamma = lu_solve(m, std::vector<double>(k, 1.0), k);
  out.residual = relative_residual(m, out.gamma);
  if (out.residual > 1e-12) {
    // one step of iterative refinement
    const auto y = multiply(m, out.gamma);
    std::vector<double> r(k);
    for (std::size_t i = 0; i < k; ++i) r[i] = 1.0 - y[i];
    const auto d = lu_solve(m, r, k);
    for (std::size_t i = 0; i < k; ++i) out.gamma[i] += d[i];
    out.residual = relative_residual(m, out.gamma);
  }
  double best = out.gamma[0];
  for (std::size_t l = 1; l < k; ++l) {
    const double tie = 1e-12 * std::max(1.0, std::abs(best));
    if (out.gamma[l] > best + tie) {
      best = out.gamma[l];
      out.argmax = l;
    }
  }
  return out;
}

double gamma_max_closed_form(const SystemParams& params) {
  params.validate();
  const std::size_t k = params.k();
  return tail_product_sum(params.p, k - 1) / (product(params.p, 0, k - 1) - 1.0);
}

Relabeling relabel_argmax_last(const SystemParams& params, std::size_t argmax) {
  const std::size_t k = params.k();
  Relabeling r;
  r.shift = (argmax + 1) % k;
  r.params = params;
  r.old_index.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    r.old_index[j] = (j + r.shift) % k;
    r.params.p[j] = params.p[r.old_index[j]];
  }
  return r;
}

Classification classify(const SystemParams& params, double tolerance) {
  const double gmax = compute_gamma(params).max();
  const double diff = gmax - params.critical_ratio();
  if (std::abs(diff) <= tolerance) return Classification::Critical;
  return diff < 0 ? Classification::Supercritical : Classification::Subcritical;
}

std::vector<std::string> ConditionFlags::failed_global() const {
  std::vector<std::string> out;
  if (!p1_bound) out.emplace_back("p1_bound");
  if (!intermediate_bound) out.emplace_back("intermediate_bound");
  if (!low_dimension) out.emplace_back("low_dimension");
  if (!p_at_least_two) out.emplace_back("p_at_least_two");
  if (!supercritical) out.emplace_back("supercritical");
  return out;
}

ConditionFlags check_global_conditions(const SystemParams& params) {
  const auto g = compute_gamma(params);
  const auto rel = relabel_argmax_last(params, g.argmax);
  const auto& p = rel.params.p;
  const std::size_t k = p.size();
  const double r = params.critical_ratio();
  const double inv_r = 2.0 * params.sigma / params.n;

  ConditionFlags f;
  f.p1_bound = p[0] <= 1.0 + inv_r;
  f.intermediate_bound = true;
  for (std::size_t l = 1; l + 1 < k; ++l) {
    const double lhs = (product(p, 0, l) - 1.0) / tail_product_sum(p, l);
    if (!(lhs <= inv_r)) f.intermediate_bound = false;
  }
  f.low_dimension = params.n <= 2.0 * params.sigma;
  f.p_at_least_two = std::all_of(p.begin(), p.end(), [](double v) { return v >= 2.0; });
  f.supercritical = g.max() < r;
  f.subcritical = g.max() > r;
  if (f.low_dimension) {
    f.lower_lifespan = f.p_at_least_two;
  } else if (params.n <= 4.0 * params.sigma) {
    const double cap = params.n / (params.n - 2.0 * params.sigma);
    f.lower_lifespan =
        std::all_of(p.begin(), p.end(), [cap](double v) { return v >= 2.0 && v <= cap; });
  }
  return f;
}

LossOfDecay loss_of_decay_sequence(const SystemParams& params, double eps) {
  params.validate();
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw Error(ErrorCode::InvalidArgument, "eps must be a positive finite number");
  const auto& p = params.p;
  const std::size_t k = params.k();
  const double r = params.critical_ratio();

  LossOfDecay out;
  out.recursive.assign(k, 0.0);
  out.expanded.assign(k, 0.0);
  out.recursive[0] = 1.0 - r * (p[0] - 1.0) + eps;
  for (std::size_t l = 1; l + 1 < k; ++l)
    out.recursive[l] = 1.0 - r * (p[l] - 1.0) + p[l] * out.recursive[l - 1];
  for (std::size_t l = 0; l + 1 < k; ++l) {
    const double tail = l == 0 ? 1.0 : product(p, 1, l);
    out.expanded[l] = tail_product_sum(p, l) - r * (product(p, 0, l) - 1.0) + tail * eps;
  }
  for (std::size_t l = 0; l < k; ++l) {
    const double scale = std::max(1.0, std::abs(out.recursive[l]));
    out.max_discrepancy =
        std::max(out.max_discrepancy, std::abs(out.recursive[l] - out.expanded[l]) / scale);
  }
  if (out.max_discrepancy > 1e-12) {
    throw Error(ErrorCode::DomainError, "recursive and expanded loss-of-decay values disagree");
  }
  return out;
}

AlphaBeta alpha_beta_sequences(const SystemParams& params) {
  const auto g = compute_gamma(params);
  const double gk = g.max();
  const double r = params.critical_ratio();
  const auto& p = params.p;
  const std::size_t k = params.k();

  AlphaBeta out;
  out.alpha.resize(k - 1);
  out.alpha[0] = 1.0 - (p[0] - 1.0) * gk;
  for (std::size_t l = 1; l + 1 < k; ++l)
    out.alpha[l] = 1.0 - (p[l] - 1.0) * gk + p[l] * out.alpha[l - 1];
  out.beta.resize(k);
  out.beta[0] = 1.0 - r * (p[0] - 1.0) - out.alpha[0];
  for (std::size_t l = 1; l < k; ++l) out.beta[l] = -r * (p[l] - 1.0) + (p[l] - 1.0) * gk;
  for (std::size_t l = 0; l < k; ++l) {
    out.identity_error =
        std::max(out.identity_error, std::abs(out.beta[l] - (p[l] - 1.0) * (gk - r)));
  }
  return out;
}

DecayPrediction predicted_decay(const SystemParams& params, double eps) {
  const auto flags = check_global_conditions(params);
  if (!flags.global_existence()) {
    std::string names;
    for (const auto& s : flags.failed_global()) names += (names.empty() ? "" : ", ") + s;
    throw Error(ErrorCode::ConditionsUnmet, "global existence hypotheses fail: " + names);
  }
  const auto g = compute_gamma(params);
  const auto rel = relabel_argmax_last(params, g.argmax);
  const auto seq = loss_of_decay_sequence(rel.params, eps);
  const double base = -params.n / (4.0 * params.sigma);
  DecayPrediction out;
  out.l2.resize(params.k());
  out.hsigma.resize(params.k());
  for (std::size_t j = 0; j < params.k(); ++j) {
    const std::size_t orig = rel.old_index[j];
    out.l2[orig] = base + seq.recursive[j];
    out.hsigma[orig] = base - 0.5 + seq.recursive[j];
  }
  return out;
}

double lifespan_exponent(const SystemParams& params, double tolerance) {
  if (classify(params, tolerance) != Classification::Subcritical)
    throw Error(ErrorCode::NotSubcritical, "lifespan exponent needs max gamma > n/(2 sigma)");
  return -1.0 / (compute_gamma(params).max() - params.critical_ratio());
}

GnTheta gn_theta(double q, double q1, double q2, double a, double s, int n) {
  const auto open = [](double v) { return std::isfinite(v) && v > 1.0; };
  if (!open(q) || !open(q1) || !open(q2))
    throw Error(ErrorCode::DomainError, "need 1 < q, q1, q2 < infinity");
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::DomainError, "need s > 0");
  if (!(a >= 0.0 && a < s)) throw Error(ErrorCode::DomainError, "need 0 <= a < s");
  if (n < 1) throw Error(ErrorCode::DomainError, "need n >= 1");
  GnTheta out;
  out.theta = (1.0 / q1 - 1.0 / q + a / n) / (1.0 / q1 - 1.0 / q2 + s / n);
  out.valid = out.theta >= a / s && out.theta <= 1.0;
  return out;
}

ExponentReport make_report(const SystemParams& params, double eps, double critical_tolerance) {
  ExponentReport rep;
  rep.params = params;
  rep.eps = eps;
  rep.gamma = compute_gamma(params);
  rep.relabeling = relabel_argmax_last(params, rep.gamma.argmax);
  rep.classification = classify(params, critical_tolerance);
  rep.critical_case_open = rep.classification == Classification::Critical;
  rep.flags = check_global_conditions(params);

  const auto& rp = rep.relabeling.params;
  const auto seq = loss_of_decay_sequence(rp, eps);
  rep.epsilon_seq = seq.recursive;
  const auto ab = alpha_beta_sequences(rp);
  rep.alpha_seq = ab.alpha;
  rep.beta_seq = ab.beta;

  if (rep.relabeling.shift != 0) {
    std::ostringstream os;
    os << "largest gamma at component " << rep.gamma.argmax + 1
       << "; sequences use the cyclic relabeling that moves it last";
    rep.warnings.push_back(os.str());
  }
  if (rep.critical_case_open) {
    rep.warnings.emplace_back("critical case max gamma = n/(2 sigma): no prediction available");
  }
  if (rep.flags.global_existence()) {
    rep.decay = predicted_decay(params, eps);
    // The last component keeps the linear rate only if
    // -r (p_k - 1) + p_k eps_{k-1} < -1, which a large eps can break.
    const std::size_t k = rp.k();
    const double r = params.critical_ratio();
    const double margin = -r * (rp.p[k - 1] - 1.0) + rp.p[k - 1] * seq.recursive[k - 2];
    if (!(margin < -1.0)) {
      rep.warnings.emplace_back("eps too large: -r(p_k-1) + p_k eps_{k-1} >= -1");
    }
    for (std::size_t l = 0; l + 1 < k; ++l) {
      if (!(seq.recursive[l] > 0.0)) {
        rep.warnings.emplace_back("non-positive loss of decay eps_" + std::to_string(l + 1));
      }
    }
  }
  if (rep.classification == Classification::Subcritical) {
    rep.lifespan = lifespan_exponent(params, critical_tolerance);
  }
  return rep;
}

}  // namespace sevo::exponents
