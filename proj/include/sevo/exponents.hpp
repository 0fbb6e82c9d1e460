#pragma once

// Exponent calculus of the k-component weakly coupled system
//
//   u_l'' + (-Delta)^sigma u_l + u_l' + (-Delta)^sigma u_l' = |u_{l-1}|^{p_l},
//
// with the cyclic convention u_0 := u_k. Everything here is a pure function
// of SystemParams.

#include <optional>
#include <string>
#include <vector>

namespace sevo::exponents {

struct SystemParams {
  int n = 1;             // space dimension
  double sigma = 1.0;    // order of the fractional Laplacian, >= 1
  std::vector<double> p; // p_1..p_k, each > 1, k >= 2

  std::size_t k() const noexcept { return p.size(); }
  /// n / (2 sigma), the quantity every threshold is compared against.
  double critical_ratio() const noexcept { return n / (2.0 * sigma); }

  /// Throws InvalidArgument for n < 1, sigma < 1, k < 2 or non-finite entries,
  /// SingularSystem when some p_l <= 1.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

enum class Classification { Supercritical, Critical, Subcritical };

const char* classification_name(Classification c) noexcept;

struct GammaVector {
  std::vector<double> gamma;
  std::size_t argmax = 0;  // 0-based; ties go to the smallest index
  double residual = 0.0;   // relative residual of (P - I) gamma = 1

  double max() const { return gamma.at(argmax); }
};

/// Solves (P - I) gamma = (1,...,1)^t by dense LU with partial pivoting.
GammaVector compute_gamma(const SystemParams& params);

/// (1 + p_k + p_{k-1} p_k + ... + p_2...p_k) / (p_1...p_k - 1), i.e. gamma_k.
double gamma_max_closed_form(const SystemParams& params);

/// Cyclic relabeling that moves component `argmax` to the last position.
/// New component j (0-based) is old component (j + argmax + 1) mod k, which
/// keeps the coupling pattern l <- l-1 intact.
struct Relabeling {
  std::size_t shift = 0;              // argmax + 1 (mod k); 0 means identity
  std::vector<std::size_t> old_index; // old_index[j] for new position j
  SystemParams params;                // relabeled parameters
};

Relabeling relabel_argmax_last(const SystemParams& params, std::size_t argmax);

constexpr double kDefaultCriticalTolerance = 1e-12;

Classification classify(const SystemParams& params,
                        double tolerance = kDefaultCriticalTolerance);

struct ConditionFlags {
  bool p1_bound = false;          // p_1 <= 1 + 2 sigma / n
  bool intermediate_bound = false;// (p_1..p_l - 1)/(1 + p_l + ... + p_2..p_l) <= 2 sigma/n, l = 2..k-1
  bool low_dimension = false;     // n <= 2 sigma
  bool p_at_least_two = false;    // every p_l >= 2
  bool supercritical = false;     // gamma_k < n/(2 sigma)
  bool subcritical = false;       // gamma_k > n/(2 sigma)
  bool lower_lifespan = false;    // 2 <= p_l (n <= 2 sigma), or p_l <= n/(n - 2 sigma) for 2 sigma < n <= 4 sigma

  /// Hypotheses of the global existence result.
  bool global_existence() const noexcept {
    return p1_bound && intermediate_bound && low_dimension && p_at_least_two && supercritical;
  }
  /// Names of the failed global-existence flags, for error messages.
  std::vector<std::string> failed_global() const;
};

/// Flags are evaluated on the system relabeled so that the largest gamma sits
/// in the last slot.
ConditionFlags check_global_conditions(const SystemParams& params);

struct LossOfDecay {
  std::vector<double> recursive; // eps_1..eps_k, eps_k = 0
  std::vector<double> expanded;  // same values from the expanded products
  double max_discrepancy = 0.0;
};

/// eps_1 = 1 - r(p_1 - 1) + eps, eps_l = 1 - r(p_l - 1) + p_l eps_{l-1}
/// (l = 2..k-1), eps_k = 0, with r = n/(2 sigma). Throws DomainError when the
/// two evaluations disagree by more than 1e-12 (relative).
LossOfDecay loss_of_decay_sequence(const SystemParams& params, double eps);

struct AlphaBeta {
  std::vector<double> alpha; // alpha_1..alpha_{k-1}
  std::vector<double> beta;  // beta_1..beta_k
  double identity_error = 0.0; // max |beta_l - (p_l - 1)(gamma_k - r)|
};

/// Uses gamma_k = max gamma and the p_l of the system as given.
AlphaBeta alpha_beta_sequences(const SystemParams& params);

struct DecayPrediction {
  std::vector<double> l2;     // -n/(4 sigma) + eps_l
  std::vector<double> hsigma; // -n/(4 sigma) - 1/2 + eps_l
};

/// Throws ConditionsUnmet (naming the failed flags) when the global existence
/// hypotheses do not hold.
DecayPrediction predicted_decay(const SystemParams& params, double eps);

/// -1 / (max gamma - n/(2 sigma)); throws NotSubcritical otherwise.
double lifespan_exponent(const SystemParams& params,
                         double tolerance = kDefaultCriticalTolerance);

struct GnTheta {
  double theta = 0.0;
  bool valid = false; // a/s <= theta <= 1
};

/// Interpolation exponent of the fractional Gagliardo-Nirenberg inequality
/// ||u||_{H^a_q} <~ ||u||_{L^q1}^{1-theta} ||u||_{H^s_q2}^theta.
GnTheta gn_theta(double q, double q1, double q2, double a, double s, int n);

struct ExponentReport {
  SystemParams params;
  double eps = 0.01;
  GammaVector gamma;
  Relabeling relabeling;
  Classification classification = Classification::Supercritical;
  bool critical_case_open = false;
  ConditionFlags flags;
  std::vector<double> epsilon_seq;
  std::vector<double> alpha_seq;
  std::vector<double> beta_seq;
  std::optional<DecayPrediction> decay;  // present when flags.global_existence()
  std::optional<double> lifespan;        // present when Subcritical
  std::vector<std::string> warnings;
};

/// Sequences (epsilon, alpha, beta) are computed on the relabeled system; the
/// decay prediction is mapped back to the original component order.
ExponentReport make_report(const SystemParams& params, double eps = 0.01,
                           double critical_tolerance = kDefaultCriticalTolerance);

}  // namespace sevo::exponents
