/**
 * Gaussian-mechanism calibration, the analytic gradient-sensitivity bounds
 * used by the private Cox estimators, and a small Renyi-DP accountant with
 * conversion back to (epsilon, delta) guarantees.
 *
 * Everything here is a pure calculator; noise sampling lives with the
 * algorithms so each mechanism invocation can own a dedicated RNG stream.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "survival.hpp"

namespace fdpcox {

/** An (epsilon, delta) differential-privacy target. */
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 0.001;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(delta >= 0.0 && delta < 1.0))
      throw std::invalid_argument("delta must lie in [0, 1)");
  }
};

/** Renyi-DP account at a fixed order alpha: epsilons add under composition. */
struct RdpLedger {
  double alpha;
  double epsilon_rdp = 0.0;

  void validate() const {
    if (!(alpha > 1.0)) throw std::invalid_argument("RDP order must exceed 1");
    if (epsilon_rdp < 0.0)
      throw std::invalid_argument("accumulated RDP epsilon must be nonnegative");
  }
};

/**
 * Which fields of a record a neighboring dataset may change.  The censoring
 * indicator alone admits an O(1/n) gradient sensitivity; changing the
 * covariate, the observed time, or the whole record costs an extra log(n)/n
 * term.
 */
enum class NeighborCase {
  kCensoringOnly,
  kCovariateOnly,
  kTimeOnly,
  kFullTriple,
};

inline std::string neighbor_case_label(NeighborCase c) {
  switch (c) {
    case NeighborCase::kCensoringOnly: return "censoring-only";
    case NeighborCase::kCovariateOnly: return "covariate-only";
    case NeighborCase::kTimeOnly: return "time-only";
    case NeighborCase::kFullTriple: return "full-triple";
  }
  throw std::logic_error("unknown neighbor case");
}

/** An analytic upper bound on sens2 of the gradient for one neighbor case. */
struct SensitivityBound {
  double value;
  NeighborCase neighbor_case;
};

/**
 * Standard deviation of the Gaussian mechanism releasing an l2-sensitivity
 * `sens` function under `budget`: sigma = sqrt(2 log(1.25/delta)) * sens / eps.
 */
inline double gaussian_sigma(double sens, const PrivacyBudget& budget) {
  budget.validate();
  if (sens < 0.0) throw std::invalid_argument("sensitivity must be nonnegative");
  if (budget.delta == 0.0)
    throw std::invalid_argument("Gaussian calibration requires delta > 0");
  return std::sqrt(2.0 * std::log(1.25 / budget.delta)) * sens / budget.epsilon;
}

/**
 * Analytic bound on the l2-sensitivity of the averaged partial-likelihood
 * gradient over n records with covariates in the C_Z-ball and beta in the
 * C_beta-ball.  Flipping only a censoring indicator changes the gradient by
 * at most 4 C_Z / n; the remaining cases add
 * (2 e^{2 C_Z C_beta} C_Z + 3 e^{2 C_Z C_beta} max(C_Z, C_Z^2)) log(n+1)/n.
 */
inline SensitivityBound grad_sensitivity_bound(int n, const ModelBounds& bounds,
                                               NeighborCase c) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const double cz = bounds.c_z;
  const double base = 4.0 * cz / n;
  if (c == NeighborCase::kCensoringOnly) return {base, c};
  const double amp = std::exp(2.0 * cz * bounds.c_beta);
  const double log_term = std::log(static_cast<double>(n) + 1.0) / n;
  const double value = base + 2.0 * amp * cz * log_term +
                       3.0 * amp * std::max(cz, cz * cz) * log_term;
  return {value, c};
}

/**
 * The single sensitivity expression the private estimators calibrate their
 * noise to: 6 max(C_Z, C_Z^2) e^{2 C_Z C_beta} log(n+1) / n.  It absorbs the
 * full-triple bound's three terms into one constant (and dominates the bound
 * whenever max(C_Z, C_Z^2) e^{2 C_Z C_beta} log(n+1) >= 4 C_Z, e.g. for all
 * C_Z, C_beta >= 1).
 */
inline double calibrated_gradient_sensitivity(int n, const ModelBounds& bounds) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  return 6.0 * std::max(bounds.c_z, bounds.c_z * bounds.c_z) *
         std::exp(2.0 * bounds.c_z * bounds.c_beta) *
         std::log(static_cast<double>(n) + 1.0) / n;
}

/** (alpha, eps)-RDP parameter of the Gaussian mechanism: alpha sens^2/(2 sigma^2). */
inline double rdp_gaussian(double alpha, double sens, double sigma) {
  if (!(alpha > 1.0)) throw std::invalid_argument("RDP order must exceed 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return alpha * sens * sens / (2.0 * sigma * sigma);
}

/** Adaptive composition at a fixed order: RDP epsilons add. */
inline RdpLedger rdp_compose(RdpLedger ledger, double eps_new) {
  ledger.validate();
  if (eps_new < 0.0) throw std::invalid_argument("RDP epsilon must be nonnegative");
  ledger.epsilon_rdp += eps_new;
  return ledger;
}

inline RdpLedger rdp_compose(const RdpLedger& ledger, const RdpLedger& other) {
  other.validate();
  if (ledger.alpha != other.alpha)
    throw std::invalid_argument("cannot compose RDP ledgers of different orders");
  return rdp_compose(ledger, other.epsilon_rdp);
}

/** Convert an (alpha, eps_rdp) guarantee to (eps_rdp + log(1/delta)/(alpha-1), delta). */
inline PrivacyBudget rdp_to_dp(const RdpLedger& ledger, double delta) {
  ledger.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");
  return {ledger.epsilon_rdp + std::log(1.0 / delta) / (ledger.alpha - 1.0), delta};
}

/**
 * Per-round Gaussian variance such that the K-fold adaptive composition of
 * the mechanism satisfies the (epsilon, delta) target:
 *
 *   sigma^2 = (2 log(1/delta)/epsilon + 1) * sens^2 / (epsilon / K).
 *
 * Running the accountant at order alpha = 2 log(1/delta)/epsilon + 1 gives
 * per-round RDP epsilon/(2K), hence epsilon/2 after K rounds, and conversion
 * adds exactly epsilon/2 back: the target is met with equality.
 */
inline double composed_gaussian_variance(double sens, const PrivacyBudget& budget,
                                         int k_rounds) {
  budget.validate();
  if (budget.delta == 0.0)
    throw std::invalid_argument("Gaussian calibration requires delta > 0");
  if (k_rounds < 1) throw std::invalid_argument("k_rounds must be at least 1");
  const double mix = 2.0 * std::log(1.0 / budget.delta) / budget.epsilon + 1.0;
  return mix * sens * sens * k_rounds / budget.epsilon;
}

}  // namespace fdpcox
