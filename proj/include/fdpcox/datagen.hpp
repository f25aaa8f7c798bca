/**
 * Seeded generator of Cox-model survival data with exponential censoring and
 * truncation at the time horizon 1.
 *
 * Event times use the inverse cumulative-hazard transform: with E ~ Exp(1),
 * T-tilde = Lambda0^{-1}(E * exp(-beta0' z)) has conditional survival
 * exp(-Lambda0(t) * exp(beta0' z)).  The observed pair is
 *
 *   (T, Delta) = (min(T-tilde, C, 1), 1{T-tilde <= min(1, C)}),
 *
 * with censoring C ~ Exp(alpha) drawn independently given Z.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "survival.hpp"

namespace fdpcox {

/** Baseline hazard: constant rate, or a tabulated nondecreasing cumulative
 *  hazard interpolated piecewise-linearly (invertible where increasing). */
struct BaselineHazard {
  double constant_rate = 1.0;
  // Optional tabulation on [0, horizon]: knots (t_k, Lambda0(t_k)), t_0 = 0,
  // Lambda0(0) = 0, both columns nondecreasing.  Empty means constant rate.
  std::vector<double> knot_t;
  std::vector<double> knot_value;

  bool tabulated() const { return !knot_t.empty(); }

  double cumulative(double t) const {
    if (!tabulated()) return constant_rate * t;
    if (t <= knot_t.front()) return knot_value.front();
    for (std::size_t k = 1; k < knot_t.size(); ++k) {
      if (t <= knot_t[k]) {
        const double w = (t - knot_t[k - 1]) / (knot_t[k] - knot_t[k - 1]);
        return knot_value[k - 1] + w * (knot_value[k] - knot_value[k - 1]);
      }
    }
    // Extrapolate with the final segment's slope so the transform stays
    // invertible beyond the last knot.
    const std::size_t m = knot_t.size() - 1;
    const double slope =
        (knot_value[m] - knot_value[m - 1]) / (knot_t[m] - knot_t[m - 1]);
    if (slope <= 0.0)
      throw std::invalid_argument("tabulated baseline not invertible in the tail");
    return knot_value[m] + slope * (t - knot_t[m]);
  }

  double inverse_cumulative(double u) const {
    if (!tabulated()) return u / constant_rate;
    for (std::size_t k = 1; k < knot_t.size(); ++k) {
      if (u <= knot_value[k]) {
        const double dv = knot_value[k] - knot_value[k - 1];
        if (dv <= 0.0)
          throw std::invalid_argument("tabulated baseline not invertible");
        const double w = (u - knot_value[k - 1]) / dv;
        return knot_t[k - 1] + w * (knot_t[k] - knot_t[k - 1]);
      }
    }
    const std::size_t m = knot_t.size() - 1;
    const double slope =
        (knot_value[m] - knot_value[m - 1]) / (knot_t[m] - knot_t[m - 1]);
    if (slope <= 0.0)
      throw std::invalid_argument("tabulated baseline not invertible in the tail");
    return knot_t[m] + (u - knot_value[m]) / slope;
  }
};

enum class CovariateLaw {
  kUniform,           // Z_j ~ Uniform(-1/sqrt(d), 1/sqrt(d)), so ||Z|| <= 1
  kTruncatedGaussian  // Z ~ N(0, I) projected onto the unit ball
};

/** Full description of the generating model. */
struct CoxModelSpec {
  VectorXd beta0;
  BaselineHazard baseline;
  double censoring_rate = 0.3;  // C ~ Exp(alpha)
  CovariateLaw covariate_law = CovariateLaw::kUniform;

  int dimension() const { return static_cast<int>(beta0.size()); }

  void validate(const ModelBounds& bounds) const {
    if (beta0.size() < 1) throw std::invalid_argument("beta0 must be nonempty");
    if (censoring_rate <= 0.0)
      throw std::invalid_argument("censoring rate must be positive");
    if (beta0.norm() > bounds.c_beta * (1.0 + 1e-12))
      throw std::invalid_argument("||beta0|| exceeds configured bound");
  }
};

/** Lambda0(t); for a constant rate lambda this is lambda * t. */
inline double true_cumulative_hazard(const CoxModelSpec& spec, double t) {
  return spec.baseline.cumulative(t);
}

inline VectorXd sample_covariates(const CoxModelSpec& spec, RngStream& rng) {
  const int d = spec.dimension();
  VectorXd z(d);
  switch (spec.covariate_law) {
    case CovariateLaw::kUniform: {
      const double half_width = 1.0 / std::sqrt(static_cast<double>(d));
      for (int j = 0; j < d; ++j) z(j) = rng.next_uniform(-half_width, half_width);
      break;
    }
    case CovariateLaw::kTruncatedGaussian: {
      for (int j = 0; j < d; ++j) z(j) = rng.next_normal();
      z = project_ball(z, 1.0);
      break;
    }
  }
  return z;
}

/** Latent event time via the inverse cumulative-hazard transform. */
inline double sample_event_time(const CoxModelSpec& spec, const VectorXd& z,
                                RngStream& rng) {
  const double e = rng.next_exponential(1.0);
  return spec.baseline.inverse_cumulative(e * std::exp(-spec.beta0.dot(z)));
}

inline SurvivalRecord sample_record(const CoxModelSpec& spec, RngStream& rng) {
  SurvivalRecord r;
  r.covariates = sample_covariates(spec, rng);
  const double t_event = sample_event_time(spec, r.covariates, rng);
  const double t_censor = rng.next_exponential(spec.censoring_rate);
  r.observed_time = std::min({t_event, t_censor, 1.0});
  r.event = t_event <= std::min(1.0, t_censor) ? 1 : 0;
  return r;
}

inline Dataset sample_dataset(const CoxModelSpec& spec, int n, RngStream rng) {
  Dataset data(spec.dimension());
  for (int i = 0; i < n; ++i) {
    const SurvivalRecord r = sample_record(spec, rng);
    data.append(r.observed_time, r.event, r.covariates);
  }
  data.finalize();
  return data;
}

/**
 * The at-risk probability p0 = P(Y(1) = 1) under the spec, by Monte Carlo
 * with a fixed internal stream: deterministic for a given spec and usable as
 * an oracle for reported error metrics.
 */
inline double true_at_risk_probability(const CoxModelSpec& spec,
                                       int samples = 200000) {
  RngStream rng(0x70726F62u, {11});
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    const VectorXd z = sample_covariates(spec, rng);
    // P(T-tilde >= 1 | z) * P(C >= 1)
    acc += std::exp(-spec.baseline.cumulative(1.0) * std::exp(spec.beta0.dot(z))) *
           std::exp(-spec.censoring_rate);
  }
  return acc / samples;
}

}  // namespace fdpcox
