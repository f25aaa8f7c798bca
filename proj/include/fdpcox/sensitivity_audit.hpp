/**
 * Empirical auditor for the gradient-sensitivity bounds: random neighboring
 * pairs give observed lower estimates of sens2, and explicit adversarial
 * constructions give certified lower witnesses with known growth.
 *
 * The witnesses follow the bound's own accounting.  For the censoring-only
 * and time-move constructions all covariates are identical, so the realized
 * gradient difference collapses to zero by symmetry; the witness instead
 * evaluates the decomposition terms the analysis charges for those
 * constructions (the flipped record's own score term plus the risk-set
 * average at its event time, respectively the per-event leverage of the
 * relocated record).  For the covariate-move construction the realized
 * gradient difference itself is the witness.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "privacy.hpp"
#include "rng.hpp"
#include "survival.hpp"

namespace fdpcox {

/** One audited (case, n) cell, ready for CSV export. */
struct SensitivityAuditRow {
  NeighborCase neighbor_case;
  int n = 0;
  double bound = 0.0;
  double max_observed = 0.0;
  double lower_witness = 0.0;
};

namespace detail {

inline VectorXd sample_in_ball(int d, double radius, RngStream& rng) {
  VectorXd v(d);
  for (int j = 0; j < d; ++j) v(j) = rng.next_normal();
  const double norm = v.norm();
  if (norm == 0.0) return VectorXd::Zero(d);
  const double r = radius * std::pow(rng.next_double(), 1.0 / d);
  return v * (r / norm);
}

inline Dataset random_dataset(int n, int d, const ModelBounds& bounds,
                              RngStream& rng) {
  Dataset data(d);
  for (int i = 0; i < n; ++i) {
    const double t = rng.next_double();
    const int event = rng.next_double() < 0.7 ? 1 : 0;
    data.append(t, event, sample_in_ball(d, bounds.c_z, rng));
  }
  data.finalize();
  return data;
}

/** Copy `data` with record `index` replaced according to the neighbor case. */
inline Dataset make_neighbor(const Dataset& data, int index, NeighborCase c,
                             const ModelBounds& bounds, RngStream& rng) {
  Dataset out(data.dimension());
  for (int i = 0; i < data.size(); ++i) {
    double t = data.time(i);
    int event = data.event(i);
    VectorXd z = data.z(i);
    if (i == index) {
      switch (c) {
        case NeighborCase::kCensoringOnly:
          event = 1 - event;
          break;
        case NeighborCase::kCovariateOnly:
          z = sample_in_ball(data.dimension(), bounds.c_z, rng);
          break;
        case NeighborCase::kTimeOnly:
          t = rng.next_double();
          break;
        case NeighborCase::kFullTriple:
          t = rng.next_double();
          event = rng.next_double() < 0.7 ? 1 : 0;
          z = sample_in_ball(data.dimension(), bounds.c_z, rng);
          break;
      }
    }
    out.append(t, event, z);
  }
  out.finalize();
  return out;
}

/** n records with identical covariates C_Z e1, all events, distinct times. */
inline Dataset identical_covariate_dataset(int n, int d, double c_z) {
  Dataset data(d);
  VectorXd z = VectorXd::Zero(d);
  z(0) = c_z;
  for (int i = 0; i < n; ++i)
    data.append((i + 1.0) / (n + 1.0), 1, z);
  data.finalize();
  return data;
}

}  // namespace detail

/**
 * Witness for the censoring-only case: identical covariates z = C_Z e1, all
 * events at distinct times, and the smallest-time record's indicator flipped.
 * The flip removes that record's score term z/n and the risk-set average
 * Z-bar(T_(1), beta)/n charged against it; with identical covariates the two
 * align, giving ||z||/n + ||Z-bar||/n = 2 C_Z / n.
 */
inline double censoring_flip_witness(int n, int d, const ModelBounds& bounds) {
  if (n < 2) throw std::invalid_argument("witness needs n >= 2");
  const Dataset data = detail::identical_covariate_dataset(n, d, bounds.c_z);
  const VectorXd beta = VectorXd::Zero(d);
  double t_min = data.time(0);
  for (int i = 1; i < n; ++i) t_min = std::min(t_min, data.time(i));
  const SMoments m = s_moments(data, t_min, beta);
  VectorXd z = VectorXd::Zero(d);
  z(0) = bounds.c_z;
  return z.norm() / n + m.z_bar.norm() / n;
}

/**
 * Witness for the covariate-move case: all events, covariates C_Z e1 except
 * the largest-time record flipped to -C_Z e1 in the neighbor, evaluated at
 * beta = -C_beta e1.  Here the realized gradient difference is nonzero and
 * is returned directly; it grows like log(n)/n.
 */
inline double covariate_move_witness(int n, int d, const ModelBounds& bounds) {
  if (n < 2) throw std::invalid_argument("witness needs n >= 2");
  const Dataset data = detail::identical_covariate_dataset(n, d, bounds.c_z);
  Dataset moved(d);
  VectorXd z_flip = VectorXd::Zero(d);
  z_flip(0) = -bounds.c_z;
  int last = 0;
  for (int i = 1; i < n; ++i)
    if (data.time(i) > data.time(last)) last = i;
  for (int i = 0; i < n; ++i)
    moved.append(data.time(i), data.event(i), i == last ? z_flip : data.z(i).eval());
  moved.finalize();
  VectorXd beta = VectorXd::Zero(d);
  beta(0) = -bounds.c_beta;
  return (gradient(data, beta) - gradient(moved, beta)).norm();
}

/**
 * Witness for the time-move (and full-record) case: identical covariates,
 * all events, and the largest-time record relocated below every other time.
 * The relocation removes the record from every other event's risk set; the
 * analysis charges its leverage ||z|| w / (n S0(T_i)) on each of those
 * averages, amounting to C_Z (H_n - 1)/n with H_n the n-th harmonic number.
 * The realized difference is again zero by symmetry.
 */
inline double time_move_witness(int n, int d, const ModelBounds& bounds) {
  if (n < 2) throw std::invalid_argument("witness needs n >= 2");
  const Dataset data = detail::identical_covariate_dataset(n, d, bounds.c_z);
  const VectorXd beta = VectorXd::Zero(d);
  int last = 0;
  for (int i = 1; i < n; ++i)
    if (data.time(i) > data.time(last)) last = i;
  VectorXd z = VectorXd::Zero(d);
  z(0) = bounds.c_z;
  const double w = std::exp(beta.dot(z));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == last || data.event(i) == 0) continue;
    const SMoments m = s_moments(data, data.time(i), beta);
    acc += z.norm() * w / (n * m.s0);
  }
  return acc / n;
}

inline double case_witness(int n, int d, NeighborCase c, const ModelBounds& bounds) {
  switch (c) {
    case NeighborCase::kCensoringOnly: return censoring_flip_witness(n, d, bounds);
    case NeighborCase::kCovariateOnly: return covariate_move_witness(n, d, bounds);
    case NeighborCase::kTimeOnly:
    case NeighborCase::kFullTriple: return time_move_witness(n, d, bounds);
  }
  throw std::logic_error("unknown neighbor case");
}

/**
 * Audit one (case, n) cell: `trials` random neighboring pairs with beta drawn
 * uniformly from the C_beta-ball give max_observed; the case-specific
 * construction gives lower_witness.  Soundness demands both stay at or below
 * the analytic bound; max_observed need not dominate lower_witness (two of
 * the constructions are charged through the decomposition, not realized).
 */
inline SensitivityAuditRow empirical_sensitivity(int n, int d, NeighborCase c,
                                                 int trials, std::uint64_t seed,
                                                 const ModelBounds& bounds = {}) {
  if (n < 2) throw std::invalid_argument("audit needs n >= 2");
  if (trials < 1) throw std::invalid_argument("audit needs trials >= 1");
  RngStream root(seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(n)});
  double max_observed = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    RngStream rng = root.child(static_cast<std::uint64_t>(trial));
    Dataset data = detail::random_dataset(n, d, bounds, rng);
    const int index = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    Dataset other = detail::make_neighbor(data, index, c, bounds, rng);
    const VectorXd beta = detail::sample_in_ball(d, bounds.c_beta, rng);
    const double diff = (gradient(data, beta) - gradient(other, beta)).norm();
    max_observed = std::max(max_observed, diff);
  }
  SensitivityAuditRow row;
  row.neighbor_case = c;
  row.n = n;
  row.bound = grad_sensitivity_bound(n, bounds, c).value;
  row.max_observed = max_observed;
  row.lower_witness = case_witness(n, d, c, bounds);
  return row;
}

}  // namespace fdpcox
