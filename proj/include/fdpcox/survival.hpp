/**
 * Cox partial-likelihood machinery on the time horizon [0, 1].
 *
 * Covariates are time-constant vectors, so the counting-process integrals
 * reduce to sums over event times.  Conventions used throughout:
 *
 *   - the at-risk indicator is inclusive, Y_i(t) = 1{T_i >= t}, so a subject
 *     belongs to the risk set at its own event time;
 *   - tied event times share the same pre-event risk set (Breslow handling);
 *   - the log partial likelihood is normalized by 1/n, and the score and
 *     Hessian are its exact analytic derivatives.
 *
 * All operations are pure functions of their inputs; a Dataset is immutable
 * after construction and safe to share across concurrent readers.
 */
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fdpcox {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/** One subject: observed time in [0, 1], event indicator, covariate vector. */
struct SurvivalRecord {
  double observed_time = 0.0;
  int event = 0;
  VectorXd covariates;
};

/** Norm bounds: ||Z||_2 <= c_z for covariates, ||beta||_2 <= c_beta. */
struct ModelBounds {
  double c_z = 1.0;
  double c_beta = 1.0;
};

/**
 * An ordered collection of subjects with a common covariate dimension.
 *
 * Data are stored field-wise (times, events, covariate rows) with the
 * descending-time permutation precomputed, so likelihood passes are a single
 * sweep with running risk-set sums.
 */
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(int dimension) : d_(dimension) {
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  }

  static Dataset from_records(const std::vector<SurvivalRecord>& records,
                              int dimension) {
    Dataset data(dimension);
    for (const auto& r : records) data.append(r.observed_time, r.event, r.covariates);
    data.finalize();
    return data;
  }

  void append(double time, int event, const VectorXd& z) {
    if (z.size() != d_) throw std::invalid_argument("covariate dimension mismatch");
    if (time < 0.0 || time > 1.0)
      throw std::invalid_argument("observed time outside [0, 1]");
    if (event != 0 && event != 1)
      throw std::invalid_argument("event indicator must be 0 or 1");
    time_.push_back(time);
    event_.push_back(event);
    z_.insert(z_.end(), z.data(), z.data() + d_);
    finalized_ = false;
  }

  /** Recomputes the descending-time sweep order; idempotent. */
  void finalize() {
    order_.resize(size());
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [this](int a, int b) {
      if (time_[a] != time_[b]) return time_[a] > time_[b];
      return a < b;
    });
    finalized_ = true;
  }

  int size() const { return static_cast<int>(time_.size()); }
  int dimension() const { return d_; }
  bool empty() const { return time_.empty(); }

  double time(int i) const { return time_[i]; }
  int event(int i) const { return event_[i]; }
  Eigen::Map<const VectorXd> z(int i) const {
    return Eigen::Map<const VectorXd>(z_.data() + static_cast<std::size_t>(i) * d_, d_);
  }

  SurvivalRecord record(int i) const { return {time_[i], event_[i], z(i)}; }

  /** Subjects [begin, end) in insertion order, as an independent dataset. */
  Dataset slice(int begin, int end) const {
    Dataset out(d_);
    for (int i = begin; i < end; ++i) out.append(time_[i], event_[i], z(i));
    out.finalize();
    return out;
  }

  double max_covariate_norm() const {
    double m = 0.0;
    for (int i = 0; i < size(); ++i) m = std::max(m, z(i).norm());
    return m;
  }

  /** Throws if any record violates the configured bounds. */
  void validate(const ModelBounds& bounds) const {
    for (int i = 0; i < size(); ++i) {
      if (z(i).norm() > bounds.c_z * (1.0 + 1e-12))
        throw std::invalid_argument("covariate norm exceeds configured bound");
    }
  }

  const std::vector<int>& descending_order() const {
    if (!finalized_) throw std::logic_error("Dataset::finalize() not called");
    return order_;
  }

 private:
  int d_ = 0;
  std::vector<double> time_;
  std::vector<int> event_;
  std::vector<double> z_;  // row-major, size() x d_
  std::vector<int> order_;
  bool finalized_ = true;
};

/** At-risk indicator Y(t) = 1{observed_time >= t}. */
inline int at_risk(const SurvivalRecord& record, double t) {
  return record.observed_time >= t ? 1 : 0;
}

/**
 * The normalized risk-set moments S^(0), S^(1), S^(2) at time t, together
 * with the derived mean Z-bar = S1/S0 and covariance V = S2/S0 - Z-bar^T
 * Z-bar (filled only when the risk set is nonempty).
 */
struct SMoments {
  double s0 = 0.0;
  VectorXd s1;
  MatrixXd s2;
  VectorXd z_bar;
  MatrixXd v;
  bool degenerate = true;  // true iff no subject is at risk (s0 == 0)
};

inline SMoments s_moments(const Dataset& data, double t, const VectorXd& beta) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  if (beta.size() != data.dimension())
    throw std::invalid_argument("beta dimension mismatch");
  const int n = data.size();
  const int d = data.dimension();
  SMoments m;
  m.s1 = VectorXd::Zero(d);
  m.s2 = MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    if (data.time(i) < t) continue;
    const auto zi = data.z(i);
    const double w = std::exp(beta.dot(zi));
    m.s0 += w;
    m.s1 += w * zi;
    m.s2 += w * zi * zi.transpose();
  }
  m.s0 /= n;
  m.s1 /= n;
  m.s2 /= n;
  if (m.s0 > 0.0) {
    m.degenerate = false;
    m.z_bar = m.s1 / m.s0;
    m.v = m.s2 / m.s0 - m.z_bar * m.z_bar.transpose();
  }
  return m;
}

namespace detail {

/**
 * Single descending-time sweep computing any of log-likelihood, score, and
 * Hessian.  Subjects are absorbed into the running sums r0/r1/r2 time-group
 * by time-group before the group's events are processed, which realizes the
 * inclusive risk set and Breslow tie handling in O(n d^2).
 */
inline void cox_sweep(const Dataset& data, const VectorXd& beta, double* loglik,
                      VectorXd* score, MatrixXd* hess) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  if (beta.size() != data.dimension())
    throw std::invalid_argument("beta dimension mismatch");
  const int n = data.size();
  const int d = data.dimension();
  const auto& order = data.descending_order();

  double r0 = 0.0;
  VectorXd r1 = VectorXd::Zero(d);
  MatrixXd r2 = MatrixXd::Zero(d, d);
  if (loglik) *loglik = 0.0;
  if (score) *score = VectorXd::Zero(d);
  if (hess) *hess = MatrixXd::Zero(d, d);

  int pos = 0;
  while (pos < n) {
    const double t = data.time(order[pos]);
    int group_end = pos;
    while (group_end < n && data.time(order[group_end]) == t) ++group_end;
    for (int k = pos; k < group_end; ++k) {
      const int i = order[k];
      const auto zi = data.z(i);
      const double w = std::exp(beta.dot(zi));
      r0 += w;
      r1 += w * zi;
      if (hess) r2 += w * zi * zi.transpose();
    }
    for (int k = pos; k < group_end; ++k) {
      const int i = order[k];
      if (!data.event(i)) continue;
      const auto zi = data.z(i);
      if (loglik) *loglik += beta.dot(zi) - std::log(r0);
      if (score) *score += zi - r1 / r0;
      if (hess) {
        const VectorXd z_bar = r1 / r0;
        *hess += r2 / r0 - z_bar * z_bar.transpose();
      }
    }
    pos = group_end;
  }
  if (loglik) *loglik /= n;
  if (score) *score /= n;
  if (hess) *hess /= n;
}

}  // namespace detail

/** The 1/n-normalized log partial likelihood. */
inline double partial_log_likelihood(const Dataset& data, const VectorXd& beta) {
  double ll;
  detail::cox_sweep(data, beta, &ll, nullptr, nullptr);
  return ll;
}

/** Score: (1/n) * sum over events of (Z_i - Z-bar(T_i, beta)). */
inline VectorXd gradient(const Dataset& data, const VectorXd& beta) {
  VectorXd g;
  detail::cox_sweep(data, beta, nullptr, &g, nullptr);
  return g;
}

/**
 * (1/n) * sum over events of V(T_i, beta); symmetric positive semi-definite.
 * Note this is the negated second derivative of the concave log likelihood.
 */
inline MatrixXd hessian(const Dataset& data, const VectorXd& beta) {
  MatrixXd h;
  detail::cox_sweep(data, beta, nullptr, nullptr, &h);
  return h;
}

/** Euclidean projection onto the centered ball of the given radius. */
inline VectorXd project_ball(const VectorXd& v, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  const double norm = v.norm();
  if (norm <= radius) return v;
  return v * (radius / norm);
}

}  // namespace fdpcox
