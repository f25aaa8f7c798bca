/**
 * Private cumulative-hazard estimation.
 *
 * Each server bins its truncated Breslow increments into the 2^h leaves of a
 * dyadic tree over [0, 1], fills internal nodes with pairwise child sums, and
 * releases the whole tree with independent Gaussian noise on every node.  A
 * prefix query then touches at most h nodes per server, so the noise in
 * Lambda-hat(t) grows with h rather than with the number of events.  The
 * per-node budget interprets the per-server (eps, delta) as eps/h per level
 * under basic composition across the h level-releases.
 *
 * The at-risk probability estimator releases each server's noised fraction
 * of subjects still under observation at the horizon; its weighted average
 * feeds the truncation constant c = 0.9 exp(-C_Z ||beta-hat||) p-hat that
 * keeps the Breslow denominators bounded away from zero.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "federation.hpp"
#include "privacy.hpp"
#include "rng.hpp"
#include "survival.hpp"

namespace fdpcox {

/** One server's released tree: levels[l-1][m-1] = x_{l,m}, l = 1..h. */
struct HazardTree {
  int depth = 0;  // h
  int server_id = 0;
  std::vector<std::vector<double>> levels;
  double node_sigma = 0.0;

  int node_count() const {
    int total = 0;
    for (const auto& level : levels) total += static_cast<int>(level.size());
    return total;
  }

  /** Level-major flattening, for transcript payloads. */
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(node_count());
    for (const auto& level : levels) out.insert(out.end(), level.begin(), level.end());
    return out;
  }
};

/** Aggregated estimator: weighted sum of per-server tree queries. */
struct HazardEstimate {
  int depth = 0;
  std::vector<HazardTree> trees;
  std::vector<double> weights;
};

/** Tree depth h = floor(0.5 log2(sum_s min(n_s, n_s^2 eps_s^2))). */
inline int tree_depth(const FederationConfig& config) {
  config.validate();
  double effective = 0.0;
  for (const auto& s : config.servers) {
    const double n = static_cast<double>(s.n);
    const double eps = s.budget.epsilon;
    effective += std::min(n, n * n * eps * eps);
  }
  if (effective < 2.0)
    throw std::invalid_argument("effective sample size too small for a tree");
  return static_cast<int>(std::floor(0.5 * std::log2(effective)));
}

/** Truncation level c = 0.9 exp(-c_z ||beta_hat||_2) p_hat. */
inline double truncation_constant(const VectorXd& beta_hat, double p_hat,
                                  double c_z) {
  if (!(p_hat > 0.0)) throw std::invalid_argument("p_hat must be positive");
  return 0.9 * std::exp(-c_z * beta_hat.norm()) * p_hat;
}

/**
 * Leaf vector of length 2^h: leaf m accumulates, over events with observed
 * time in [(m-1)/2^h, m/2^h) (final interval closed at 1),
 * 1 / (n max(c, S0(T_i, beta_hat))).  A single descending-time sweep supplies
 * every S0 in O(n (log n + d)).
 */
inline std::vector<double> breslow_increments(const Dataset& data,
                                              const VectorXd& beta_hat, double c,
                                              int h) {
  if (!(c > 0.0)) throw std::invalid_argument("truncation constant must be positive");
  if (h < 1) throw std::invalid_argument("tree depth must be at least 1");
  if (data.empty()) throw std::invalid_argument("empty dataset");
  if (beta_hat.size() != data.dimension())
    throw std::invalid_argument("beta dimension mismatch");
  const int n = data.size();
  const int leaf_count = 1 << h;
  std::vector<double> leaves(leaf_count, 0.0);
  const auto& order = data.descending_order();
  double r0 = 0.0;  // sum of exp(beta' z) over subjects with time >= t
  int pos = 0;
  while (pos < n) {
    const double t = data.time(order[pos]);
    int group_end = pos;
    while (group_end < n && data.time(order[group_end]) == t) ++group_end;
    for (int k = pos; k < group_end; ++k)
      r0 += std::exp(beta_hat.dot(data.z(order[k])));
    const double s0 = r0 / n;
    for (int k = pos; k < group_end; ++k) {
      const int i = order[k];
      if (!data.event(i)) continue;
      const int m = std::min(static_cast<int>(t * leaf_count), leaf_count - 1);
      leaves[m] += 1.0 / (n * std::max(c, s0));
    }
    pos = group_end;
  }
  return leaves;
}

/** Per-node noise sigma: sqrt((1/c^4 + 3/c^2) (2 log(1/delta)/eps + 1) h / (n^2 eps)). */
inline double hazard_node_sigma(double c, int n, const PrivacyBudget& budget,
                                int h) {
  budget.validate();
  if (budget.delta == 0.0)
    throw std::invalid_argument("Gaussian calibration requires delta > 0");
  if (!(c > 0.0)) throw std::invalid_argument("truncation constant must be positive");
  const double eps = budget.epsilon;
  const double variance = (1.0 / (c * c * c * c) + 3.0 / (c * c)) *
                          (2.0 * std::log(1.0 / budget.delta) / eps + 1.0) * h /
                          (static_cast<double>(n) * n * eps);
  return std::sqrt(variance);
}

/**
 * One server's private tree: truncated Breslow leaves, internal pairwise
 * sums, independent N(0, sigma^2) on every node of every level.
 */
inline HazardTree build_private_tree(const Dataset& data,
                                     const PrivacyBudget& budget,
                                     const VectorXd& beta_hat, double p_hat,
                                     int h, double c_z, RngStream rng,
                                     double noise_multiplier = 1.0) {
  const double c = truncation_constant(beta_hat, p_hat, c_z);
  HazardTree tree;
  tree.depth = h;
  tree.levels.resize(h);
  tree.levels[h - 1] = breslow_increments(data, beta_hat, c, h);
  for (int l = h - 1; l >= 1; --l) {
    const auto& below = tree.levels[l];
    auto& level = tree.levels[l - 1];
    level.resize(static_cast<std::size_t>(1) << l);
    for (std::size_t m = 0; m < level.size(); ++m)
      level[m] = below[2 * m] + below[2 * m + 1];
  }
  tree.node_sigma =
      noise_multiplier * hazard_node_sigma(c, data.size(), budget, h);
  if (tree.node_sigma > 0.0)
    for (auto& level : tree.levels)
      for (double& node : level) node += tree.node_sigma * rng.next_normal();
  return tree;
}

namespace detail {

/** Sum of this tree's nodes covering the dyadic prefix [0, j/2^h). */
inline double tree_prefix(const HazardTree& tree, int j) {
  const int h = tree.depth;
  if (j <= 0) return 0.0;
  if (j >= (1 << h)) return tree.levels[0][0] + tree.levels[0][1];
  double acc = 0.0;
  for (int l = 1; l <= h; ++l) {
    const int m = j >> (h - l);
    if (m & 1) acc += tree.levels[l - 1][m - 1];
  }
  return acc;
}

}  // namespace detail

/**
 * Lambda-hat(t): weighted per-server prefix sums over j = floor(2^h t) dyadic
 * nodes; t = 1 falls back to the root-level total, which equals the full
 * prefix in the noiseless tree.
 */
inline double query_hazard(const HazardEstimate& estimate, double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("t outside [0, 1]");
  const int leaf_count = 1 << estimate.depth;
  const int j = std::min(static_cast<int>(t * leaf_count), leaf_count);
  double acc = 0.0;
  for (std::size_t s = 0; s < estimate.trees.size(); ++s)
    acc += estimate.weights[s] * detail::tree_prefix(estimate.trees[s], j);
  return acc;
}

/** S-hat(t) = exp(-Lambda-hat(t)), clamped to [0, 1] against negative noise. */
inline double survival_estimate(const HazardEstimate& estimate, double t) {
  return std::clamp(std::exp(-query_hazard(estimate, t)), 0.0, 1.0);
}

/** Per-server noise sigma of the at-risk fraction (sensitivity 1/n). */
inline double at_risk_sigma(int n, const PrivacyBudget& budget) {
  return gaussian_sigma(1.0 / n, budget);
}

/** p-hat plus the transcript its computation released. */
struct AtRiskFit {
  double p_hat = 0.0;
  Transcript transcript;
};

/**
 * One-shot federated at-risk probability: each server releases
 * (1/n_s) sum_i 1{T_i >= 1} + N(0, (2 log(1.25/delta_s)) / (n_s eps_s)^2),
 * aggregated with weights n_s / sum_u n_u.
 */
inline AtRiskFit estimate_at_risk_probability(const FederationConfig& config,
                                              const std::vector<Server>& servers,
                                              const RngStream& noise_root,
                                              double noise_multiplier = 1.0) {
  FederationConfig one_shot = config;
  one_shot.rounds = 1;
  const RoundFn round_fn = [&](const Server& server, int,
                               const std::vector<Message>&, RngStream& rng) {
    double fraction = 0.0;
    for (int i = 0; i < server.data.size(); ++i)
      if (server.data.time(i) >= 1.0) fraction += 1.0;
    fraction /= server.data.size();
    const double sigma =
        noise_multiplier * at_risk_sigma(server.data.size(), server.budget);
    Message msg;
    msg.kind = MessageKind::kScalar;
    msg.scalar = fraction + (sigma > 0.0 ? sigma * rng.next_normal() : 0.0);
    msg.sigma = sigma;
    return msg;
  };
  AtRiskFit fit;
  fit.transcript = run_rounds(one_shot, servers, round_fn, noise_root);
  double total_n = 0.0;
  for (const auto& s : config.servers) total_n += s.n;
  for (std::size_t s = 0; s < servers.size(); ++s)
    fit.p_hat += config.servers[s].n * fit.transcript.messages()[s].scalar / total_n;
  return fit;
}

/** Hazard estimate plus the transcript of released trees. */
struct HazardFit {
  HazardEstimate estimate;
  Transcript transcript;
};

/**
 * One-shot federated Breslow estimator: each server releases one private
 * tree built at the common depth from tree_depth(config); trees are
 * aggregated with the hazard weights.
 */
inline HazardFit estimate_hazard(const FederationConfig& config,
                                 const std::vector<Server>& servers,
                                 const VectorXd& beta_hat, double p_hat,
                                 double c_z, const RngStream& noise_root,
                                 double noise_multiplier = 1.0) {
  const int h = tree_depth(config);
  HazardFit fit;
  fit.estimate.depth = h;
  fit.estimate.weights = effective_weights(config, WeightMode::kHazard);
  FederationConfig one_shot = config;
  one_shot.rounds = 1;
  const RoundFn round_fn = [&](const Server& server, int,
                               const std::vector<Message>&, RngStream& rng) {
    HazardTree tree = build_private_tree(server.data, server.budget, beta_hat,
                                         p_hat, h, c_z, rng, noise_multiplier);
    tree.server_id = server.id;
    Message msg;
    msg.kind = MessageKind::kTreeNodes;
    msg.nodes = tree.flatten();
    msg.sigma = tree.node_sigma;
    fit.estimate.trees.push_back(std::move(tree));
    return msg;
  };
  fit.transcript = run_rounds(one_shot, servers, round_fn, noise_root);
  return fit;
}

/**
 * Nelson-Aalen estimator at time t: sum over uncensored events with T_i <= t
 * of 1 / #{j : T_j >= T_i}.  Reference implementation for equivalence tests
 * (the beta-hat = 0, untruncated, noiseless special case of the above).
 */
inline double nelson_aalen(const Dataset& data, double t) {
  double acc = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    if (!data.event(i) || data.time(i) > t) continue;
    int at_risk_count = 0;
    for (int j = 0; j < data.size(); ++j)
      if (data.time(j) >= data.time(i)) ++at_risk_count;
    acc += 1.0 / at_risk_count;
  }
  return acc;
}

/** (t, Lambda-hat, S-hat) sampled on the dyadic grid m/2^h, m = 0..2^h. */
struct HazardCurvePoint {
  double t;
  double cumulative_hazard;
  double survival;
};

inline std::vector<HazardCurvePoint> hazard_curve(const HazardEstimate& estimate) {
  const int leaf_count = 1 << estimate.depth;
  std::vector<HazardCurvePoint> out;
  out.reserve(leaf_count + 1);
  for (int m = 0; m <= leaf_count; ++m) {
    const double t = static_cast<double>(m) / leaf_count;
    out.push_back({t, query_hazard(estimate, t), survival_estimate(estimate, t)});
  }
  return out;
}

}  // namespace fdpcox
