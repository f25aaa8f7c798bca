/**
 * Private Cox coefficient estimators:
 *
 *   - run_fdp_cox: batched federated ascent — round k of K consumes each
 *     server's k-th disjoint batch of size b_s = floor(n_s/K), so the whole
 *     run spends each record once;
 *   - run_fdp_cox_interactive: every round reuses each server's full data,
 *     with per-round noise inflated so the K-fold composition still meets
 *     the per-server budget;
 *   - run_cdp_cox: the single-server case of the interactive variant.
 *
 * All three ascend the noised, weighted gradient aggregate with a fixed step
 * size and project every iterate onto the C_beta-ball.  The noise scales are
 * the generic Gaussian calibrators applied to the calibrated gradient
 * sensitivity 6 max(C_Z, C_Z^2) e^{2 C_Z C_beta} log(m+1)/m at the relevant
 * sample size m, which reproduces the printed variances exactly:
 * one-shot calibration gives 72 log(1.25/delta) max(C_Z^2, C_Z^4)
 * e^{4 C_Z C_beta} log^2(b+1) / (eps^2 b^2) per batch, and K-fold composed
 * calibration gives 36 max(C_Z^2, C_Z^4) e^{4 C_Z C_beta} log^2(n+1)/n^2
 * (2 log(1/delta)/eps + 1) / (eps/K) per full-data round.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "federation.hpp"
#include "privacy.hpp"
#include "rng.hpp"
#include "survival.hpp"

namespace fdpcox {

/** Tuning for the projected-ascent estimators. */
struct SgdParams {
  int rounds = 1;          // K
  double step_size = 0.5;  // eta
  ModelBounds bounds;
  // Multiplies every noise sigma; 0 disables noise (deterministic ascent),
  // values != 1 drive sensitivity-analysis runs and are recorded per message.
  double noise_scale_multiplier = 1.0;

  void validate() const {
    if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
    if (noise_scale_multiplier < 0.0)
      throw std::invalid_argument("noise multiplier must be nonnegative");
  }
};

/** Fit output: final iterate, full trajectory, and the released transcript. */
struct CoxFitResult {
  VectorXd beta_hat;
  std::vector<VectorXd> trajectory;  // beta^(0), ..., beta^(K)
  std::vector<double> sigmas;        // noise sigma of each transcript message
  Transcript transcript;
};

/** Default round count K = ceil(6 log(n_total / d^2)), clamped to >= 1. */
inline int default_round_count(long long n_total, int d,
                               double round_constant = 6.0) {
  const double k = round_constant *
                   std::log(static_cast<double>(n_total) / (static_cast<double>(d) * d));
  return std::max(1, static_cast<int>(std::ceil(k)));
}

/** Per-round, per-server noise sigma of the batched estimator. */
inline double fdp_gradient_sigma(int batch_size, const PrivacyBudget& budget,
                                 const ModelBounds& bounds) {
  return gaussian_sigma(calibrated_gradient_sensitivity(batch_size, bounds), budget);
}

/** Per-round noise sigma of the full-data estimators under K-fold composition. */
inline double cdp_gradient_sigma(int n, const PrivacyBudget& budget, int rounds,
                                 const ModelBounds& bounds) {
  return std::sqrt(composed_gaussian_variance(
      calibrated_gradient_sensitivity(n, bounds), budget, rounds));
}

namespace detail {

/**
 * Shared core: per round, each server releases its (batch or full-data)
 * gradient plus N(0, sigma^2 I); the orchestrator ascends the v_s-weighted
 * sum by eta and projects back onto the C_beta-ball.
 */
inline CoxFitResult run_projected_ascent(const FederationConfig& config,
                                         const std::vector<Server>& servers,
                                         const SgdParams& params,
                                         const RngStream& noise_root,
                                         bool batched) {
  config.validate();
  params.validate();
  if (config.rounds != params.rounds)
    throw std::invalid_argument("config and params disagree on round count");
  if (servers.size() != config.servers.size())
    throw std::invalid_argument("server list does not match configuration");
  const int d = config.dimension;
  for (std::size_t s = 0; s < servers.size(); ++s) {
    if (servers[s].id != static_cast<int>(s))
      throw std::invalid_argument("servers must be listed in id order 0..S-1");
    if (servers[s].data.dimension() != d)
      throw std::invalid_argument("server dimension mismatch");
    if (servers[s].data.size() != config.servers[s].n)
      throw std::invalid_argument("server size does not match configuration");
    servers[s].data.validate(params.bounds);
  }

  const std::vector<double> weights = effective_weights(
      config, batched ? WeightMode::kBetaBatched : WeightMode::kBetaFullData);

  // Materialize each server's per-round views once: K disjoint slices for the
  // batched estimator, or the full dataset reused every round.
  std::vector<std::vector<Dataset>> batches(servers.size());
  std::vector<double> server_sigma(servers.size());
  for (std::size_t s = 0; s < servers.size(); ++s) {
    if (batched) {
      const int b = servers[s].batch_size(params.rounds);
      if (b < 1) throw std::invalid_argument("batch size is zero");
      for (int k = 1; k <= params.rounds; ++k)
        batches[s].push_back(servers[s].batch(k, params.rounds));
      server_sigma[s] = params.noise_scale_multiplier *
                        fdp_gradient_sigma(b, servers[s].budget, params.bounds);
    } else {
      server_sigma[s] = params.noise_scale_multiplier *
                        cdp_gradient_sigma(servers[s].data.size(), servers[s].budget,
                                           params.rounds, params.bounds);
    }
  }

  CoxFitResult result;
  VectorXd beta = VectorXd::Zero(d);
  result.trajectory.push_back(beta);

  const RoundFn round_fn = [&](const Server& server, int round,
                               const std::vector<Message>&, RngStream& rng) {
    const std::size_t s = static_cast<std::size_t>(server.id);
    const Dataset& part = batched ? batches[s][round - 1] : server.data;
    VectorXd g = gradient(part, beta);
    const double sigma = server_sigma[s];
    if (sigma > 0.0)
      for (int j = 0; j < d; ++j) g(j) += sigma * rng.next_normal();
    Message msg;
    msg.kind = MessageKind::kVector;
    msg.vec = std::move(g);
    msg.sigma = sigma;
    return msg;
  };

  const RoundEndFn on_round_end = [&](int, const std::vector<Message>& all) {
    VectorXd update = VectorXd::Zero(d);
    const std::size_t s_count = servers.size();
    for (std::size_t s = 0; s < s_count; ++s)
      update += weights[s] * all[all.size() - s_count + s].vec;
    beta = project_ball(beta + params.step_size * update, params.bounds.c_beta);
    result.trajectory.push_back(beta);
  };

  result.transcript = run_rounds(config, servers, round_fn, noise_root, on_round_end);
  for (const Message& m : result.transcript.messages())
    result.sigmas.push_back(m.sigma);
  result.beta_hat = beta;
  return result;
}

}  // namespace detail

/** Batched federated estimator: round k uses each server's k-th batch. */
inline CoxFitResult run_fdp_cox(const FederationConfig& config,
                                const std::vector<Server>& servers,
                                const SgdParams& params,
                                const RngStream& noise_root) {
  return detail::run_projected_ascent(config, servers, params, noise_root,
                                      /*batched=*/true);
}

/** Fully-interactive federated estimator: full data, composed budget. */
inline CoxFitResult run_fdp_cox_interactive(const FederationConfig& config,
                                            const std::vector<Server>& servers,
                                            const SgdParams& params,
                                            const RngStream& noise_root) {
  return detail::run_projected_ascent(config, servers, params, noise_root,
                                      /*batched=*/false);
}

/** Central estimator: the single-server case of the interactive variant. */
inline CoxFitResult run_cdp_cox(const Dataset& data, const PrivacyBudget& budget,
                                const SgdParams& params,
                                const RngStream& noise_root) {
  FederationConfig config;
  config.servers = {{data.size(), budget}};
  config.rounds = params.rounds;
  config.dimension = data.dimension();
  std::vector<Server> servers(1);
  servers[0].id = 0;
  servers[0].data = data;
  servers[0].budget = budget;
  return run_fdp_cox_interactive(config, servers, params, noise_root);
}

}  // namespace fdpcox
