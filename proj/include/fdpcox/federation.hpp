/**
 * Single-process federation harness.
 *
 * Servers hold their datasets privately; the only objects that cross the
 * server boundary are Messages drawn from a closed schema (noised vector,
 * noised scalar, or noised tree-node list), collected round by round into a
 * Transcript.  The privacy contract is enforced structurally — round
 * callbacks can only return Messages — and checked statistically by the
 * isolation test, which scans transcripts for raw record payloads.
 *
 * Rounds of batched algorithms consume disjoint record ranges: round k of K
 * uses records [(k-1)b, kb) with b = floor(n/K), and the n mod K leftover
 * records are untouched.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "privacy.hpp"
#include "rng.hpp"
#include "survival.hpp"

namespace fdpcox {

/** Size and privacy budget of one participating server. */
struct ServerSpec {
  int n = 0;
  PrivacyBudget budget;
};

/** Shared round structure: who participates, for how many rounds, at what d. */
struct FederationConfig {
  std::vector<ServerSpec> servers;
  int rounds = 1;     // K
  int dimension = 1;  // d
  // Hazard aggregation defaults to the variance-matched weights
  // min(n_s, n_s^2 eps_s^2); this switch restores the batched, d-normalized
  // form used for the coefficient updates.
  bool hazard_weights_use_batched_form = false;

  int server_count() const { return static_cast<int>(servers.size()); }

  int batch_size(int s) const { return servers[s].n / rounds; }

  void validate() const {
    if (servers.empty()) throw std::invalid_argument("no servers configured");
    if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
    for (const auto& s : servers) {
      if (s.n < 1) throw std::invalid_argument("server size must be at least 1");
      s.budget.validate();
    }
  }
};

/** Which effective-size formula weighs each server's contribution. */
enum class WeightMode {
  kBetaBatched,   // min(b_s, b_s^2 eps_s^2 / d), b_s = floor(n_s / K)
  kBetaFullData,  // min(n_s, n_s^2 eps_s^2 / d)
  kHazard,        // min(n_s, n_s^2 eps_s^2), or the batched form on request
};

/**
 * Normalized aggregation weights v_s proportional to each server's effective
 * sample size under the requested mode.
 */
inline std::vector<double> effective_weights(const FederationConfig& config,
                                             WeightMode mode) {
  config.validate();
  const double d = static_cast<double>(config.dimension);
  std::vector<double> w(config.servers.size());
  for (std::size_t s = 0; s < config.servers.size(); ++s) {
    const double eps = config.servers[s].budget.epsilon;
    double size = static_cast<double>(config.servers[s].n);
    bool normalize_by_d = true;
    switch (mode) {
      case WeightMode::kBetaBatched:
        size = static_cast<double>(config.batch_size(static_cast<int>(s)));
        break;
      case WeightMode::kBetaFullData:
        break;
      case WeightMode::kHazard:
        if (config.hazard_weights_use_batched_form)
          size = static_cast<double>(config.batch_size(static_cast<int>(s)));
        else
          normalize_by_d = false;
        break;
    }
    const double scaled = size * size * eps * eps / (normalize_by_d ? d : 1.0);
    w[s] = std::min(size, scaled);
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) throw std::invalid_argument("all effective sizes are zero");
  for (double& v : w) v /= total;
  return w;
}

/** One participant: an id, a private dataset, and a privacy budget. */
struct Server {
  int id = 0;
  Dataset data;
  PrivacyBudget budget;

  int batch_size(int rounds) const { return data.size() / rounds; }

  /** Records [(k-1)b, kb) in insertion order, for 1-based round k. */
  Dataset batch(int round, int rounds) const {
    const int b = batch_size(rounds);
    if (b < 1) throw std::invalid_argument("batch size is zero");
    if (round < 1 || round > rounds) throw std::invalid_argument("round out of range");
    return data.slice((round - 1) * b, round * b);
  }
};

enum class MessageKind { kVector, kScalar, kTreeNodes };

/**
 * The only object a server may release.  Exactly one payload field is
 * meaningful, selected by `kind`; `sigma` records the noise standard
 * deviation that was added before release.
 */
struct Message {
  int round = 0;
  int server = 0;
  MessageKind kind = MessageKind::kScalar;
  VectorXd vec;
  double scalar = 0.0;
  std::vector<double> nodes;
  double sigma = 0.0;
};

/** An append-only log of released messages in round order. */
class Transcript {
 public:
  void append(Message m) { messages_.push_back(std::move(m)); }
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t size() const { return messages_.size(); }

 private:
  std::vector<Message> messages_;
};

/**
 * Isolation check: true if the message's payload reproduces a raw record of
 * `data` — the covariate vector verbatim, or the contiguous field triple
 * (time, event, z_1..z_d).  Noised payloads match with probability zero, so
 * a hit indicates un-privatized data crossing the server boundary.
 */
inline bool message_embeds_record(const Message& msg, const Dataset& data) {
  std::vector<double> flat;
  switch (msg.kind) {
    case MessageKind::kVector:
      flat.assign(msg.vec.data(), msg.vec.data() + msg.vec.size());
      break;
    case MessageKind::kScalar:
      flat.assign(1, msg.scalar);
      break;
    case MessageKind::kTreeNodes:
      flat = msg.nodes;
      break;
  }
  const int d = data.dimension();
  for (int i = 0; i < data.size(); ++i) {
    const auto zi = data.z(i);
    if (msg.kind == MessageKind::kVector && msg.vec.size() == d && msg.vec == zi)
      return true;
    // Contiguous (T, Delta, Z) block anywhere in the flattened payload.
    const int span = 2 + d;
    for (int start = 0; start + span <= static_cast<int>(flat.size()); ++start) {
      if (flat[start] != data.time(i)) continue;
      if (flat[start + 1] != static_cast<double>(data.event(i))) continue;
      bool all = true;
      for (int j = 0; j < d; ++j)
        if (flat[start + 2 + j] != zi(j)) { all = false; break; }
      if (all) return true;
    }
  }
  return false;
}

/**
 * Round callback: sees one server, the 1-based round index, every message
 * released so far (the broadcast state), and a stream dedicated to this
 * (round, server) cell; returns the server's privatized message.
 */
using RoundFn = std::function<Message(const Server&, int round,
                                      const std::vector<Message>& broadcast,
                                      RngStream& rng)>;

/** Called after each round with the complete broadcast state. */
using RoundEndFn = std::function<void(int round, const std::vector<Message>&)>;

/**
 * Execute `config.rounds` rounds over the servers in id order, appending each
 * released message to the broadcast state.  Per-message streams are derived
 * from `root` by (round, server), so any parallel schedule would reproduce
 * the serial transcript bit for bit.
 */
inline Transcript run_rounds(const FederationConfig& config,
                             const std::vector<Server>& servers,
                             const RoundFn& round_fn, const RngStream& root,
                             const RoundEndFn& on_round_end = {}) {
  config.validate();
  if (servers.size() != config.servers.size())
    throw std::invalid_argument("server list does not match configuration");
  Transcript transcript;
  for (int k = 1; k <= config.rounds; ++k) {
    for (const Server& server : servers) {
      RngStream rng = root.child(static_cast<std::uint64_t>(k),
                                 static_cast<std::uint64_t>(server.id));
      Message msg = round_fn(server, k, transcript.messages(), rng);
      msg.round = k;
      msg.server = server.id;
      transcript.append(std::move(msg));
    }
    if (on_round_end) on_round_end(k, transcript.messages());
  }
  return transcript;
}

}  // namespace fdpcox
