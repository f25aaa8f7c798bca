/**
 * Monte-Carlo experiment runner.
 *
 * A Scenario sweeps a grid (cartesian product of the nonempty axis lists)
 * and, per grid point and replication, runs the three-stage pipeline on
 * independent datasets: coefficient fit on one, at-risk probability on a
 * fraction-sized second, hazard estimation on a third.  Metric rows stream
 * out in grid-major, replication-minor order.
 *
 * Replication streams are keyed by (seed, purpose, replication, server) and
 * deliberately NOT by grid point: the same replication re-uses the same
 * record draws and the same noise draws at every grid point, so datasets are
 * nested across the n-axis and noise realizations are shared across the
 * epsilon-axis.  These common random numbers make grid trends far less
 * jittery than independent streams at equal replication counts.
 */
#pragma once

#define FMT_HEADER_ONLY 1
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "breslow.hpp"
#include "datagen.hpp"
#include "fdp_cox.hpp"
#include "federation.hpp"
#include "privacy.hpp"
#include "rng.hpp"
#include "survival.hpp"

namespace fdpcox {

/** Which coefficient estimator the pipeline runs. */
enum class EstimatorKind { kCdp, kFdpBatched, kFdpInteractive };

inline std::string estimator_label(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kCdp: return "cdp";
    case EstimatorKind::kFdpBatched: return "fdp-batched";
    case EstimatorKind::kFdpInteractive: return "fdp-interactive";
  }
  throw std::logic_error("unknown estimator");
}

/**
 * One experiment description.  Every axis is a list; singleton lists pin a
 * value, longer lists are swept, and the grid is their cartesian product.
 */
struct Scenario {
  std::string name = "scenario";
  EstimatorKind estimator = EstimatorKind::kCdp;
  bool fit_beta = true;
  bool fit_hazard = false;
  // Bypass the coefficient fit and hand the true beta0 to the hazard stage.
  bool use_true_beta = false;
  // Draw beta0 ~ N(0, I_d) projected onto the unit ball (per dimension,
  // deterministically from the seed) instead of using `beta0`.
  bool random_beta0 = false;

  VectorXd beta0 = (VectorXd(3) << 0.0, 0.5, 0.8).finished();
  ModelBounds bounds;

  std::vector<int> n_list = {30000};          // per-server sample size
  std::vector<double> epsilon_list = {1.0};
  std::vector<double> delta_list = {0.001};
  std::vector<int> server_list = {1};
  std::vector<int> dimension_list = {3};
  std::vector<double> step_size_list = {0.5};
  // Calibration constants C for the sensitivity-analysis runs: C > 0 rescales
  // the gradient noise as if the sensitivity were C log(n)/n; 0 = calibrated.
  std::vector<double> noise_constant_list = {0.0};
  std::vector<double> censoring_list = {0.3};  // Exp(alpha) censoring rates

  int replications = 200;
  std::uint64_t seed = 1;
  double round_constant = 6.0;       // K = ceil(round_constant log(n_total/d^2))
  double noise_multiplier = 1.0;     // global sigma multiplier (0 = noiseless)
  double p_hat_noise_multiplier = 1.0;
  double p_hat_fraction = 0.1;       // independent p-hat dataset size, as share of n
  double min_p_hat = 0.01;           // floor applied to p-hat before truncation
};

/** One point of the swept grid. */
struct GridPoint {
  int n = 0;
  double epsilon = 1.0;
  double delta = 0.001;
  int servers = 1;
  int dimension = 3;
  double step_size = 0.5;
  double noise_constant = 0.0;
  double censoring_rate = 0.3;
};

/** One metric observation. */
struct ResultRow {
  std::string scenario;
  GridPoint point;
  int replication = 0;
  std::string metric;
  double value = 0.0;
  double runtime_ms = 0.0;  // wall time of the replication; not part of the
                            // canonical CSV, which must be bit-reproducible
};

/** Squared coefficient error ||beta_hat - beta0||_2^2. */
inline double beta_sq_error(const VectorXd& beta_hat, const VectorXd& beta0) {
  if (beta_hat.size() != beta0.size())
    throw std::invalid_argument("dimension mismatch");
  return (beta_hat - beta0).squaredNorm();
}

/**
 * Sup-norm error over the dyadic evaluation grid {m/2^h : m = 0..2^h}.  The
 * estimator is piecewise constant and the target is Lipschitz, so the true
 * sup over [0, 1] exceeds `grid_max` by at most `slack`; both are exposed.
 */
struct SupError {
  double grid_max = 0.0;
  double slack = 0.0;
  double upper() const { return grid_max + slack; }
};

inline SupError hazard_sup_error(const HazardEstimate& estimate,
                                 const CoxModelSpec& spec) {
  SupError err;
  const int leaf_count = 1 << estimate.depth;
  for (int m = 0; m <= leaf_count; ++m) {
    const double t = static_cast<double>(m) / leaf_count;
    err.grid_max = std::max(
        err.grid_max, std::abs(query_hazard(estimate, t) - true_cumulative_hazard(spec, t)));
  }
  // Lipschitz constant of Lambda0 on one dyadic cell.
  const double rate = spec.baseline.tabulated()
                          ? (spec.baseline.knot_value.back() - spec.baseline.knot_value.front())
                          : spec.baseline.constant_rate;
  err.slack = rate / leaf_count;
  return err;
}

inline SupError survival_sup_error(const HazardEstimate& estimate,
                                   const CoxModelSpec& spec) {
  SupError err;
  const int leaf_count = 1 << estimate.depth;
  for (int m = 0; m <= leaf_count; ++m) {
    const double t = static_cast<double>(m) / leaf_count;
    const double truth = std::exp(-true_cumulative_hazard(spec, t));
    err.grid_max =
        std::max(err.grid_max, std::abs(survival_estimate(estimate, t) - truth));
  }
  const double rate = spec.baseline.tabulated()
                          ? (spec.baseline.knot_value.back() - spec.baseline.knot_value.front())
                          : spec.baseline.constant_rate;
  err.slack = rate / leaf_count;  // |S0'| <= rate on [0, 1]
  return err;
}

namespace stream_label {
// Purpose labels for replication streams; the triple (purpose, replication,
// server) fully determines a stream, independent of the grid point.
constexpr std::uint64_t kBetaData = 1;
constexpr std::uint64_t kPhatData = 2;
constexpr std::uint64_t kHazardData = 3;
constexpr std::uint64_t kBetaNoise = 4;
constexpr std::uint64_t kPhatNoise = 5;
constexpr std::uint64_t kHazardNoise = 6;
constexpr std::uint64_t kBeta0 = 7;
}  // namespace stream_label

namespace detail {

/** beta0 for a grid point: configured vector, or seed-derived on the sphere. */
inline VectorXd scenario_beta0(const Scenario& scenario, int d) {
  if (!scenario.random_beta0) {
    if (scenario.beta0.size() != d)
      throw std::invalid_argument("beta0 dimension does not match grid point");
    return scenario.beta0;
  }
  RngStream rng =
      RngStream(scenario.seed, {stream_label::kBeta0}).child(static_cast<std::uint64_t>(d));
  VectorXd b(d);
  for (int j = 0; j < d; ++j) b(j) = rng.next_normal();
  return project_ball(b, 1.0);
}

inline CoxModelSpec point_model(const Scenario& scenario, const GridPoint& p) {
  CoxModelSpec spec;
  spec.beta0 = scenario_beta0(scenario, p.dimension);
  spec.baseline.constant_rate = 1.0;
  spec.censoring_rate = p.censoring_rate;
  spec.covariate_law = CovariateLaw::kUniform;
  spec.validate(scenario.bounds);
  return spec;
}

/** Noise multiplier for the gradient stages at this grid point. */
inline double point_noise_multiplier(const Scenario& scenario, const GridPoint& p) {
  double m = scenario.noise_multiplier;
  if (p.noise_constant > 0.0) {
    const double target = p.noise_constant * std::log(static_cast<double>(p.n)) / p.n;
    m *= target / calibrated_gradient_sensitivity(p.n, scenario.bounds);
  }
  return m;
}

inline FederationConfig point_config(const GridPoint& p, int n_per_server,
                                     int rounds) {
  FederationConfig config;
  config.rounds = rounds;
  config.dimension = p.dimension;
  for (int s = 0; s < p.servers; ++s)
    config.servers.push_back({n_per_server, {p.epsilon, p.delta}});
  return config;
}

inline std::vector<Server> sample_servers(const CoxModelSpec& spec, int n_per_server,
                                          int servers, const PrivacyBudget& budget,
                                          const RngStream& seed_root,
                                          std::uint64_t purpose, int replication) {
  std::vector<Server> out(servers);
  for (int s = 0; s < servers; ++s) {
    out[s].id = s;
    out[s].budget = budget;
    out[s].data = sample_dataset(
        spec, n_per_server,
        seed_root.child(purpose, static_cast<std::uint64_t>(replication),
                        static_cast<std::uint64_t>(s)));
  }
  return out;
}

}  // namespace detail

/**
 * Run one scenario and return its metric rows in deterministic order.
 * Invalid grid points are skipped (and counted via `skipped`, if given).
 */
inline std::vector<ResultRow> run_scenario(const Scenario& scenario,
                                           int* skipped = nullptr) {
  if (scenario.replications < 1)
    throw std::invalid_argument("replications must be at least 1");
  const RngStream seed_root(scenario.seed);
  std::vector<ResultRow> rows;
  // The true at-risk probability depends only on (alpha, d); cache it.
  std::map<std::pair<double, int>, double> p0_cache;

  std::vector<GridPoint> grid;
  for (int n : scenario.n_list)
    for (double eps : scenario.epsilon_list)
      for (double delta : scenario.delta_list)
        for (int servers : scenario.server_list)
          for (int d : scenario.dimension_list)
            for (double eta : scenario.step_size_list)
              for (double c : scenario.noise_constant_list)
                for (double alpha : scenario.censoring_list)
                  grid.push_back({n, eps, delta, servers, d, eta, c, alpha});

  for (const GridPoint& point : grid) {
    try {
      const CoxModelSpec model = detail::point_model(scenario, point);
      const PrivacyBudget budget{point.epsilon, point.delta};
      const long long n_total = static_cast<long long>(point.n) * point.servers;
      const int rounds =
          default_round_count(n_total, point.dimension, scenario.round_constant);
      const double multiplier = detail::point_noise_multiplier(scenario, point);

      double p0 = 0.0;
      if (scenario.fit_hazard) {
        const auto key = std::make_pair(point.censoring_rate, point.dimension);
        auto it = p0_cache.find(key);
        if (it == p0_cache.end())
          it = p0_cache.emplace(key, true_at_risk_probability(model)).first;
        p0 = it->second;
      }

      for (int rep = 0; rep < scenario.replications; ++rep) {
        const auto t_start = std::chrono::steady_clock::now();
        std::vector<ResultRow> rep_rows;

        VectorXd beta_hat;
        if (scenario.use_true_beta) {
          beta_hat = model.beta0;
        } else {
          SgdParams params;
          params.rounds = rounds;
          params.step_size = point.step_size;
          params.bounds = scenario.bounds;
          params.noise_scale_multiplier = multiplier;
          const RngStream noise =
              seed_root.child(stream_label::kBetaNoise, static_cast<std::uint64_t>(rep));
          const std::vector<Server> servers = detail::sample_servers(
              model, point.n, point.servers, budget, seed_root,
              stream_label::kBetaData, rep);
          CoxFitResult fit;
          switch (scenario.estimator) {
            case EstimatorKind::kCdp:
              if (point.servers != 1)
                throw std::invalid_argument("central estimator requires one server");
              fit = run_cdp_cox(servers[0].data, budget, params, noise);
              break;
            case EstimatorKind::kFdpBatched:
              fit = run_fdp_cox(detail::point_config(point, point.n, rounds), servers,
                                params, noise);
              break;
            case EstimatorKind::kFdpInteractive:
              fit = run_fdp_cox_interactive(detail::point_config(point, point.n, rounds),
                                            servers, params, noise);
              break;
          }
          beta_hat = fit.beta_hat;
          if (scenario.fit_beta)
            rep_rows.push_back({scenario.name, point, rep, "beta_sq_error",
                                beta_sq_error(beta_hat, model.beta0), 0.0});
        }

        if (scenario.fit_hazard) {
          // Independent at-risk stage on a fraction-sized dataset.
          const int n_p = std::max(
              1, static_cast<int>(std::llround(point.n * scenario.p_hat_fraction)));
          const std::vector<Server> p_servers = detail::sample_servers(
              model, n_p, point.servers, budget, seed_root, stream_label::kPhatData,
              rep);
          const AtRiskFit p_fit = estimate_at_risk_probability(
              detail::point_config(point, n_p, 1), p_servers,
              seed_root.child(stream_label::kPhatNoise, static_cast<std::uint64_t>(rep)),
              scenario.noise_multiplier * scenario.p_hat_noise_multiplier);
          const double p_used = std::max(p_fit.p_hat, scenario.min_p_hat);

          // Independent hazard stage on a full-size dataset.
          const std::vector<Server> h_servers = detail::sample_servers(
              model, point.n, point.servers, budget, seed_root,
              stream_label::kHazardData, rep);
          const HazardFit h_fit = estimate_hazard(
              detail::point_config(point, point.n, rounds), h_servers, beta_hat,
              p_used, scenario.bounds.c_z,
              seed_root.child(stream_label::kHazardNoise, static_cast<std::uint64_t>(rep)),
              scenario.noise_multiplier);

          rep_rows.push_back({scenario.name, point, rep, "hazard_sup_error",
                              hazard_sup_error(h_fit.estimate, model).grid_max, 0.0});
          rep_rows.push_back({scenario.name, point, rep, "survival_sup_error",
                              survival_sup_error(h_fit.estimate, model).grid_max, 0.0});
          rep_rows.push_back({scenario.name, point, rep, "p_hat_error",
                              std::abs(p_fit.p_hat - p0), 0.0});
        }

        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t_start)
                              .count();
        for (auto& row : rep_rows) {
          row.runtime_ms = ms;
          rows.push_back(std::move(row));
        }
      }
    } catch (const std::exception&) {
      if (skipped) ++*skipped;
      continue;
    }
  }
  return rows;
}

/** RFC-4180-style field quoting (only when the field needs it). */
inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

/**
 * Write rows as CSV in the order given.  Runtime is excluded by default so
 * that equal (scenario, seed) runs emit byte-identical files.
 */
inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path,
                     bool include_runtime = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "scenario,n,epsilon,delta,servers,dimension,step_size,noise_constant,"
         "censoring_rate,replication,metric,value";
  if (include_runtime) out << ",runtime_ms";
  out << "\n";
  for (const ResultRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", csv_quote(r.scenario),
                       r.point.n, r.point.epsilon, r.point.delta, r.point.servers,
                       r.point.dimension, r.point.step_size, r.point.noise_constant,
                       r.point.censoring_rate, r.replication, csv_quote(r.metric),
                       r.value);
    if (include_runtime) out << fmt::format(",{}", r.runtime_ms);
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

/** The seven-point grids of the simulation study. */
inline const std::vector<double>& default_epsilon_grid() {
  static const std::vector<double> grid = {0.75, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  return grid;
}

inline const std::vector<int>& default_n_grid() {
  static const std::vector<int> grid = {20000, 25000, 30000, 35000,
                                        40000, 45000, 50000};
  return grid;
}

inline std::vector<std::string> preset_names() {
  return {"cdp-beta-grid",     "cdp-hazard-grid", "dimension-study",
          "noise-multiplier-study", "step-size-study", "censoring-study",
          "fdp-batched",       "fdp-interactive"};
}

/** Construct one of the named study presets at full scale. */
inline Scenario scenario_preset(const std::string& name) {
  Scenario s;
  s.name = name;
  s.epsilon_list = default_epsilon_grid();
  if (name == "cdp-beta-grid") {
    s.n_list = default_n_grid();
  } else if (name == "cdp-hazard-grid") {
    s.n_list = default_n_grid();
    s.fit_hazard = true;
  } else if (name == "dimension-study") {
    s.dimension_list = {2, 3, 4, 5, 6, 7, 8};
    s.random_beta0 = true;
  } else if (name == "noise-multiplier-study") {
    s.noise_constant_list = {0.005, 0.0075, 0.01, 0.0125, 0.015, 0.0175, 0.02};
  } else if (name == "step-size-study") {
    s.step_size_list = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  } else if (name == "censoring-study") {
    s.censoring_list = {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3};
  } else if (name == "fdp-batched") {
    s.estimator = EstimatorKind::kFdpBatched;
    s.n_list = {25000};
    s.server_list = {2, 4, 8, 12, 16, 20};
    s.fit_hazard = true;
  } else if (name == "fdp-interactive") {
    s.estimator = EstimatorKind::kFdpInteractive;
    s.n_list = {10000};
    s.server_list = {2, 3, 4, 5, 6, 7, 8};
    s.fit_hazard = true;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return s;
}

/**
 * Desk-scale adjustment: multiply every n by `scale` and shrink the
 * replication count proportionally (both floored at sane minimums).
 */
inline Scenario apply_scale(Scenario s, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  for (int& n : s.n_list)
    n = std::max(16, static_cast<int>(std::llround(n * scale)));
  s.replications =
      std::max(1, static_cast<int>(std::llround(s.replications * scale)));
  return s;
}

}  // namespace fdpcox
