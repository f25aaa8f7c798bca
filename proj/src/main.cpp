/**
 * Command-line driver.
 *
 *   simulate           draw a survival dataset and write it as CSV
 *   fit-beta           run a private coefficient estimator on dataset files
 *   fit-hazard         run the private hazard + at-risk pipeline
 *   audit-sensitivity  empirical gradient-sensitivity audit, CSV output
 *   experiment         run a preset or JSON-configured scenario grid
 */
#define FMT_HEADER_ONLY 1
#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fdpcox/breslow.hpp"
#include "fdpcox/datagen.hpp"
#include "fdpcox/experiments.hpp"
#include "fdpcox/fdp_cox.hpp"
#include "fdpcox/federation.hpp"
#include "fdpcox/io.hpp"
#include "fdpcox/privacy.hpp"
#include "fdpcox/rng.hpp"
#include "fdpcox/sensitivity_audit.hpp"
#include "fdpcox/survival.hpp"

namespace {

fdpcox::VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::string field;
  std::stringstream ss(text);
  while (std::getline(ss, field, ',')) values.push_back(std::stod(field));
  if (values.empty()) throw CLI::ValidationError("expected comma-separated numbers");
  return Eigen::Map<const fdpcox::VectorXd>(values.data(),
                                            static_cast<int>(values.size()));
}

/** Load one dataset per server and pair it with the shared budget. */
std::vector<fdpcox::Server> load_servers(const std::vector<std::string>& paths,
                                         const fdpcox::PrivacyBudget& budget) {
  std::vector<fdpcox::Server> servers;
  for (std::size_t s = 0; s < paths.size(); ++s) {
    fdpcox::Server server;
    server.id = static_cast<int>(s);
    server.data = fdpcox::read_dataset_csv(paths[s]);
    server.budget = budget;
    servers.push_back(std::move(server));
  }
  return servers;
}

fdpcox::FederationConfig config_for(const std::vector<fdpcox::Server>& servers,
                                    int rounds, int dimension) {
  fdpcox::FederationConfig config;
  config.rounds = rounds;
  config.dimension = dimension;
  for (const auto& s : servers) config.servers.push_back({s.data.size(), s.budget});
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated differentially private Cox regression toolkit"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "Draw a survival dataset");
  int sim_n = 1000;
  std::uint64_t sim_seed = 1;
  double sim_alpha = 0.3;
  std::string sim_beta0 = "0,0.5,0.8";
  std::string sim_out = "dataset.csv";
  simulate->add_option("--n", sim_n, "Number of subjects")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--censoring-rate", sim_alpha, "Exponential censoring rate")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--beta0", sim_beta0, "True coefficients, comma-separated");
  simulate->add_option("--out", sim_out, "Output CSV path")->required();

  // ---- fit-beta ----
  auto* fit_beta = app.add_subcommand("fit-beta", "Private coefficient estimation");
  std::vector<std::string> fb_data;
  std::string fb_estimator = "cdp";
  double fb_eps = 1.0, fb_delta = 0.001, fb_eta = 0.5, fb_cz = 1.0, fb_cbeta = 1.0;
  double fb_multiplier = 1.0;
  int fb_rounds = 0;
  std::uint64_t fb_seed = 1;
  std::string fb_transcript;
  fit_beta->add_option("--data", fb_data, "Dataset CSV, one per server")
      ->required()
      ->check(CLI::ExistingFile);
  fit_beta->add_option("--estimator", fb_estimator,
                       "cdp | fdp-batched | fdp-interactive");
  fit_beta->add_option("--epsilon", fb_eps, "Per-server epsilon")
      ->check(CLI::PositiveNumber);
  fit_beta->add_option("--delta", fb_delta, "Per-server delta");
  fit_beta->add_option("--rounds", fb_rounds, "Round count K (0 = automatic)");
  fit_beta->add_option("--step-size", fb_eta, "Ascent step size");
  fit_beta->add_option("--c-z", fb_cz, "Covariate norm bound");
  fit_beta->add_option("--c-beta", fb_cbeta, "Coefficient norm bound");
  fit_beta->add_option("--noise-multiplier", fb_multiplier,
                       "Scales every noise sigma (0 = noiseless)");
  fit_beta->add_option("--seed", fb_seed, "RNG seed");
  fit_beta->add_option("--out-transcript", fb_transcript,
                       "Write released messages as JSON lines");

  // ---- fit-hazard ----
  auto* fit_hazard = app.add_subcommand("fit-hazard", "Private hazard estimation");
  std::vector<std::string> fh_data, fh_pdata;
  std::string fh_beta = "0,0,0";
  double fh_eps = 1.0, fh_delta = 0.001, fh_cz = 1.0, fh_phat = 0.0;
  double fh_multiplier = 1.0, fh_min_phat = 0.01;
  std::uint64_t fh_seed = 1;
  std::string fh_out = "hazard.csv";
  std::string fh_transcript;
  fit_hazard->add_option("--data", fh_data, "Dataset CSV, one per server")
      ->required()
      ->check(CLI::ExistingFile);
  fit_hazard->add_option("--p-data", fh_pdata,
                         "Independent datasets for the at-risk estimate")
      ->check(CLI::ExistingFile);
  fit_hazard->add_option("--beta-hat", fh_beta, "Coefficients, comma-separated");
  fit_hazard->add_option("--p-hat", fh_phat,
                         "At-risk probability (skips the private estimate)");
  fit_hazard->add_option("--epsilon", fh_eps, "Per-server epsilon")
      ->check(CLI::PositiveNumber);
  fit_hazard->add_option("--delta", fh_delta, "Per-server delta");
  fit_hazard->add_option("--c-z", fh_cz, "Covariate norm bound");
  fit_hazard->add_option("--min-p-hat", fh_min_phat,
                         "Floor applied to the estimated p-hat");
  fit_hazard->add_option("--noise-multiplier", fh_multiplier,
                         "Scales every noise sigma (0 = noiseless)");
  fit_hazard->add_option("--seed", fh_seed, "RNG seed");
  fit_hazard->add_option("--out", fh_out, "Hazard curve CSV path")->required();
  fit_hazard->add_option("--out-transcript", fh_transcript,
                         "Write released messages as JSON lines");

  // ---- audit-sensitivity ----
  auto* audit = app.add_subcommand("audit-sensitivity",
                                   "Empirical gradient-sensitivity audit");
  std::vector<int> au_n = {5, 10, 50, 200};
  int au_trials = 1000, au_d = 3;
  double au_cz = 1.0, au_cbeta = 1.0;
  std::uint64_t au_seed = 1;
  std::string au_out = "audit.csv";
  audit->add_option("--n", au_n, "Sample sizes to audit");
  audit->add_option("--trials", au_trials, "Random neighbor pairs per cell");
  audit->add_option("--dimension", au_d, "Covariate dimension");
  audit->add_option("--c-z", au_cz, "Covariate norm bound");
  audit->add_option("--c-beta", au_cbeta, "Coefficient norm bound");
  audit->add_option("--seed", au_seed, "RNG seed");
  audit->add_option("--out", au_out, "Output CSV path")->required();

  // ---- experiment ----
  auto* experiment = app.add_subcommand("experiment", "Run a scenario grid");
  std::string ex_preset, ex_config, ex_out = "results.csv";
  double ex_scale = 0.1;
  std::uint64_t ex_seed = 0;
  bool ex_list = false, ex_runtime = false;
  experiment->add_option("--preset", ex_preset, "Preset scenario name");
  experiment->add_option("--config", ex_config, "JSON scenario config")
      ->check(CLI::ExistingFile);
  experiment->add_option("--scale", ex_scale,
                         "Multiplies sample sizes and the replication count");
  experiment->add_option("--seed", ex_seed, "Override the scenario seed");
  experiment->add_option("--out", ex_out, "Output CSV path")->required();
  experiment->add_flag("--list-presets", ex_list, "List preset names and exit");
  experiment->add_flag("--include-runtime", ex_runtime,
                       "Append per-replication wall time (breaks byte identity)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      fdpcox::CoxModelSpec spec;
      spec.beta0 = parse_vector(sim_beta0);
      spec.censoring_rate = sim_alpha;
      const fdpcox::Dataset data =
          fdpcox::sample_dataset(spec, sim_n, fdpcox::RngStream(sim_seed));
      fdpcox::write_dataset_csv(data, sim_out);
      fmt::print("wrote {} records (d = {}) to {}\n", data.size(), data.dimension(),
                 sim_out);
    } else if (fit_beta->parsed()) {
      const fdpcox::PrivacyBudget budget{fb_eps, fb_delta};
      const auto servers = load_servers(fb_data, budget);
      const int d = servers[0].data.dimension();
      long long n_total = 0;
      for (const auto& s : servers) n_total += s.data.size();
      const int rounds =
          fb_rounds > 0 ? fb_rounds : fdpcox::default_round_count(n_total, d);
      fdpcox::SgdParams params;
      params.rounds = rounds;
      params.step_size = fb_eta;
      params.bounds = {fb_cz, fb_cbeta};
      params.noise_scale_multiplier = fb_multiplier;
      const auto config = config_for(servers, rounds, d);
      const fdpcox::RngStream noise(fb_seed);
      fdpcox::CoxFitResult fit;
      const auto kind = fdpcox::estimator_from_label(fb_estimator);
      if (kind == fdpcox::EstimatorKind::kCdp) {
        if (servers.size() != 1)
          throw std::invalid_argument("cdp estimator takes exactly one dataset");
        fit = fdpcox::run_cdp_cox(servers[0].data, budget, params, noise);
      } else if (kind == fdpcox::EstimatorKind::kFdpBatched) {
        fit = fdpcox::run_fdp_cox(config, servers, params, noise);
      } else {
        fit = fdpcox::run_fdp_cox_interactive(config, servers, params, noise);
      }
      if (!fb_transcript.empty())
        fdpcox::write_transcript_jsonl(fit.transcript, fb_transcript);
      nlohmann::json out;
      out["beta_hat"] = std::vector<double>(
          fit.beta_hat.data(), fit.beta_hat.data() + fit.beta_hat.size());
      out["rounds"] = rounds;
      out["messages"] = fit.transcript.size();
      fmt::print("{}\n", out.dump());
    } else if (fit_hazard->parsed()) {
      const fdpcox::PrivacyBudget budget{fh_eps, fh_delta};
      const auto servers = load_servers(fh_data, budget);
      const auto config = config_for(servers, 1, servers[0].data.dimension());
      const fdpcox::RngStream root(fh_seed);
      double p_hat = fh_phat;
      fdpcox::Transcript transcript;
      if (p_hat <= 0.0) {
        if (fh_pdata.empty())
          throw std::invalid_argument("provide --p-hat or --p-data files");
        const auto p_servers = load_servers(fh_pdata, budget);
        const auto p_config = config_for(p_servers, 1, p_servers[0].data.dimension());
        const auto p_fit = fdpcox::estimate_at_risk_probability(
            p_config, p_servers, root.child(1), fh_multiplier);
        p_hat = p_fit.p_hat;
        for (const auto& msg : p_fit.transcript.messages()) transcript.append(msg);
      }
      const double p_used = std::max(p_hat, fh_min_phat);
      const auto fit =
          fdpcox::estimate_hazard(config, servers, parse_vector(fh_beta), p_used,
                                  fh_cz, root.child(2), fh_multiplier);
      for (const auto& msg : fit.transcript.messages()) transcript.append(msg);
      fdpcox::write_hazard_csv(fdpcox::hazard_curve(fit.estimate), fh_out);
      if (!fh_transcript.empty())
        fdpcox::write_transcript_jsonl(transcript, fh_transcript);
      fmt::print("p_hat = {}, tree depth = {}, wrote {}\n", p_hat,
                 fit.estimate.depth, fh_out);
    } else if (audit->parsed()) {
      const fdpcox::ModelBounds bounds{au_cz, au_cbeta};
      std::vector<fdpcox::SensitivityAuditRow> rows;
      for (const auto c :
           {fdpcox::NeighborCase::kCensoringOnly, fdpcox::NeighborCase::kCovariateOnly,
            fdpcox::NeighborCase::kTimeOnly, fdpcox::NeighborCase::kFullTriple}) {
        for (int n : au_n)
          rows.push_back(
              fdpcox::empirical_sensitivity(n, au_d, c, au_trials, au_seed, bounds));
      }
      fdpcox::write_audit_csv(rows, au_out);
      fmt::print("wrote {} audit rows to {}\n", rows.size(), au_out);
    } else if (experiment->parsed()) {
      if (ex_list) {
        for (const auto& name : fdpcox::preset_names()) fmt::print("{}\n", name);
        return 0;
      }
      fdpcox::Scenario scenario;
      if (!ex_config.empty())
        scenario = fdpcox::load_scenario(ex_config);
      else if (!ex_preset.empty())
        scenario = fdpcox::scenario_preset(ex_preset);
      else
        throw std::invalid_argument("provide --preset or --config");
      scenario = fdpcox::apply_scale(scenario, ex_scale);
      if (ex_seed != 0) scenario.seed = ex_seed;
      int skipped = 0;
      const auto rows = fdpcox::run_scenario(scenario, &skipped);
      fdpcox::emit_csv(rows, ex_out, ex_runtime);
      fmt::print("wrote {} rows to {}{}\n", rows.size(), ex_out,
                 skipped ? fmt::format(" ({} grid points skipped)", skipped) : "");
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
