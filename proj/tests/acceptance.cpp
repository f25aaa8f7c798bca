/**
 * Release checks for the federated private Cox pipeline.  Each criterion
 * prints exactly one line:
 *
 *   criterion  k [PASS|FAIL] <name> (<elapsed>s, limit <limit>s)[ - detail]
 *
 * Run with no arguments to execute all ten, or pass a single index (1-10)
 * to run one.  The exit status is the number of failed criteria.
 */
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fdpcox/breslow.hpp"
#include "fdpcox/datagen.hpp"
#include "fdpcox/experiments.hpp"
#include "fdpcox/fdp_cox.hpp"
#include "fdpcox/federation.hpp"
#include "fdpcox/privacy.hpp"
#include "fdpcox/rng.hpp"
#include "fdpcox/sensitivity_audit.hpp"
#include "fdpcox/survival.hpp"

namespace {

using namespace fdpcox;

constexpr std::uint64_t kSeed = 20260814;

struct Outcome {
  bool pass = true;
  std::string detail;
  int noted = 0;
};

void fail(Outcome& o, const std::string& message) {
  o.pass = false;
  if (o.noted < 3) {
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += message;
  } else if (o.noted == 3) {
    o.detail += "; ...";
  }
  ++o.noted;
}

void note(Outcome& o, const std::string& message) {
  if (o.pass) o.detail = message;
}

/** Covariates in the c_z ball, times in (0, 1], Bernoulli(event_prob) events. */
Dataset random_dataset(RngStream& rng, int n, int d, double event_prob,
                       double c_z) {
  Dataset data(d);
  for (int i = 0; i < n; ++i) {
    const double t = rng.next_uniform(1e-3, 1.0);
    const int ev = rng.next_double() < event_prob ? 1 : 0;
    VectorXd z(d);
    for (int j = 0; j < d; ++j) z[j] = rng.next_uniform(-1.0, 1.0);
    data.append(t, ev, project_ball(z, c_z));
  }
  data.finalize();
  return data;
}

VectorXd random_beta(RngStream& rng, int d, double radius) {
  VectorXd beta(d);
  for (int j = 0; j < d; ++j) beta[j] = rng.next_uniform(-radius, radius);
  return project_ball(beta, radius);
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  LineFit fit;
  const double vx = n * sxx - sx * sx;
  const double cov = n * sxy - sx * sy;
  const double vy = n * syy - sy * sy;
  fit.slope = cov / vx;
  fit.r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
  return fit;
}

int violations_nonincreasing(const std::vector<double>& v) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i] * (1.0 + 1e-9)) ++count;
  return count;
}

int violations_nondecreasing(const std::vector<double>& v) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] < v[i] * (1.0 - 1e-9)) ++count;
  return count;
}

/** Per-axis means of one metric, in ascending axis order. */
std::vector<double> mean_series(const std::vector<ResultRow>& rows,
                                const std::string& metric,
                                const std::function<double(const GridPoint&)>& axis,
                                const std::function<bool(const GridPoint&)>& keep) {
  std::map<double, std::pair<double, int>> acc;
  for (const ResultRow& row : rows) {
    if (row.metric != metric || !keep(row.point)) continue;
    auto& cell = acc[axis(row.point)];
    cell.first += row.value;
    cell.second += 1;
  }
  std::vector<double> means;
  means.reserve(acc.size());
  for (const auto& [key, cell] : acc) means.push_back(cell.first / cell.second);
  return means;
}

// --- 1: likelihood calculus ------------------------------------------------

Outcome criterion_one() {
  Outcome o;
  RngStream root(kSeed, {1});
  const ModelBounds bounds;
  const double step = 1e-5;
  double worst_grad = 0.0;
  double worst_hess = 0.0;
  for (int i = 0; i < 100; ++i) {
    RngStream s = root.child(static_cast<std::uint64_t>(i + 1));
    const int n = 2 + static_cast<int>(s.next_u64() % 49);
    const int d = 1 + static_cast<int>(s.next_u64() % 5);
    const Dataset data = random_dataset(s, n, d, 0.7, bounds.c_z);
    const VectorXd beta = random_beta(s, d, bounds.c_beta);

    const VectorXd grad = gradient(data, beta);
    VectorXd grad_fd(d);
    for (int j = 0; j < d; ++j) {
      VectorXd hi = beta, lo = beta;
      hi[j] += step;
      lo[j] -= step;
      grad_fd[j] = (partial_log_likelihood(data, hi) -
                    partial_log_likelihood(data, lo)) /
                   (2.0 * step);
    }
    worst_grad = std::max(
        worst_grad, (grad - grad_fd).norm() / std::max(1.0, grad.norm()));

    // hessian() returns the positive-semidefinite information matrix, i.e.
    // the negated second derivative of the log likelihood.
    const MatrixXd info = hessian(data, beta);
    MatrixXd second(d, d);
    for (int j = 0; j < d; ++j) {
      VectorXd hi = beta, lo = beta;
      hi[j] += step;
      lo[j] -= step;
      second.col(j) = (gradient(data, hi) - gradient(data, lo)) / (2.0 * step);
    }
    worst_hess = std::max(
        worst_hess, (second + info).norm() / std::max(1.0, info.norm()));
  }
  if (worst_grad > 1e-6)
    fail(o, fmt::format("gradient gap {:.2e} exceeds 1e-6", worst_grad));
  if (worst_hess > 1e-5)
    fail(o, fmt::format("hessian gap {:.2e} exceeds 1e-5", worst_hess));
  note(o, fmt::format("max relative gaps {:.1e} / {:.1e}", worst_grad, worst_hess));
  return o;
}

// --- 2: sensitivity audit --------------------------------------------------

Outcome criterion_two() {
  Outcome o;
  const ModelBounds bounds;
  const NeighborCase cases[] = {NeighborCase::kCensoringOnly,
                                NeighborCase::kCovariateOnly,
                                NeighborCase::kTimeOnly,
                                NeighborCase::kFullTriple};
  for (int n : {5, 10, 50, 200}) {
    for (NeighborCase c : cases) {
      const SensitivityAuditRow row =
          empirical_sensitivity(n, 3, c, 1000, kSeed, bounds);
      if (row.max_observed > row.bound)
        fail(o, fmt::format("{} n={} observed {:.4g} above bound {:.4g}",
                            neighbor_case_label(c), n, row.max_observed,
                            row.bound));
      if (row.lower_witness > row.bound)
        fail(o, fmt::format("{} n={} witness above bound",
                            neighbor_case_label(c), n));
      if (c == NeighborCase::kCensoringOnly &&
          std::abs(row.lower_witness - 2.0 / n) > 1e-12)
        fail(o, fmt::format("censoring witness at n={} is {:.17g}, want 2/n", n,
                            row.lower_witness));
    }
  }
  // The richer witnesses must grow like log(n)/n: witness*n regressed on
  // log(n) has positive slope with a strong linear fit.
  const std::vector<int> growth_n = {10, 20, 50, 100, 200, 500, 1000, 2000};
  std::string slopes;
  for (NeighborCase c : {NeighborCase::kCovariateOnly, NeighborCase::kTimeOnly,
                         NeighborCase::kFullTriple}) {
    std::vector<double> xs, ys;
    for (int n : growth_n) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(case_witness(n, 3, c, bounds) * n);
    }
    const LineFit fit = least_squares(xs, ys);
    if (!(fit.slope > 0.0) || !(fit.r2 > 0.9))
      fail(o, fmt::format("{} witness growth slope {:.3f}, R2 {:.3f}",
                          neighbor_case_label(c), fit.slope, fit.r2));
    if (!slopes.empty()) slopes += ", ";
    slopes += fmt::format("{:.2f}", fit.slope);
  }
  note(o, "witness growth slopes " + slopes);
  return o;
}

// --- 3: accountant round trips ----------------------------------------------

Outcome criterion_three() {
  Outcome o;
  const ModelBounds bounds;
  const double eps_list[] = {0.3, 0.75, 1.0, 3.0, 6.0};
  const double delta_list[] = {1e-2, 1e-3};
  const std::pair<int, int> kn_list[] = {
      {1, 50}, {5, 500}, {17, 5000}, {38, 20000}, {64, 100000}};
  int combos = 0;
  double worst = -1.0;
  for (double eps : eps_list) {
    for (double delta : delta_list) {
      for (const auto& [rounds, n] : kn_list) {
        ++combos;
        const PrivacyBudget budget{eps, delta};
        const double alpha = 2.0 * std::log(1.0 / delta) / eps + 1.0;

        // The two composed mechanisms reuse their records every round, so the
        // K-fold accountant must certify the full budget: per-server for the
        // interactive federated fit, whole-data for the central one.
        const auto certify = [&](int size) {
          const double sens = calibrated_gradient_sensitivity(size, bounds);
          const double sigma = cdp_gradient_sigma(size, budget, rounds, bounds);
          RdpLedger ledger;
          ledger.alpha = alpha;
          for (int k = 0; k < rounds; ++k)
            ledger = rdp_compose(ledger, rdp_gaussian(alpha, sens, sigma));
          return rdp_to_dp(ledger, delta).epsilon;
        };
        const double certified_server = certify(std::max(2, n / 4));
        const double certified_central = certify(n);
        worst = std::max(worst,
                         std::max(certified_server, certified_central) - eps);

        // The per-batch release is calibrated directly; it must dominate the
        // classical calibration at the analytic sensitivity bound.
        const int b = n / rounds;
        const double sigma_b = fdp_gradient_sigma(b, budget, bounds);
        const double floor_b = gaussian_sigma(
            grad_sensitivity_bound(b, bounds, NeighborCase::kFullTriple).value,
            budget);
        if (sigma_b < floor_b)
          fail(o, fmt::format("per-batch sigma below the analytic floor at "
                              "b={}, eps={}, delta={}",
                              b, eps, delta));
      }
    }
  }
  if (worst > 1e-9)
    fail(o, fmt::format("certified epsilon exceeds the target by {:.3e}", worst));
  note(o, fmt::format("{} configurations, worst slack {:+.1e}", combos, worst));
  return o;
}

// --- 4: tree exactness -----------------------------------------------------

Outcome criterion_four() {
  Outcome o;
  RngStream root(kSeed, {4});
  const PrivacyBudget budget{1.0, 1e-3};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    RngStream s = root.child(static_cast<std::uint64_t>(i + 1));
    const int n = 2 + static_cast<int>(s.next_u64() % 199);
    const int h = 1 + static_cast<int>(s.next_u64() % 8);
    const int d = 1 + static_cast<int>(s.next_u64() % 3);
    const Dataset data = random_dataset(s, n, d, 0.7, 1.0);
    const VectorXd beta = random_beta(s, d, 1.0);
    const double p_hat = s.next_uniform(0.2, 0.9);

    const HazardTree tree =
        build_private_tree(data, budget, beta, p_hat, h, 1.0, s.child(99), 0.0);
    const double c = truncation_constant(beta, p_hat, 1.0);
    const std::vector<double> leaves = breslow_increments(data, beta, c, h);
    HazardEstimate estimate;
    estimate.depth = h;
    estimate.trees = {tree};
    estimate.weights = {1.0};
    double prefix = 0.0;
    const int leaf_count = 1 << h;
    for (int j = 0; j <= leaf_count; ++j) {
      const double t = static_cast<double>(j) / leaf_count;
      worst = std::max(worst, std::abs(query_hazard(estimate, t) - prefix));
      if (j < leaf_count) prefix += leaves[j];
    }
  }
  if (worst > 1e-12)
    fail(o, fmt::format("dyadic query drifts from leaf prefix sums by {:.2e}",
                        worst));

  // Untruncated zero-coefficient case: singleton leaves reduce the tree to
  // the Nelson-Aalen estimator.
  const int n = 40;
  const int h = 6;
  Dataset na(1);
  for (int i = 0; i < n; ++i) {
    VectorXd z(1);
    z[0] = 0.25;
    na.append((i + 0.5) / (1 << h), i % 3 == 0 ? 0 : 1, z);
  }
  na.finalize();
  const VectorXd zero = VectorXd::Zero(1);
  const HazardTree tree =
      build_private_tree(na, budget, zero, 1e-9, h, 1.0, root.child(777), 0.0);
  HazardEstimate estimate;
  estimate.depth = h;
  estimate.trees = {tree};
  estimate.weights = {1.0};
  double worst_na = 0.0;
  for (int j = 0; j <= (1 << h); ++j) {
    const double t = static_cast<double>(j) / (1 << h);
    worst_na =
        std::max(worst_na, std::abs(query_hazard(estimate, t) - nelson_aalen(na, t)));
  }
  if (worst_na > 1e-12)
    fail(o, fmt::format("Nelson-Aalen gap {:.2e}", worst_na));
  note(o, fmt::format("max gaps {:.1e} (prefix sums), {:.1e} (Nelson-Aalen)",
                      worst, worst_na));
  return o;
}

// --- 5: study table reproduction --------------------------------------------

Outcome criterion_five() {
  Outcome o;
  const int draws = 1000000;
  CoxModelSpec spec;
  spec.beta0 = (VectorXd(3) << 0.0, 0.5, 0.8).finished();

  const RngStream root(kSeed, {5});
  double share_censored = -1.0;
  int idx = 0;
  for (const auto& [alpha, target] :
       std::vector<std::pair<double, double>>{{0.3, 0.273}, {0.9, 0.150}}) {
    spec.censoring_rate = alpha;
    const Dataset sample =
        sample_dataset(spec, draws, root.child(static_cast<std::uint64_t>(++idx)));
    long long at_horizon = 0;
    long long early = 0;
    long long early_censored = 0;
    for (int i = 0; i < sample.size(); ++i) {
      if (sample.time(i) >= 1.0) {
        ++at_horizon;
      } else {
        ++early;
        if (sample.event(i) == 0) ++early_censored;
      }
    }
    const double p_horizon = static_cast<double>(at_horizon) / draws;
    if (std::abs(p_horizon - target) > 0.005)
      fail(o, fmt::format("P(at risk at 1) = {:.4f} at alpha={}, want {} +/- 0.005",
                          p_horizon, alpha, target));
    if (alpha == 0.3) {
      share_censored = static_cast<double>(early_censored) / early;
      if (std::abs(share_censored - 0.229) > 0.005)
        fail(o, fmt::format(
                    "P(censored | early exit) = {:.4f} at alpha=0.3, want 0.229",
                    share_censored));
    }
  }
  note(o, fmt::format("censored-share at alpha=0.3 is {:.4f}", share_censored));
  return o;
}

// --- 6: noise-formula fidelity ----------------------------------------------

Outcome criterion_six() {
  Outcome o;
  RngStream root(kSeed, {6});
  const ModelBounds bounds;
  double worst = 0.0;
  const auto check = [&](double got, double expect, const char* what, int cfg) {
    const double rel = std::abs(got - expect) / expect;
    worst = std::max(worst, rel);
    if (rel > 1e-12)
      fail(o, fmt::format("config {}: {} sigma off by {:.2e} relative", cfg,
                          what, rel));
  };
  for (int i = 0; i < 20; ++i) {
    RngStream s = root.child(static_cast<std::uint64_t>(i + 1));
    const int server_count = 1 + static_cast<int>(s.next_u64() % 4);
    const int d = 1 + static_cast<int>(s.next_u64() % 4);
    const int rounds = 2 + static_cast<int>(s.next_u64() % 15);
    const double eps = s.next_uniform(0.2, 5.0);
    const double delta = std::pow(10.0, -s.next_uniform(2.0, 5.0));
    const double mult = s.next_uniform(0.5, 2.0);
    const PrivacyBudget budget{eps, delta};

    FederationConfig config;
    config.rounds = rounds;
    config.dimension = d;
    std::vector<Server> fleet(server_count);
    for (int sv = 0; sv < server_count; ++sv) {
      const int n_s = 60 + static_cast<int>(s.next_u64() % 400);
      fleet[sv].id = sv;
      fleet[sv].budget = budget;
      fleet[sv].data = random_dataset(s, n_s, d, 0.7, bounds.c_z);
      config.servers.push_back({n_s, budget});
    }
    SgdParams params;
    params.rounds = rounds;
    params.bounds = bounds;
    params.noise_scale_multiplier = mult;

    const CoxFitResult batched = run_fdp_cox(config, fleet, params, s.child(101));
    for (const Message& m : batched.transcript.messages())
      check(m.sigma,
            mult * fdp_gradient_sigma(config.batch_size(m.server), budget, bounds),
            "per-batch gradient", i);

    const CoxFitResult interactive =
        run_fdp_cox_interactive(config, fleet, params, s.child(102));
    for (const Message& m : interactive.transcript.messages())
      check(m.sigma,
            mult * cdp_gradient_sigma(config.servers[m.server].n, budget, rounds,
                                      bounds),
            "composed gradient", i);

    const CoxFitResult central =
        run_cdp_cox(fleet[0].data, budget, params, s.child(103));
    for (const Message& m : central.transcript.messages())
      check(m.sigma,
            mult * cdp_gradient_sigma(fleet[0].data.size(), budget, rounds, bounds),
            "central gradient", i);

    const AtRiskFit p_fit =
        estimate_at_risk_probability(config, fleet, s.child(104), mult);
    for (const Message& m : p_fit.transcript.messages())
      check(m.sigma, mult * at_risk_sigma(config.servers[m.server].n, budget),
            "at-risk release", i);

    const VectorXd beta_hat = random_beta(s, d, bounds.c_beta);
    const double p_hat = s.next_uniform(0.2, 0.8);
    const HazardFit h_fit = estimate_hazard(config, fleet, beta_hat, p_hat,
                                            bounds.c_z, s.child(105), mult);
    const int h = tree_depth(config);
    const double c = truncation_constant(beta_hat, p_hat, bounds.c_z);
    for (const Message& m : h_fit.transcript.messages())
      check(m.sigma,
            mult * hazard_node_sigma(c, config.servers[m.server].n, budget, h),
            "tree node", i);
  }
  note(o, fmt::format("worst relative deviation {:.1e}", worst));
  return o;
}

// --- 7: trend suite ----------------------------------------------------------

Outcome criterion_seven() {
  Outcome o;

  Scenario beta_study = apply_scale(scenario_preset("cdp-beta-grid"), 0.1);
  beta_study.replications = 50;
  const std::vector<ResultRow> beta_rows = run_scenario(beta_study);
  const int n_max = *std::max_element(beta_study.n_list.begin(),
                                      beta_study.n_list.end());
  for (double eps : {1.0, 6.0}) {
    const auto series = mean_series(
        beta_rows, "beta_sq_error",
        [](const GridPoint& p) { return static_cast<double>(p.n); },
        [eps](const GridPoint& p) { return p.epsilon == eps; });
    const int bad = violations_nonincreasing(series);
    if (bad > 1)
      fail(o, fmt::format("beta error vs n at eps={} has {}/{} increases", eps,
                          bad, series.size() - 1));
  }
  {
    const auto series = mean_series(
        beta_rows, "beta_sq_error",
        [](const GridPoint& p) { return p.epsilon; },
        [n_max](const GridPoint& p) { return p.n == n_max; });
    const int bad = violations_nonincreasing(series);
    if (bad > 1)
      fail(o, fmt::format("beta error vs eps at n={} has {}/{} increases",
                          n_max, bad, series.size() - 1));
  }

  Scenario hazard_study = apply_scale(scenario_preset("cdp-hazard-grid"), 0.1);
  hazard_study.replications = 50;
  const std::vector<ResultRow> hazard_rows = run_scenario(hazard_study);
  for (double eps : {1.0, 6.0}) {
    const auto series = mean_series(
        hazard_rows, "hazard_sup_error",
        [](const GridPoint& p) { return static_cast<double>(p.n); },
        [eps](const GridPoint& p) { return p.epsilon == eps; });
    const int bad = violations_nonincreasing(series);
    if (bad > 1)
      fail(o, fmt::format("hazard error vs n at eps={} has {}/{} increases",
                          eps, bad, series.size() - 1));
  }
  {
    const auto series = mean_series(
        hazard_rows, "hazard_sup_error",
        [](const GridPoint& p) { return p.epsilon; },
        [n_max](const GridPoint& p) { return p.n == n_max; });
    const int bad = violations_nonincreasing(series);
    if (bad > 1)
      fail(o, fmt::format("hazard error vs eps at n={} has {}/{} increases",
                          n_max, bad, series.size() - 1));
  }

  Scenario censoring_study = apply_scale(scenario_preset("censoring-study"), 0.1);
  censoring_study.replications = 50;
  censoring_study.epsilon_list = {1.0};
  const std::vector<ResultRow> censoring_rows = run_scenario(censoring_study);
  {
    const auto series = mean_series(
        censoring_rows, "beta_sq_error",
        [](const GridPoint& p) { return p.censoring_rate; },
        [](const GridPoint&) { return true; });
    const int bad = violations_nondecreasing(series);
    if (bad > 1)
      fail(o, fmt::format("beta error vs censoring rate has {}/{} decreases",
                          bad, series.size() - 1));
  }
  note(o, "all monotone trends hold with at most one adjacent-pair violation");
  return o;
}

// --- 8: hazard error decay rates ---------------------------------------------

Outcome criterion_eight() {
  Outcome o;
  Scenario scenario;
  scenario.name = "rate-shape";
  scenario.fit_hazard = true;
  scenario.use_true_beta = true;  // isolate the hazard mechanism
  scenario.n_list = {500, 1000, 2000, 4000};
  scenario.epsilon_list = {0.3};
  scenario.server_list = {4};
  scenario.replications = 100;
  scenario.p_hat_noise_multiplier = 0.0;
  scenario.seed = kSeed;

  const auto slope_of = [&](const Scenario& s) {
    const std::vector<ResultRow> rows = run_scenario(s);
    std::vector<double> xs, ys;
    for (int n : s.n_list) {
      const auto series = mean_series(
          rows, "hazard_sup_error",
          [](const GridPoint& p) { return static_cast<double>(p.n); },
          [n](const GridPoint& p) { return p.n == n; });
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(series.at(0)));
    }
    return least_squares(xs, ys).slope;
  };

  const double private_slope = slope_of(scenario);
  Scenario noiseless = scenario;
  noiseless.noise_multiplier = 0.0;
  const double statistical_slope = slope_of(noiseless);

  if (private_slope < -1.25 || private_slope > -0.75)
    fail(o, fmt::format("private decay slope {:.3f} outside [-1.25, -0.75]",
                        private_slope));
  if (statistical_slope < -0.70 || statistical_slope > -0.30)
    fail(o, fmt::format("noiseless decay slope {:.3f} outside [-0.70, -0.30]",
                        statistical_slope));
  note(o, fmt::format("slopes {:.2f} (private), {:.2f} (noiseless)",
                      private_slope, statistical_slope));
  return o;
}

// --- 9: federation isolation ---------------------------------------------------

Outcome criterion_nine() {
  Outcome o;
  RngStream root(kSeed, {9});
  const ModelBounds bounds;
  const PrivacyBudget budget{1.0, 1e-3};
  long long messages = 0;
  long long leaks = 0;

  // Ten batched runs: ten servers times one hundred rounds each.
  for (int r = 0; r < 10; ++r) {
    RngStream s = root.child(static_cast<std::uint64_t>(r + 1));
    FederationConfig config;
    config.rounds = 100;
    config.dimension = 3;
    std::vector<Server> fleet(10);
    for (int sv = 0; sv < 10; ++sv) {
      fleet[sv].id = sv;
      fleet[sv].budget = budget;
      fleet[sv].data = random_dataset(s, 1000, 3, 0.7, bounds.c_z);
      config.servers.push_back({1000, budget});
    }
    SgdParams params;
    params.rounds = 100;
    params.bounds = bounds;
    const CoxFitResult fit = run_fdp_cox(config, fleet, params, s.child(500));
    for (const Message& m : fit.transcript.messages()) {
      ++messages;
      if (message_embeds_record(m, fleet[m.server].data)) ++leaks;
    }
  }

  // One federated hazard pipeline for tree and scalar message coverage.
  {
    RngStream s = root.child(99);
    FederationConfig config;
    config.rounds = 1;
    config.dimension = 3;
    std::vector<Server> fleet(4);
    for (int sv = 0; sv < 4; ++sv) {
      fleet[sv].id = sv;
      fleet[sv].budget = budget;
      fleet[sv].data = random_dataset(s, 2000, 3, 0.7, bounds.c_z);
      config.servers.push_back({2000, budget});
    }
    const AtRiskFit p_fit =
        estimate_at_risk_probability(config, fleet, s.child(1));
    const HazardFit h_fit = estimate_hazard(
        config, fleet, random_beta(s, 3, 1.0), 0.3, bounds.c_z, s.child(2));
    for (const auto* transcript : {&p_fit.transcript, &h_fit.transcript})
      for (const Message& m : transcript->messages()) {
        ++messages;
        if (message_embeds_record(m, fleet[m.server].data)) ++leaks;
      }
  }

  if (messages < 10000)
    fail(o, fmt::format("only {} messages inspected", messages));
  if (leaks > 0) fail(o, fmt::format("{} messages embed raw records", leaks));

  // Batch partitions: disjoint contiguous slices of floor(n/K) records.
  RngStream s = root.child(1000);
  for (const auto& [n_s, rounds] : std::vector<std::pair<int, int>>{
           {103, 10}, {57, 8}, {1000, 40}, {64, 64}}) {
    Server server;
    server.data = random_dataset(s, n_s, 2, 0.5, 1.0);
    const int b = n_s / rounds;
    std::set<double> seen;
    for (int k = 1; k <= rounds; ++k) {
      const Dataset batch = server.batch(k, rounds);
      if (batch.size() != b) {
        fail(o, fmt::format("batch {} of ({}, {}) has size {}", k, n_s, rounds,
                            batch.size()));
        continue;
      }
      for (int i = 0; i < batch.size(); ++i) {
        if (batch.time(i) != server.data.time((k - 1) * b + i))
          fail(o, fmt::format("batch {} of ({}, {}) is not contiguous", k, n_s,
                              rounds));
        seen.insert(batch.time(i));
      }
    }
    if (static_cast<int>(seen.size()) != rounds * b)
      fail(o, fmt::format("batches of ({}, {}) overlap", n_s, rounds));
  }
  note(o, fmt::format("{} messages inspected, no embedded records", messages));
  return o;
}

// --- 10: preset determinism ------------------------------------------------------

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome criterion_ten() {
  Outcome o;
#ifndef FDPCOX_CLI_PATH
  fail(o, "CLI path was not compiled in");
  return o;
#else
  namespace fs = std::filesystem;
  const fs::path tmp = fs::temp_directory_path();
  for (const std::string& preset : preset_names()) {
    const fs::path first = tmp / ("acceptance_" + preset + "_a.csv");
    const fs::path second = tmp / ("acceptance_" + preset + "_b.csv");
    const std::string base = std::string(FDPCOX_CLI_PATH) +
                             " experiment --preset " + preset +
                             " --scale 0.02 --out ";
    for (const fs::path& out : {first, second}) {
      const std::string command =
          base + out.string() + " > /dev/null 2> /dev/null";
      if (std::system(command.c_str()) != 0) {
        fail(o, fmt::format("preset {} exited nonzero", preset));
        break;
      }
    }
    if (!o.pass) break;
    const std::string a = read_bytes(first);
    if (a.empty() || a != read_bytes(second))
      fail(o, fmt::format("preset {} is not byte-identical across runs", preset));
    fs::remove(first);
    fs::remove(second);
  }
  note(o, fmt::format("{} presets, each byte-identical across two runs",
                      preset_names().size()));
  return o;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    double limit_s;
    Outcome (*run)();
  };
  const std::vector<Entry> entries = {
      {1, "gradient and hessian match finite differences", 10.0, criterion_one},
      {2, "empirical sensitivity sits below the bound, witnesses match", 120.0,
       criterion_two},
      {3, "accountant certifies the calibrated noise within budget", 1.0,
       criterion_three},
      {4, "noiseless tree queries equal prefix sums and Nelson-Aalen", 30.0,
       criterion_four},
      {5, "at-risk and censoring shares match the study table", 60.0,
       criterion_five},
      {6, "released noise scales match their printed formulas", 1.0,
       criterion_six},
      {7, "error trends are monotone across the scaled study grids", 900.0,
       criterion_seven},
      {8, "hazard error decays at the private and statistical rates", 600.0,
       criterion_eight},
      {9, "transcripts embed no records and batches partition the data", 10.0,
       criterion_nine},
      {10, "every preset is byte-reproducible through the CLI", 300.0,
       criterion_ten},
  };

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 10) {
      fmt::print(stderr, "usage: {} [criterion 1-10]\n", argv[0]);
      return 1;
    }
  }

  int failures = 0;
  for (const Entry& entry : entries) {
    if (only != 0 && entry.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = fmt::format("exception: {}", e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_time = elapsed < entry.limit_s;
    const bool pass = outcome.pass && in_time;
    std::string line =
        fmt::format("criterion {:2d} [{}] {} ({:.1f}s, limit {:.0f}s)", entry.id,
                    pass ? "PASS" : "FAIL", entry.name, elapsed, entry.limit_s);
    if (!outcome.detail.empty()) line += " - " + outcome.detail;
    if (!in_time) line += " - runtime limit exceeded";
    fmt::print("{}\n", line);
    if (!pass) ++failures;
  }
  return failures;
}
