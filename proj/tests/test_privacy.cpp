#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdpcox/privacy.hpp"

namespace fdpcox {
namespace {

TEST(GaussianSigma, MatchesClosedFormExample) {
  // sqrt(2 log 25) for sens 1, eps 1, delta 0.05.
  EXPECT_DOUBLE_EQ(gaussian_sigma(1.0, {1.0, 0.05}), 2.537272482359039);
}

TEST(GaussianSigma, ScalesWithSensitivityAndBudget) {
  const PrivacyBudget budget{1.0, 0.001};
  EXPECT_DOUBLE_EQ(gaussian_sigma(0.0, budget), 0.0);
  EXPECT_DOUBLE_EQ(gaussian_sigma(2.0, budget), 2.0 * gaussian_sigma(1.0, budget));
  EXPECT_DOUBLE_EQ(gaussian_sigma(1.0, {2.0, 0.001}),
                   gaussian_sigma(1.0, budget) / 2.0);
  EXPECT_LT(gaussian_sigma(1.0, {1.0, 0.01}), gaussian_sigma(1.0, {1.0, 0.001}));
}

TEST(GaussianSigma, RejectsDegenerateInputs) {
  EXPECT_THROW(gaussian_sigma(1.0, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(gaussian_sigma(1.0, {0.0, 0.001}), std::invalid_argument);
  EXPECT_THROW(gaussian_sigma(1.0, {-1.0, 0.001}), std::invalid_argument);
  EXPECT_THROW(gaussian_sigma(1.0, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(gaussian_sigma(-1.0, {1.0, 0.001}), std::invalid_argument);
}

TEST(GradSensitivityBound, CensoringFlipIsFourOverN) {
  const SensitivityBound b =
      grad_sensitivity_bound(10, {1.0, 1.0}, NeighborCase::kCensoringOnly);
  EXPECT_DOUBLE_EQ(b.value, 0.4);
  EXPECT_EQ(b.neighbor_case, NeighborCase::kCensoringOnly);
}

TEST(GradSensitivityBound, RicherCasesAddTheLogTerm) {
  const double full =
      grad_sensitivity_bound(10, {1.0, 1.0}, NeighborCase::kFullTriple).value;
  EXPECT_DOUBLE_EQ(full, 9.259091345033887);
  EXPECT_DOUBLE_EQ(
      grad_sensitivity_bound(10, {1.0, 1.0}, NeighborCase::kCovariateOnly).value,
      full);
  EXPECT_DOUBLE_EQ(
      grad_sensitivity_bound(10, {1.0, 1.0}, NeighborCase::kTimeOnly).value, full);
  EXPECT_GT(full, 0.4);
}

TEST(GradSensitivityBound, DecreasesWithSampleSize) {
  const std::vector<int> grid = {2, 5, 10, 50, 100, 1000, 10000};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    for (NeighborCase c : {NeighborCase::kCensoringOnly, NeighborCase::kFullTriple}) {
      EXPECT_LT(grad_sensitivity_bound(grid[i], {1.0, 1.0}, c).value,
                grad_sensitivity_bound(grid[i - 1], {1.0, 1.0}, c).value);
    }
  }
  EXPECT_THROW(grad_sensitivity_bound(0, {1.0, 1.0}, NeighborCase::kFullTriple),
               std::invalid_argument);
}

TEST(CalibratedGradientSensitivity, DominatesTheAnalyticBound) {
  for (double cz : {1.0, 1.5, 2.0}) {
    for (double cb : {1.0, 2.0}) {
      for (int n : {2, 10, 100, 5000, 100000}) {
        const ModelBounds bounds{cz, cb};
        const double calibrated = calibrated_gradient_sensitivity(n, bounds);
        for (NeighborCase c :
             {NeighborCase::kCensoringOnly, NeighborCase::kCovariateOnly,
              NeighborCase::kTimeOnly, NeighborCase::kFullTriple}) {
          EXPECT_GE(calibrated + 1e-12,
                    grad_sensitivity_bound(n, bounds, c).value)
              << "cz=" << cz << " cb=" << cb << " n=" << n;
        }
      }
    }
  }
}

TEST(NeighborCaseLabel, NamesAllCases) {
  EXPECT_EQ(neighbor_case_label(NeighborCase::kCensoringOnly), "censoring-only");
  EXPECT_EQ(neighbor_case_label(NeighborCase::kCovariateOnly), "covariate-only");
  EXPECT_EQ(neighbor_case_label(NeighborCase::kTimeOnly), "time-only");
  EXPECT_EQ(neighbor_case_label(NeighborCase::kFullTriple), "full-triple");
}

TEST(RdpGaussian, MatchesClosedForm) {
  EXPECT_DOUBLE_EQ(rdp_gaussian(2.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(rdp_gaussian(2.0, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(rdp_gaussian(4.0, 1.0, 1.0), 2.0 * rdp_gaussian(2.0, 1.0, 1.0));
  EXPECT_THROW(rdp_gaussian(1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(rdp_gaussian(2.0, 1.0, 0.0), std::invalid_argument);
}

TEST(RdpCompose, EpsilonsAddAtFixedOrder) {
  RdpLedger ledger{2.0, 0.3};
  ledger = rdp_compose(ledger, 0.2);
  EXPECT_DOUBLE_EQ(ledger.epsilon_rdp, 0.5);
  ledger = rdp_compose(ledger, 0.0);
  EXPECT_DOUBLE_EQ(ledger.epsilon_rdp, 0.5);
  const RdpLedger merged = rdp_compose(ledger, RdpLedger{2.0, 0.5});
  EXPECT_DOUBLE_EQ(merged.epsilon_rdp, 1.0);
  EXPECT_THROW(rdp_compose(ledger, RdpLedger{3.0, 0.1}), std::invalid_argument);
  EXPECT_THROW(rdp_compose(ledger, -0.1), std::invalid_argument);
}

TEST(RdpToDp, MatchesConversionExamples) {
  // eps_rdp 0.5 at order 2 with delta 0.01: 0.5 + log(100).
  EXPECT_DOUBLE_EQ(rdp_to_dp({2.0, 0.5}, 0.01).epsilon, 5.105170185988092);
  // Order 11 with delta e^{-10}: the conversion term is exactly 1.
  EXPECT_DOUBLE_EQ(rdp_to_dp({11.0, 0.0}, std::exp(-10.0)).epsilon, 1.0);
  EXPECT_THROW(rdp_to_dp({2.0, 0.5}, 0.0), std::invalid_argument);
  EXPECT_THROW(rdp_to_dp({2.0, 0.5}, 1.0), std::invalid_argument);
  EXPECT_THROW(rdp_to_dp({1.0, 0.5}, 0.01), std::invalid_argument);
}

TEST(ComposedGaussianVariance, MatchesWorkedExample) {
  // sens 1, eps 1, delta e^{-1}, K = 2: (2 + 1) * 2 / 1 = 6.
  EXPECT_DOUBLE_EQ(composed_gaussian_variance(1.0, {1.0, std::exp(-1.0)}, 2), 6.0);
  EXPECT_THROW(composed_gaussian_variance(1.0, {1.0, 0.001}, 0),
               std::invalid_argument);
  EXPECT_THROW(composed_gaussian_variance(1.0, {1.0, 0.0}, 1),
               std::invalid_argument);
}

TEST(ComposedGaussianVariance, AccountantRoundTripIsExact) {
  for (double eps : {0.3, 0.75, 1.0, 2.0, 6.0}) {
    for (double delta : {1e-3, 1e-5}) {
      for (int k : {1, 5, 17, 40}) {
        for (double sens : {0.05, 1.0}) {
          const PrivacyBudget budget{eps, delta};
          const double sigma =
              std::sqrt(composed_gaussian_variance(sens, budget, k));
          const double alpha = 2.0 * std::log(1.0 / delta) / eps + 1.0;
          RdpLedger ledger{alpha, 0.0};
          for (int round = 0; round < k; ++round) {
            ledger = rdp_compose(ledger, rdp_gaussian(alpha, sens, sigma));
          }
          const double realized = rdp_to_dp(ledger, delta).epsilon;
          EXPECT_NEAR(realized, eps, 1e-9)
              << "eps=" << eps << " delta=" << delta << " k=" << k;
        }
      }
    }
  }
}

TEST(PrivacyBudget, ValidateChecksRanges) {
  EXPECT_NO_THROW((PrivacyBudget{0.5, 0.0}).validate());
  EXPECT_THROW((PrivacyBudget{0.0, 0.5}).validate(), std::invalid_argument);
  EXPECT_THROW((PrivacyBudget{1.0, 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((PrivacyBudget{1.0, -0.1}).validate(), std::invalid_argument);
}

}  // namespace
}  // namespace fdpcox
