#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "netkernel/generate.hpp"
#include "netkernel/gp.hpp"

using namespace netkernel;

namespace {

std::shared_ptr<const Network> small_tree() {
  GenerateParams p;
  p.n = 2;
  p.root_length = 10.0;
  p.decay = 0.7;
  p.detour_max = 1.5;
  return std::make_shared<const Network>(generate(GraphKind::RiverTree, p, 1));
}

SpaceTimeDesign design_on(std::shared_ptr<const Network> net, std::size_t sites, std::size_t per_site,
                          std::uint64_t seed) {
  SpaceTimeDesign d;
  d.network = net;
  Rng rng = make_rng(seed, 3);
  for (const auto& s : sample_points(*net, sites, seed)) {
    for (std::size_t k = 0; k < per_site; ++k) {
      d.points.push_back(s);
      d.times.push_back(uniform01(rng));
    }
  }
  return d;
}

}  // namespace

TEST(Covariance, NuggetOnDiagonal) {
  const auto net = small_tree();
  const SpaceTimeDesign one = design_on(net, 1, 1, 0);
  EXPECT_DOUBLE_EQ(covariance_matrix(one, model_T(0.9, 5, 1), 0.1)(0, 0), 1.0);
  const SpaceTimeDesign d = design_on(net, 4, 2, 1);
  const Eigen::MatrixXd without = covariance_matrix(d, model_T(0.9, 5, 1), 0.0);
  const DistanceMatrix dm = geodesic_matrix(*net, d.points);
  EXPECT_EQ(without, gram(model_T(0.9, 5, 1), dm, d.times));
  const Eigen::MatrixXd with = covariance_matrix(d, model_T(0.9, 5, 1), 0.25);
  EXPECT_TRUE((with - without).isApprox(0.25 * Eigen::MatrixXd::Identity(8, 8)));
}

TEST(Covariance, EntrywiseThreePoints) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 3, 1, 4);
  const KernelSpec k = model_C2(1.1, 3.0, 0.4);
  const Eigen::MatrixXd c = covariance_matrix(d, k, 0.0);
  const DistanceMatrix dm = geodesic_matrix(*net, d.points);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(c(i, j), eval_gneiting(k, dm(i, j), std::abs(d.times[i] - d.times[j])));
}

TEST(Simulate, IdentityCovarianceVariance) {
  // sigma2 tiny and points far apart: Sigma + nugget I is the identity to double precision.
  const auto net = std::make_shared<const Network>(testing_helpers::make_net({{1, 2, 1e9}}));
  SpaceTimeDesign d{net, {PointOnNetwork::at_vertex(1), PointOnNetwork::at_vertex(2)}, {0.0, 50.0}};
  const SimSpec sim{model_T(1e-300, 1.0, 1e-3), 1.0, 17};
  const Eigen::MatrixXd draws = simulate(d, sim, 10000);
  for (int j = 0; j < 2; ++j) {
    const double var = draws.col(j).squaredNorm() / 10000.0;
    EXPECT_NEAR(var, 1.0, 0.05);
  }
}

TEST(Simulate, EmpiricalCovarianceConcentrates) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 3, 2, 8);
  const SimSpec sim{model_T(0.9, 8.0, 0.5), 0.1, 3};
  const Eigen::MatrixXd draws = simulate(d, sim, 10000);
  const Eigen::MatrixXd empirical = draws.transpose() * draws / 10000.0;
  const Eigen::MatrixXd truth = covariance_matrix(d, sim.kernel, sim.nugget);
  const double bound = 5.0 * truth.diagonal().maxCoeff() / std::sqrt(10000.0);
  EXPECT_LE((empirical - truth).cwiseAbs().maxCoeff(), bound);
}

TEST(Simulate, DeterministicPerSeed) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 4, 2, 8);
  const SimSpec sim{model_T(0.9, 8.0, 0.5), 0.1, 3};
  EXPECT_EQ(simulate(d, sim, 3), simulate(d, sim, 3));
  const SimSpec other{model_T(0.9, 8.0, 0.5), 0.1, 4};
  EXPECT_NE(simulate(d, sim, 1), simulate(d, other, 1));
}

TEST(Simulate, CholeskyRoundTrip) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 10, 3, 2);
  const Eigen::MatrixXd cov = covariance_matrix(d, model_T(0.9, 8.0, 0.5), 0.1);
  const Eigen::MatrixXd l = detail::cholesky_with_jitter(cov);
  EXPECT_LE((l * l.transpose() - cov).norm() / cov.norm(), 1e-10);
}

TEST(Loglik, ScalarCases) {
  const auto net = std::make_shared<const Network>(testing_helpers::make_net({{1, 2, 1.0}}));
  SpaceTimeDesign d{net, {PointOnNetwork::at_vertex(1)}, {0.0}};
  const KernelSpec unit = model_T(0.9, 1, 1);
  EXPECT_NEAR(loglik(d, unit, 0.1, Eigen::VectorXd::Zero(1)), -0.5 * std::log(2 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(loglik(d, unit, 0.1, Eigen::VectorXd::Ones(1)), -0.5 * (std::log(2 * std::numbers::pi) + 1.0), 1e-14);
}

TEST(Loglik, BivariateClosedForm) {
  // Choose c_S so that 1 * (1 + 1/c_S)^-2 = 0.5 at d = 1, u = 0; covariance [[1.1, .5], [.5, 1.1]].
  const auto net = std::make_shared<const Network>(testing_helpers::make_net({{1, 2, 1.0}}));
  const double c_S = 1.0 / (std::sqrt(2.0) - 1.0);
  SpaceTimeDesign d{net, {PointOnNetwork::at_vertex(1), PointOnNetwork::at_vertex(2)}, {0.0, 0.0}};
  Eigen::Vector2d y(1.0, -1.0);
  // det = 1.21 - 0.25 = 0.96; y' S^-1 y = (1.1 + 1.1 + 2*0.5) / 0.96.
  const double expected = -0.5 * (2 * std::log(2 * std::numbers::pi) + std::log(0.96) + 3.2 / 0.96);
  EXPECT_NEAR(loglik(d, model_T(1.0, c_S, 1.0), 0.1, y), expected, 1e-12);
  EXPECT_NEAR(expected, -3.4841327358158844, 1e-14);
}

TEST(Loglik, PermutationInvariant) {
  const auto net = small_tree();
  SpaceTimeDesign d = design_on(net, 6, 2, 5);
  const KernelSpec k = model_T(0.9, 8.0, 0.5);
  const Eigen::VectorXd y = simulate(d, {k, 0.1, 1}, 1).row(0).transpose();
  const double base = loglik(d, k, 0.1, y);
  SpaceTimeDesign p = d;
  Eigen::VectorXd yp(y.size());
  const auto n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    p.points[i] = d.points[n - 1 - i];
    p.times[i] = d.times[n - 1 - i];
    yp(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(n - 1 - i));
  }
  EXPECT_NEAR(loglik(p, k, 0.1, yp), base, 1e-9 * std::abs(base));
}

TEST(Loglik, SurfaceMatchesDirect) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 5, 3, 6);
  const Eigen::VectorXd y = simulate(d, {model_T(0.9, 8.0, 0.5), 0.1, 2}, 1).row(0).transpose();
  LikelihoodSurface surface(d, ModelFamily::C2, y, 0.1);
  EXPECT_NEAR(surface({0.7, 4.0, 0.3}), loglik(d, model_C2(0.7, 4.0, 0.3), 0.1, y), 1e-9);
}

TEST(Fit, ImprovesOnInitAndFlagsConvergence) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 8, 4, 7);
  const Eigen::VectorXd y = simulate(d, {model_T(0.9, 8.0, 0.2), 0.1, 5}, 1).row(0).transpose();
  const ScaleParams init{0.5, 3.0, 0.5};
  const FitResult f = fit(d, ModelFamily::T, y, init);
  EXPECT_GE(f.loglik, loglik(d, model_T(init.sigma2, init.c_S, init.c_T), 0.1, y));
  EXPECT_GT(f.estimates.sigma2, 0.0);
  EXPECT_GT(f.estimates.c_S, 0.0);
  EXPECT_GT(f.estimates.c_T, 0.0);
  EXPECT_NEAR(f.loglik, loglik(d, model_T(f.estimates.sigma2, f.estimates.c_S, f.estimates.c_T), 0.1, y), 1e-9);
}

TEST(Fit, ZeroDataDrivesVarianceToLowerBound) {
  const auto net = small_tree();
  const SpaceTimeDesign d = design_on(net, 4, 2, 7);
  const FitResult f = fit(d, ModelFamily::T, Eigen::VectorXd::Zero(8));
  EXPECT_TRUE(f.converged);
  EXPECT_LT(f.estimates.sigma2, 1e-3);
  EXPECT_GE(f.estimates.sigma2, 1e-6 * (1 - 1e-12));
}

TEST(Fit, ModelFamilyNames) {
  EXPECT_EQ(parse_model_family("C1"), ModelFamily::C1);
  EXPECT_EQ(to_string(ModelFamily::C2), "C2");
  EXPECT_THROW(parse_model_family("C3"), Error);
}
