#include <gtest/gtest.h>

#include "helpers.hpp"
#include "netkernel/generate.hpp"
#include "netkernel/validity.hpp"

using namespace netkernel;
using Status = ValidityVerdict::Status;

namespace {

TopologyClass tree(int leaves) { return {TopologyClass::Kind::EuclideanTree, leaves}; }
const TopologyClass kOneSum{TopologyClass::Kind::OneSumCyclesTrees, 0};
const TopologyClass kGeneral{TopologyClass::Kind::General, 0};

KernelSpec r1(MetricKind metric) {
  return {1.0, 1.0, 1.0, 2.0, 1.0, GenCauchy{1.0, 2.0}, GneitingPsi{1.0}, metric, TimeKind::Linear};
}

}  // namespace

TEST(Validity, ModelTOnTreeCitesGeodesicRule) {
  const auto v = check_validity(model_T(0.9, 100, 0.2), tree(33));
  EXPECT_EQ(v.status, Status::Valid);
  EXPECT_EQ(v.rule, "Thm 1.3");
}

TEST(Validity, MaternAboveHalfInvalid) {
  KernelSpec s = r1(MetricKind::Resistance);
  s.phi = Matern{0.7};
  const auto v = check_validity(s, kGeneral);
  EXPECT_EQ(v.status, Status::Invalid);
  EXPECT_NE(v.reason.find("Matern restricted to (0,1/2]"), std::string::npos);
  EXPECT_EQ(check_validity(s, tree(5)).status, Status::Invalid);
  EXPECT_EQ(check_validity(s, tree(2)).status, Status::Unknown);
}

TEST(Validity, GeodesicOnThetaGraphNotValid) {
  const TopologyClass theta = classify_topology(testing_helpers::make_theta());
  const auto v = check_validity(r1(MetricKind::Geodesic), theta);
  EXPECT_NE(v.status, Status::Valid);
  EXPECT_EQ(v.status, Status::Invalid);
  EXPECT_EQ(check_validity(r1(MetricKind::Resistance), theta).rule, "Thm 1.1");
}

TEST(Validity, ResistanceRulesByTimeKind) {
  KernelSpec s = r1(MetricKind::Resistance);
  EXPECT_EQ(check_validity(s, kGeneral).rule, "Thm 1.1");
  s.time_kind = TimeKind::Circular;
  EXPECT_EQ(check_validity(s, kGeneral).rule, "Thm 1.2");
  s.psi = GneitingPsi{1.5};  // exceeds the circular exponent cap
  EXPECT_EQ(check_validity(s, kGeneral).status, Status::Unknown);
}

TEST(Validity, AskeyBoundOnTrees) {
  EXPECT_EQ(askey_nu_bound(3), 11.0);
  const KernelSpec below = model_askey_st(1, 1, 1, 10.0, 1.0, 0.5, 1.0);
  EXPECT_EQ(check_validity(below, tree(3)).status, Status::Invalid);
  const KernelSpec at = model_askey_st(1, 1, 1, 11.0, 1.0, 0.5, 1.0);
  const auto v = check_validity(at, tree(3));
  EXPECT_EQ(v.status, Status::Valid);
  EXPECT_EQ(v.rule, "Thm 2.1");
  EXPECT_EQ(check_validity(at, kOneSum).status, Status::Unknown);
}

TEST(Validity, MultiplicativeRoute) {
  const KernelSpec m = model_multiplicative(1, 1, 1, 2.0, 1.0);
  EXPECT_EQ(check_validity(m, kGeneral).rule, "Thm 3.1");
  KernelSpec geo = m;
  geo.metric = MetricKind::Geodesic;
  EXPECT_EQ(check_validity(geo, kOneSum).status, Status::Valid);
  EXPECT_EQ(check_validity(geo, kGeneral).status, Status::Unknown);
  KernelSpec not_cm = m;
  not_cm.phi = PowExp{1.5};
  EXPECT_EQ(check_validity(not_cm, kGeneral).status, Status::Unknown);
}

TEST(Validity, OtherRoutes) {
  EXPECT_EQ(check_validity(model_C1(1, 1, 1), tree(4)).status, Status::Unknown);
  EXPECT_EQ(check_validity(model_C2(1, 1, 1), tree(4)).rule, "Thm 1.3");
  KernelSpec sep = r1(MetricKind::Resistance);
  sep.beta = 0.0;
  EXPECT_EQ(check_validity(sep, kGeneral).status, Status::Unknown);
  KernelSpec bad = r1(MetricKind::Resistance);
  bad.sigma2 = -1.0;
  EXPECT_EQ(check_validity(bad, kGeneral).status, Status::Invalid);
}

TEST(Validity, CircularFamilies) {
  CircularSpec c{1.0, 1.0, Poisson{1.0}, PowExp{1.0}, MetricKind::Resistance};
  auto v = check_validity(c, kGeneral);
  EXPECT_EQ(v.status, Status::Valid);
  EXPECT_EQ(v.rule, "Thm 4 (half-spectral, Table 3)");
  c.metric = MetricKind::Geodesic;
  EXPECT_EQ(check_validity(c, kOneSum).status, Status::Valid);
  EXPECT_EQ(check_validity(c, kGeneral).status, Status::Unknown);
  c.family = AdaptedMultiquadric{0.5, 1.0};
  EXPECT_EQ(check_validity(c, kOneSum).status, Status::Unknown);
}
