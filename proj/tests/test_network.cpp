#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "netkernel/generate.hpp"
#include "netkernel/network.hpp"
#include "oracles.hpp"

using namespace netkernel;
using testing_helpers::make_cycle;
using testing_helpers::make_net;

namespace {

ErrorCode build_error(std::vector<Vertex> vs, std::vector<Edge> es) {
  try {
    Network::build(std::move(vs), std::move(es));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::IoError;
}

std::vector<std::vector<int>> library_blocks(const Network& net) {
  std::vector<std::vector<int>> out;
  for (const Block& b : biconnected_blocks(net)) {
    std::vector<int> ids;
    for (std::size_t e : b.edges) ids.push_back(net.edges()[e].id);
    std::sort(ids.begin(), ids.end());
    out.push_back(ids);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Network, MinimalPath) {
  const Network net = make_net({{1, 2, 3.0}});
  EXPECT_EQ(net.vertex_count(), 2u);
  EXPECT_EQ(net.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(net.total_length(), 3.0);
}

TEST(Network, TriangleIsValid) {
  const Network net = make_net({{1, 2, 1.0}, {2, 3, 1.0}, {1, 3, 1.0}});
  EXPECT_EQ(net.edge_count(), 3u);
  EXPECT_TRUE(check_distance_consistency(net).empty());
}

TEST(Network, BuildErrors) {
  const Vertex v1{1, std::nullopt}, v2{2, std::nullopt}, v3{3, std::nullopt}, v4{4, std::nullopt};
  EXPECT_EQ(build_error({v1, v2, v3, v4}, {{1, 1, 2, 1.0, {}}, {2, 2, 3, 1.0, {}}}), ErrorCode::DisconnectedGraph);
  EXPECT_EQ(build_error({}, {}), ErrorCode::EmptyGraph);
  EXPECT_EQ(build_error({v1, v1}, {}), ErrorCode::DuplicateVertex);
  EXPECT_EQ(build_error({v1, v2}, {{1, 1, 1, 1.0, {}}}), ErrorCode::SelfLoop);
  EXPECT_EQ(build_error({v1, v2}, {{1, 1, 2, 0.0, {}}}), ErrorCode::NonPositiveLength);
  EXPECT_EQ(build_error({v1, v2}, {{1, 1, 2, -1.0, {}}}), ErrorCode::NonPositiveLength);
  EXPECT_EQ(build_error({v1, v2}, {{1, 1, 9, 1.0, {}}}), ErrorCode::DanglingEndpoint);
  EXPECT_EQ(build_error({v1, v2}, {{1, 1, 2, 1.0, {}}, {2, 2, 1, 2.0, {}}}), ErrorCode::DuplicateEdge);
  EXPECT_EQ(build_error({v1, v2, v3}, {{1, 1, 2, 1.0, {}}, {1, 2, 3, 2.0, {}}}), ErrorCode::DuplicateEdge);
}

TEST(Network, SingleVertexIsConnected) {
  const Network net = Network::build({{7, std::nullopt}}, {});
  EXPECT_EQ(net.vertex_count(), 1u);
  EXPECT_EQ(classify_topology(net).kind, TopologyClass::Kind::EuclideanTree);
}

TEST(Network, ContentHashTracksContent) {
  EXPECT_EQ(make_net({{1, 2, 1.0}}).content_hash(), make_net({{1, 2, 1.0}}).content_hash());
  EXPECT_NE(make_net({{1, 2, 1.0}}).content_hash(), make_net({{1, 2, 1.5}}).content_hash());
}

TEST(DistanceConsistency, CycleWithLongEdgeFlagged) {
  const Network net = make_cycle({1.0, 1.0, 5.0});
  const auto bad = check_distance_consistency(net);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0], 3);
}

TEST(DistanceConsistency, UnitCycleAndTreesClean) {
  EXPECT_TRUE(check_distance_consistency(make_cycle({1.0, 1.0, 1.0})).empty());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenerateParams p;
    p.n = 25;
    p.min_length = 0.1;
    p.max_length = 5.0;
    EXPECT_TRUE(check_distance_consistency(generate(GraphKind::RandomTree, p, seed)).empty());
  }
}

TEST(DistanceConsistency, EqualityIsNotAViolation) {
  // Edge 1-3 of length 2 ties the two-edge path exactly.
  EXPECT_TRUE(check_distance_consistency(make_net({{1, 2, 1.0}, {2, 3, 1.0}, {1, 3, 2.0}})).empty());
}

TEST(Topology, StarIsTreeWithFiveLeaves) {
  GenerateParams p;
  p.n = 5;
  const TopologyClass t = classify_topology(generate(GraphKind::Star, p, 1));
  EXPECT_EQ(t.kind, TopologyClass::Kind::EuclideanTree);
  EXPECT_EQ(t.leaf_count, 5);
}

TEST(Topology, FourCycleIsOneSum) {
  EXPECT_EQ(classify_topology(make_cycle({1, 1, 1, 1})).kind, TopologyClass::Kind::OneSumCyclesTrees);
}

TEST(Topology, ThetaGraphIsGeneralAndOneBlock) {
  const Network theta = testing_helpers::make_theta();
  const auto brute = oracle::brute_force_blocks(theta);
  ASSERT_EQ(brute.size(), 1u);
  EXPECT_EQ(brute.front().size(), theta.edge_count());
  EXPECT_EQ(library_blocks(theta), brute);
  EXPECT_EQ(classify_topology(theta).kind, TopologyClass::Kind::General);
}

TEST(Topology, BlocksMatchBruteForceOnGeneratedGraphs) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    GenerateParams p;
    p.n = 5;
    p.pendant_size = 3;
    const Network net = generate(GraphKind::CycleWithPendantTrees, p, seed);
    EXPECT_EQ(library_blocks(net), oracle::brute_force_blocks(net)) << "seed " << seed;
    EXPECT_EQ(classify_topology(net).kind, TopologyClass::Kind::OneSumCyclesTrees);
  }
}

TEST(Topology, BlocksMatchBruteForceOnHandGraphs) {
  // Two triangles sharing a cut vertex, a bridge, and a square with a chord.
  const Network bowtie = make_net({{1, 2, 1}, {2, 3, 1}, {3, 1, 1}, {3, 4, 1}, {4, 5, 1}, {5, 3, 1}, {5, 6, 2}});
  EXPECT_EQ(library_blocks(bowtie), oracle::brute_force_blocks(bowtie));
  EXPECT_EQ(classify_topology(bowtie).kind, TopologyClass::Kind::OneSumCyclesTrees);
  const Network chorded = make_net({{1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 1, 1}, {1, 3, 1.5}});
  EXPECT_EQ(library_blocks(chorded), oracle::brute_force_blocks(chorded));
  EXPECT_EQ(classify_topology(chorded).kind, TopologyClass::Kind::General);
}

TEST(Generate, PathShape) {
  GenerateParams p;
  p.n = 3;
  const Network net = generate(GraphKind::Path, p, 0);
  EXPECT_EQ(net.vertex_count(), 3u);
  EXPECT_EQ(net.edge_count(), 2u);
}

TEST(Generate, DeterministicForSeed) {
  GenerateParams p;
  p.n = 30;
  EXPECT_EQ(generate(GraphKind::RandomTree, p, 7).content_hash(), generate(GraphKind::RandomTree, p, 7).content_hash());
  EXPECT_NE(generate(GraphKind::RandomTree, p, 7).content_hash(), generate(GraphKind::RandomTree, p, 8).content_hash());
}

TEST(Generate, CycleIsOneSum) {
  GenerateParams p;
  p.n = 6;
  EXPECT_EQ(classify_topology(generate(GraphKind::Cycle, p, 0)).kind, TopologyClass::Kind::OneSumCyclesTrees);
}

TEST(Generate, RiverTreeShapeAndEmbedding) {
  GenerateParams p;
  p.n = 4;
  p.detour_min = 1.0;
  p.detour_max = 3.0;
  const Network net = generate(GraphKind::RiverTree, p, 2);
  // Outlet + trunk tip + 2 + 4 + 8 + 16.
  EXPECT_EQ(net.vertex_count(), 32u);
  EXPECT_EQ(classify_topology(net).leaf_count, 17);
  ASSERT_TRUE(net.has_coordinates());
  for (const Edge& e : net.edges()) {
    const auto a = *net.vertices()[net.vertex_index(e.u)].coords;
    const auto b = *net.vertices()[net.vertex_index(e.v)].coords;
    EXPECT_LE(std::hypot(a[0] - b[0], a[1] - b[1]), e.length * (1 + 1e-12));
  }
}

TEST(Generate, RejectsBadParams) {
  GenerateParams p;
  p.detour_min = 0.5;
  EXPECT_THROW(generate(GraphKind::Path, p, 0), Error);
  EXPECT_THROW(parse_graph_kind("mesh"), Error);
}

TEST(SamplePoints, SingleEdgeOffsetInterior) {
  const Network net = make_net({{1, 2, 1.0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = sample_points(net, 1, seed);
    ASSERT_EQ(pts.size(), 1u);
    ASSERT_FALSE(pts[0].is_vertex());
    EXPECT_GT(pts[0].offset(), 0.0);
    EXPECT_LT(pts[0].offset(), 1.0);
  }
}

TEST(SamplePoints, LengthProportional) {
  const Network net = make_net({{1, 2, 1.0}, {2, 3, 9.0}});
  const auto pts = sample_points(net, 1000, 42);
  const auto on_long = std::count_if(pts.begin(), pts.end(), [](const PointOnNetwork& p) { return p.edge() == 2; });
  // Binomial(1000, 0.9): sd = 0.0095, bound at ~3 sd.
  EXPECT_NEAR(static_cast<double>(on_long) / 1000.0, 0.9, 0.03);
}

TEST(SamplePoints, Deterministic) {
  const Network net = make_net({{1, 2, 1.0}, {2, 3, 9.0}});
  EXPECT_EQ(hash_points(sample_points(net, 50, 3)), hash_points(sample_points(net, 50, 3)));
}

TEST(PointOnNetwork, Validation) {
  const Network net = make_net({{1, 2, 2.0}});
  EXPECT_NO_THROW(PointOnNetwork::on_edge(net, 1, 1.0));
  EXPECT_THROW(PointOnNetwork::on_edge(net, 1, 2.0), Error);
  EXPECT_THROW(PointOnNetwork::on_edge(net, 1, 0.0), Error);
  EXPECT_THROW(PointOnNetwork::on_edge(net, 5, 1.0), Error);
  EXPECT_THROW(PointOnNetwork::at_vertex(9).validate(net), Error);
}
