#ifndef NETKERNEL_METRICS_HPP
#define NETKERNEL_METRICS_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "netkernel/error.hpp"
#include "netkernel/network.hpp"

namespace netkernel {

enum class MetricKind { Geodesic, Resistance, AmbientEuclidean };
enum class TimeKind { Linear, Circular };

inline constexpr std::string_view to_string(MetricKind m) {
  switch (m) {
    case MetricKind::Geodesic: return "geodesic";
    case MetricKind::Resistance: return "resistance";
    case MetricKind::AmbientEuclidean: return "euclidean";
  }
  return "geodesic";
}

inline MetricKind parse_metric(std::string_view s) {
  if (s == "geodesic") return MetricKind::Geodesic;
  if (s == "resistance") return MetricKind::Resistance;
  if (s == "euclidean" || s == "ambient_euclidean") return MetricKind::AmbientEuclidean;
  throw Error(ErrorCode::ParseError, "unknown metric '" + std::string(s) + "'");
}

inline constexpr std::string_view to_string(TimeKind t) { return t == TimeKind::Linear ? "linear" : "circular"; }

inline TimeKind parse_time_kind(std::string_view s) {
  if (s == "linear") return TimeKind::Linear;
  if (s == "circular") return TimeKind::Circular;
  throw Error(ErrorCode::ParseError, "unknown time kind '" + std::string(s) + "'");
}

/// Pairwise spatial distances (length units) under one metric.
struct DistanceMatrix {
  MetricKind metric = MetricKind::Geodesic;
  Eigen::MatrixXd values;

  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

/// Linear: |t - t'|. Circular (radians): great-circle separation on the unit circle, in [0, pi].
inline double temporal_separation(double t, double t_prime, TimeKind kind) {
  const double diff = std::abs(t - t_prime);
  if (kind == TimeKind::Linear) return diff;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double wrapped = std::fmod(diff, kTwoPi);
  return std::min(wrapped, kTwoPi - wrapped);
}

/// The network with every interior query point promoted to a node: each edge carrying
/// points is split into consecutive sub-edges. Nodes [0, V) are the original vertices.
struct AugmentedGraph {
  detail::AdjacencyList adjacency;
  std::vector<std::size_t> query_node;  // node of each input point (duplicates share a node)

  [[nodiscard]] std::size_t node_count() const noexcept { return adjacency.size(); }
};

inline AugmentedGraph augment(const Network& net, const std::vector<PointOnNetwork>& points) {
  AugmentedGraph g;
  g.adjacency.resize(net.vertex_count());
  g.query_node.resize(points.size());
  std::vector<std::map<double, std::size_t>> on_edge(net.edge_count());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointOnNetwork& p = points[i];
    p.validate(net);
    if (p.is_vertex()) {
      g.query_node[i] = net.vertex_index(p.vertex());
      continue;
    }
    auto& slots = on_edge[net.edge_index(p.edge())];
    auto [it, inserted] = slots.emplace(p.offset(), 0);
    if (inserted) {
      it->second = g.adjacency.size();
      g.adjacency.emplace_back();
    }
    g.query_node[i] = it->second;
  }
  auto link = [&](std::size_t a, std::size_t b, double length) {
    g.adjacency[a].push_back({static_cast<int>(b), length});
    g.adjacency[b].push_back({static_cast<int>(a), length});
  };
  for (std::size_t k = 0; k < net.edge_count(); ++k) {
    const Edge& e = net.edges()[k];
    std::size_t prev = net.vertex_index(e.u);
    double prev_offset = 0.0;
    for (const auto& [offset, node] : on_edge[k]) {
      link(prev, node, offset - prev_offset);
      prev = node;
      prev_offset = offset;
    }
    link(prev, net.vertex_index(e.v), e.length - prev_offset);
  }
  return g;
}

namespace detail {

inline std::vector<std::size_t> unique_nodes(const std::vector<std::size_t>& nodes) {
  std::vector<std::size_t> u = nodes;
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

inline std::size_t position(const std::vector<std::size_t>& sorted, std::size_t node) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), node) - sorted.begin());
}

/// Expand a unique-node matrix to the (possibly repeated) query list; exact zeros for coincident points.
inline Eigen::MatrixXd expand(const Eigen::MatrixXd& by_node, const std::vector<std::size_t>& nodes,
                              const std::vector<std::size_t>& query_node) {
  const auto n = static_cast<Eigen::Index>(query_node.size());
  Eigen::MatrixXd out(n, n);
  std::vector<Eigen::Index> pos(query_node.size());
  for (std::size_t i = 0; i < query_node.size(); ++i) {
    pos[i] = static_cast<Eigen::Index>(position(nodes, query_node[i]));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = pos[static_cast<std::size_t>(i)] == pos[static_cast<std::size_t>(j)]
                      ? 0.0
                      : by_node(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace detail

/// Shortest-path distances between points. Throws InconsistentNetwork when some edge
/// is not itself a shortest path.
inline DistanceMatrix geodesic_matrix(const Network& net, const std::vector<PointOnNetwork>& points) {
  if (const auto bad = check_distance_consistency(net); !bad.empty()) {
    throw Error(ErrorCode::InconsistentNetwork,
                "edge " + std::to_string(bad.front()) + " is longer than the shortest path between its endpoints");
  }
  const AugmentedGraph g = augment(net, points);
  const auto nodes = detail::unique_nodes(g.query_node);
  const auto m = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd by_node = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto dist = detail::dijkstra(g.adjacency, static_cast<int>(nodes[static_cast<std::size_t>(a)]));
    // Fill the upper triangle from the lower-indexed source and mirror it, so the
    // result is exactly symmetric regardless of summation order.
    for (Eigen::Index b = a + 1; b < m; ++b) {
      by_node(a, b) = by_node(b, a) = dist[nodes[static_cast<std::size_t>(b)]];
    }
  }
  return {MetricKind::Geodesic, detail::expand(by_node, nodes, g.query_node)};
}

/// Effective resistance between points, conductance 1/length on every sub-edge.
/// Dense Cholesky of the grounded Laplacian up to 2000 nodes, conjugate gradients beyond.
inline DistanceMatrix resistance_matrix(const Network& net, const std::vector<PointOnNetwork>& points) {
  constexpr std::size_t kDenseLimit = 2000;
  const AugmentedGraph g = augment(net, points);
  const auto nodes = detail::unique_nodes(g.query_node);
  const auto m = static_cast<Eigen::Index>(nodes.size());
  const std::size_t total = g.node_count();
  // Node 0 is grounded; the remaining Laplacian block is SPD on a connected graph.
  const auto reduced = static_cast<Eigen::Index>(total - 1);
  Eigen::MatrixXd green = Eigen::MatrixXd::Zero(m, m);  // grounded Green's function on query nodes
  if (reduced > 0) {
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(reduced, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const std::size_t node = nodes[static_cast<std::size_t>(a)];
      if (node != 0) rhs(static_cast<Eigen::Index>(node) - 1, a) = 1.0;
    }
    Eigen::MatrixXd solution;
    if (total <= kDenseLimit) {
      Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(reduced, reduced);
      for (std::size_t x = 0; x < total; ++x) {
        for (const detail::Arc& arc : g.adjacency[x]) {
          const double c = 1.0 / arc.length;
          if (x != 0) lap(static_cast<Eigen::Index>(x) - 1, static_cast<Eigen::Index>(x) - 1) += c;
          if (x != 0 && arc.to != 0) lap(static_cast<Eigen::Index>(x) - 1, arc.to - 1) -= c;
        }
      }
      const Eigen::LLT<Eigen::MatrixXd> llt(lap);
      if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "grounded Laplacian not SPD");
      solution = llt.solve(rhs);
    } else {
      std::vector<Eigen::Triplet<double>> entries;
      for (std::size_t x = 1; x < total; ++x) {
        for (const detail::Arc& arc : g.adjacency[x]) {
          const double c = 1.0 / arc.length;
          entries.emplace_back(static_cast<int>(x) - 1, static_cast<int>(x) - 1, c);
          if (arc.to != 0) entries.emplace_back(static_cast<int>(x) - 1, arc.to - 1, -c);
        }
      }
      Eigen::SparseMatrix<double> lap(reduced, reduced);
      lap.setFromTriplets(entries.begin(), entries.end());
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(1e-10);
      cg.setMaxIterations(static_cast<Eigen::Index>(10 * total));
      cg.compute(lap);
      solution.resize(reduced, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        solution.col(a) = cg.solve(rhs.col(a));
        if (cg.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "conjugate gradients did not converge");
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        const std::size_t node = nodes[static_cast<std::size_t>(b)];
        green(b, a) = node == 0 ? 0.0 : solution(static_cast<Eigen::Index>(node) - 1, a);
      }
    }
  }
  Eigen::MatrixXd by_node = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const double cross = 0.5 * (green(a, b) + green(b, a));
      by_node(a, b) = by_node(b, a) = std::max(0.0, green(a, a) + green(b, b) - 2.0 * cross);
    }
  }
  return {MetricKind::Resistance, detail::expand(by_node, nodes, g.query_node)};
}

inline Coords planar_position(const Network& net, const PointOnNetwork& p) {
  auto coords_of = [&](int vertex_id) {
    const Vertex& v = net.vertices()[net.vertex_index(vertex_id)];
    if (!v.coords) {
      throw Error(ErrorCode::MissingCoordinates, "vertex " + std::to_string(vertex_id) + " has no coordinates");
    }
    return *v.coords;
  };
  if (p.is_vertex()) return coords_of(p.vertex());
  const Edge& e = net.edges()[net.edge_index(p.edge())];
  const Coords a = coords_of(e.u);
  const Coords b = coords_of(e.v);
  const double s = p.offset() / e.length;
  return {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
}

/// Straight-line planar distances; interior points interpolated linearly between endpoint coordinates.
inline DistanceMatrix euclidean_matrix(const Network& net, const std::vector<PointOnNetwork>& points) {
  std::vector<Coords> xy;
  xy.reserve(points.size());
  for (const PointOnNetwork& p : points) {
    p.validate(net);
    xy.push_back(planar_position(net, p));
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Coords& a = xy[static_cast<std::size_t>(i)];
      const Coords& b = xy[static_cast<std::size_t>(j)];
      d(i, j) = d(j, i) = std::hypot(a[0] - b[0], a[1] - b[1]);
    }
  }
  return {MetricKind::AmbientEuclidean, std::move(d)};
}

inline DistanceMatrix distance_matrix(const Network& net, const std::vector<PointOnNetwork>& points,
                                      MetricKind metric) {
  switch (metric) {
    case MetricKind::Geodesic: return geodesic_matrix(net, points);
    case MetricKind::Resistance: return resistance_matrix(net, points);
    case MetricKind::AmbientEuclidean: return euclidean_matrix(net, points);
  }
  throw Error(ErrorCode::InvalidParams, "unknown metric");
}

/// Memoizes distance matrices by (network content, point list, metric). Safe for
/// concurrent readers; matrices are shared immutably.
class DistanceCache {
 public:
  explicit DistanceCache(std::size_t capacity = 64) : capacity_(capacity) {}

  std::shared_ptr<const DistanceMatrix> get(const Network& net, const std::vector<PointOnNetwork>& points,
                                            MetricKind metric) {
    const std::uint64_t key = detail::fnv1a(detail::fnv1a(net.content_hash(), hash_points(points)),
                                            static_cast<std::uint64_t>(metric));
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) {
        ++hits_;
        return it->second;
      }
    }
    auto computed = std::make_shared<const DistanceMatrix>(distance_matrix(net, points, metric));
    std::lock_guard lock(mutex_);
    if (entries_.size() >= capacity_) entries_.clear();
    return entries_.emplace(key, std::move(computed)).first->second;
  }

  [[nodiscard]] std::size_t hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::shared_ptr<const DistanceMatrix>> entries_;
  std::size_t hits_ = 0;
};

}  // namespace netkernel

#endif  // NETKERNEL_METRICS_HPP
