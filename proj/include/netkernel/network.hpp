#ifndef NETKERNEL_NETWORK_HPP
#define NETKERNEL_NETWORK_HPP
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "netkernel/error.hpp"
#include "netkernel/random.hpp"

namespace netkernel {

using Coords = std::array<double, 2>;

struct Vertex {
  int id = 0;
  std::optional<Coords> coords;
};

struct Edge {
  int id = 0;
  int u = 0;
  int v = 0;
  double length = 1.0;
  // Drawing only. Metrics never read it.
  std::vector<Coords> geometry;
};

namespace detail {

struct Arc {
  int to;
  double length;
};

using AdjacencyList = std::vector<std::vector<Arc>>;

/// Single-source shortest paths over a nonnegatively weighted adjacency list.
inline std::vector<double> dijkstra(const AdjacencyList& adj, int source) {
  std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, node] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(node)]) continue;
    for (const Arc& arc : adj[static_cast<std::size_t>(node)]) {
      const double candidate = d + arc.length;
      if (candidate < dist[static_cast<std::size_t>(arc.to)]) {
        dist[static_cast<std::size_t>(arc.to)] = candidate;
        heap.emplace(candidate, arc.to);
      }
    }
  }
  return dist;
}

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t value) {
  for (int byte = 0; byte < 8; ++byte) {
    h ^= (value >> (8 * byte)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::uint64_t h, double value) {
  return fnv1a(h, std::bit_cast<std::uint64_t>(value));
}

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

}  // namespace detail

struct Incidence {
  std::size_t neighbor;  // vertex index
  std::size_t edge;      // edge index
};

/// Immutable graph with Euclidean edges: finite, simple, connected, positive edge lengths.
class Network {
 public:
  /// Validates and builds. Throws Error with EmptyGraph, DuplicateVertex, DanglingEndpoint,
  /// SelfLoop, NonPositiveLength, DuplicateEdge or DisconnectedGraph.
  static Network build(std::vector<Vertex> vertices, std::vector<Edge> edges) {
    Network net;
    if (vertices.empty()) throw Error(ErrorCode::EmptyGraph, "network has no vertices");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (!net.vertex_index_.emplace(vertices[i].id, i).second) {
        throw Error(ErrorCode::DuplicateVertex, "vertex id " + std::to_string(vertices[i].id) + " repeated");
      }
    }
    std::unordered_map<std::uint64_t, int> pairs;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Edge& e = edges[k];
      const std::string tag = "edge " + std::to_string(e.id);
      const auto iu = net.vertex_index_.find(e.u);
      const auto iv = net.vertex_index_.find(e.v);
      if (iu == net.vertex_index_.end() || iv == net.vertex_index_.end()) {
        throw Error(ErrorCode::DanglingEndpoint, tag + " references a missing vertex");
      }
      if (e.u == e.v) throw Error(ErrorCode::SelfLoop, tag + " joins vertex " + std::to_string(e.u) + " to itself");
      if (!(e.length > 0.0) || !std::isfinite(e.length)) {
        throw Error(ErrorCode::NonPositiveLength, tag + " has non-positive length");
      }
      const auto a = static_cast<std::uint64_t>(std::min(iu->second, iv->second));
      const auto b = static_cast<std::uint64_t>(std::max(iu->second, iv->second));
      if (!pairs.emplace((a << 32) | b, e.id).second) {
        throw Error(ErrorCode::DuplicateEdge, tag + " repeats the vertex pair (" + std::to_string(e.u) + "," +
                                                  std::to_string(e.v) + ")");
      }
      if (!net.edge_index_.emplace(e.id, k).second) {
        throw Error(ErrorCode::DuplicateEdge, tag + " id repeated");
      }
    }
    net.vertices_ = std::move(vertices);
    net.edges_ = std::move(edges);
    net.incidence_.assign(net.vertices_.size(), {});
    for (std::size_t k = 0; k < net.edges_.size(); ++k) {
      const std::size_t a = net.vertex_index_.at(net.edges_[k].u);
      const std::size_t b = net.vertex_index_.at(net.edges_[k].v);
      net.incidence_[a].push_back({b, k});
      net.incidence_[b].push_back({a, k});
    }
    std::vector<char> seen(net.vertices_.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (const Incidence& inc : net.incidence_[x]) {
        if (!seen[inc.neighbor]) {
          seen[inc.neighbor] = 1;
          ++reached;
          stack.push_back(inc.neighbor);
        }
      }
    }
    if (reached != net.vertices_.size()) {
      throw Error(ErrorCode::DisconnectedGraph, std::to_string(net.vertices_.size() - reached) +
                                                    " vertices unreachable from vertex " +
                                                    std::to_string(net.vertices_[0].id));
    }
    net.hash_ = net.compute_hash();
    return net;
  }

  [[nodiscard]] const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_.size(); }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
  [[nodiscard]] const std::vector<Incidence>& incident(std::size_t vertex_index) const {
    return incidence_.at(vertex_index);
  }
  [[nodiscard]] std::size_t degree(std::size_t vertex_index) const { return incidence_.at(vertex_index).size(); }

  [[nodiscard]] std::optional<std::size_t> find_vertex(int id) const {
    const auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] std::optional<std::size_t> find_edge(int id) const {
    const auto it = edge_index_.find(id);
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] std::size_t vertex_index(int id) const {
    if (auto i = find_vertex(id)) return *i;
    throw Error(ErrorCode::InvalidPoint, "unknown vertex id " + std::to_string(id));
  }
  [[nodiscard]] std::size_t edge_index(int id) const {
    if (auto i = find_edge(id)) return *i;
    throw Error(ErrorCode::InvalidPoint, "unknown edge id " + std::to_string(id));
  }

  [[nodiscard]] bool has_coordinates() const {
    return std::all_of(vertices_.begin(), vertices_.end(), [](const Vertex& v) { return v.coords.has_value(); });
  }
  [[nodiscard]] double total_length() const {
    double total = 0.0;
    for (const Edge& e : edges_) total += e.length;
    return total;
  }

  /// Vertex-level adjacency in index space.
  [[nodiscard]] detail::AdjacencyList adjacency() const {
    detail::AdjacencyList adj(vertices_.size());
    for (const Edge& e : edges_) {
      const int a = static_cast<int>(vertex_index_.at(e.u));
      const int b = static_cast<int>(vertex_index_.at(e.v));
      adj[static_cast<std::size_t>(a)].push_back({b, e.length});
      adj[static_cast<std::size_t>(b)].push_back({a, e.length});
    }
    return adj;
  }

  /// Largest shortest-path distance between two vertices. On a graph with Euclidean
  /// edges this bounds every point-to-point geodesic distance up to one edge length.
  [[nodiscard]] double vertex_diameter() const {
    const auto adj = adjacency();
    double diameter = 0.0;
    for (std::size_t s = 0; s < vertices_.size(); ++s) {
      for (double d : detail::dijkstra(adj, static_cast<int>(s))) diameter = std::max(diameter, d);
    }
    return diameter;
  }

  /// FNV-1a over ids, lengths and coordinates; equal content gives equal hashes.
  [[nodiscard]] std::uint64_t content_hash() const noexcept { return hash_; }

 private:
  Network() = default;

  [[nodiscard]] std::uint64_t compute_hash() const {
    std::uint64_t h = detail::kFnvOffset;
    for (const Vertex& v : vertices_) {
      h = detail::fnv1a(h, static_cast<std::uint64_t>(v.id));
      if (v.coords) {
        h = detail::fnv1a(h, (*v.coords)[0]);
        h = detail::fnv1a(h, (*v.coords)[1]);
      }
    }
    for (const Edge& e : edges_) {
      h = detail::fnv1a(h, static_cast<std::uint64_t>(e.id));
      h = detail::fnv1a(h, static_cast<std::uint64_t>(e.u));
      h = detail::fnv1a(h, static_cast<std::uint64_t>(e.v));
      h = detail::fnv1a(h, e.length);
    }
    return h;
  }

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::unordered_map<int, std::size_t> vertex_index_;
  std::unordered_map<int, std::size_t> edge_index_;
  std::vector<std::vector<Incidence>> incidence_;
  std::uint64_t hash_ = 0;
};

inline Network build_network(std::vector<Vertex> vertices, std::vector<Edge> edges) {
  return Network::build(std::move(vertices), std::move(edges));
}

// ---------------------------------------------------------------------------
// Points on the network

struct AtVertex {
  int vertex = 0;
  friend bool operator==(const AtVertex&, const AtVertex&) = default;
};

struct OnEdge {
  int edge = 0;
  double offset = 0.0;  // measured from edge.u, strictly inside (0, length)
  friend bool operator==(const OnEdge&, const OnEdge&) = default;
};

/// A location on a vertex or in the interior of an edge. Vertex locations are always
/// AtVertex; OnEdge offsets of 0 or length are rejected so equality is decidable.
class PointOnNetwork {
 public:
  using Location = std::variant<AtVertex, OnEdge>;

  static PointOnNetwork at_vertex(int vertex_id) { return PointOnNetwork(AtVertex{vertex_id}); }

  static PointOnNetwork on_edge(int edge_id, double offset) {
    if (!(offset > 0.0) || !std::isfinite(offset)) {
      throw Error(ErrorCode::InvalidPoint, "edge offset must lie strictly inside the edge (got " +
                                               std::to_string(offset) + ")");
    }
    return PointOnNetwork(OnEdge{edge_id, offset});
  }

  /// Checked against a network: ids exist and offset < length.
  static PointOnNetwork on_edge(const Network& net, int edge_id, double offset) {
    const Edge& e = net.edges()[net.edge_index(edge_id)];
    if (!(offset > 0.0 && offset < e.length)) {
      throw Error(ErrorCode::InvalidPoint, "offset " + std::to_string(offset) + " not in (0, " +
                                               std::to_string(e.length) + ") on edge " + std::to_string(edge_id) +
                                               "; endpoints must be given as vertex points");
    }
    return PointOnNetwork(OnEdge{edge_id, offset});
  }

  [[nodiscard]] bool is_vertex() const noexcept { return std::holds_alternative<AtVertex>(loc_); }
  [[nodiscard]] const Location& location() const noexcept { return loc_; }
  [[nodiscard]] int vertex() const { return std::get<AtVertex>(loc_).vertex; }
  [[nodiscard]] int edge() const { return std::get<OnEdge>(loc_).edge; }
  [[nodiscard]] double offset() const { return std::get<OnEdge>(loc_).offset; }

  /// Throws InvalidPoint if the point does not lie on `net`.
  void validate(const Network& net) const {
    if (is_vertex()) {
      (void)net.vertex_index(vertex());
      return;
    }
    const Edge& e = net.edges()[net.edge_index(edge())];
    if (!(offset() > 0.0 && offset() < e.length)) {
      throw Error(ErrorCode::InvalidPoint,
                  "offset " + std::to_string(offset()) + " outside (0, length) on edge " + std::to_string(edge()));
    }
  }

  friend bool operator==(const PointOnNetwork&, const PointOnNetwork&) = default;

 private:
  explicit PointOnNetwork(Location loc) : loc_(loc) {}
  Location loc_;
};

inline std::uint64_t hash_points(const std::vector<PointOnNetwork>& points) {
  std::uint64_t h = detail::kFnvOffset;
  for (const PointOnNetwork& p : points) {
    if (p.is_vertex()) {
      h = detail::fnv1a(h, std::uint64_t{0});
      h = detail::fnv1a(h, static_cast<std::uint64_t>(p.vertex()));
    } else {
      h = detail::fnv1a(h, std::uint64_t{1});
      h = detail::fnv1a(h, static_cast<std::uint64_t>(p.edge()));
      h = detail::fnv1a(h, p.offset());
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Distance consistency and topology

/// Edges whose endpoints are joined by a strictly shorter path (relative tolerance 1e-12).
/// An empty result means every edge is itself a shortest path.
inline std::vector<int> check_distance_consistency(const Network& net) {
  constexpr double kRelTol = 1e-12;
  const auto adj = net.adjacency();
  std::vector<int> violating;
  std::unordered_map<std::size_t, std::vector<double>> rows;
  for (const Edge& e : net.edges()) {
    const std::size_t a = net.vertex_index(e.u);
    const std::size_t b = net.vertex_index(e.v);
    auto it = rows.find(a);
    if (it == rows.end()) it = rows.emplace(a, detail::dijkstra(adj, static_cast<int>(a))).first;
    if (it->second[b] < e.length * (1.0 - kRelTol)) violating.push_back(e.id);
  }
  return violating;
}

struct TopologyClass {
  enum class Kind { EuclideanTree, OneSumCyclesTrees, General };
  Kind kind = Kind::General;
  int leaf_count = 0;  // meaningful for EuclideanTree only

  [[nodiscard]] bool is_tree() const noexcept { return kind == Kind::EuclideanTree; }
  /// Trees count as 1-sums of cycles and trees.
  [[nodiscard]] bool is_one_sum() const noexcept { return kind != Kind::General; }
  friend bool operator==(const TopologyClass&, const TopologyClass&) = default;
};

inline std::string to_string(const TopologyClass& t) {
  switch (t.kind) {
    case TopologyClass::Kind::EuclideanTree: return "euclidean_tree(leaves=" + std::to_string(t.leaf_count) + ")";
    case TopologyClass::Kind::OneSumCyclesTrees: return "one_sum_cycles_trees";
    case TopologyClass::Kind::General: return "general";
  }
  return "general";
}

struct Block {
  std::vector<std::size_t> edges;  // edge indices
  std::size_t vertex_count = 0;
};

/// Biconnected blocks by the Hopcroft-Tarjan edge-stack DFS (iterative).
inline std::vector<Block> biconnected_blocks(const Network& net) {
  const std::size_t n = net.vertex_count();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<Block> blocks;
  std::vector<std::size_t> edge_stack;
  int timer = 0;

  struct Frame {
    std::size_t vertex;
    std::size_t parent_edge;
    std::size_t next = 0;
  };
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  auto pop_block = [&](std::size_t until_edge) {
    Block block;
    std::vector<std::size_t> verts;
    while (!edge_stack.empty()) {
      const std::size_t e = edge_stack.back();
      edge_stack.pop_back();
      block.edges.push_back(e);
      verts.push_back(net.vertex_index(net.edges()[e].u));
      verts.push_back(net.vertex_index(net.edges()[e].v));
      if (e == until_edge) break;
    }
    std::sort(verts.begin(), verts.end());
    block.vertex_count = static_cast<std::size_t>(std::unique(verts.begin(), verts.end()) - verts.begin());
    blocks.push_back(std::move(block));
  };

  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, kNone, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& inc = net.incident(f.vertex);
      if (f.next < inc.size()) {
        const Incidence arc = inc[f.next++];
        if (arc.edge == f.parent_edge) continue;
        if (disc[arc.neighbor] < 0) {
          edge_stack.push_back(arc.edge);
          disc[arc.neighbor] = low[arc.neighbor] = timer++;
          stack.push_back({arc.neighbor, arc.edge, 0});
        } else if (disc[arc.neighbor] < disc[f.vertex]) {
          edge_stack.push_back(arc.edge);
          low[f.vertex] = std::min(low[f.vertex], disc[arc.neighbor]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& parent = stack.back();
          low[parent.vertex] = std::min(low[parent.vertex], low[done.vertex]);
          if (low[done.vertex] >= disc[parent.vertex]) pop_block(done.parent_edge);
        }
      }
    }
  }
  return blocks;
}

/// EuclideanTree with exact leaf count when acyclic; OneSumCyclesTrees when every
/// biconnected block is a single edge or a simple cycle; General otherwise.
inline TopologyClass classify_topology(const Network& net) {
  if (net.edge_count() + 1 == net.vertex_count()) {
    int leaves = 0;
    for (std::size_t i = 0; i < net.vertex_count(); ++i) leaves += net.degree(i) == 1 ? 1 : 0;
    return {TopologyClass::Kind::EuclideanTree, leaves};
  }
  for (const Block& b : biconnected_blocks(net)) {
    if (b.edges.size() == 1) continue;
    // A biconnected simple graph with as many edges as vertices is a chordless cycle.
    if (b.edges.size() != b.vertex_count) return {TopologyClass::Kind::General, 0};
  }
  return {TopologyClass::Kind::OneSumCyclesTrees, 0};
}

// ---------------------------------------------------------------------------
// Sampling

/// Uniform by length measure over the union of edges; deterministic for a seed.
inline std::vector<PointOnNetwork> sample_points(const Network& net, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidParams, "sample_points needs n >= 1");
  if (net.edge_count() == 0) {
    return std::vector<PointOnNetwork>(n, PointOnNetwork::at_vertex(net.vertices()[0].id));
  }
  std::vector<double> cumulative;
  cumulative.reserve(net.edge_count());
  double total = 0.0;
  for (const Edge& e : net.edges()) cumulative.push_back(total += e.length);
  Rng rng = make_rng(seed, 0x5a3b1e);
  std::vector<PointOnNetwork> points;
  points.reserve(n);
  while (points.size() < n) {
    const double s = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    if (it == cumulative.end()) continue;
    const auto k = static_cast<std::size_t>(it - cumulative.begin());
    const Edge& e = net.edges()[k];
    const double offset = s - (*it - e.length);
    if (!(offset > 0.0 && offset < e.length)) continue;
    points.push_back(PointOnNetwork::on_edge(e.id, offset));
  }
  return points;
}

}  // namespace netkernel

#endif  // NETKERNEL_NETWORK_HPP
