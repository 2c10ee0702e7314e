#ifndef NETKERNEL_GENERATE_HPP
#define NETKERNEL_GENERATE_HPP
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "netkernel/error.hpp"
#include "netkernel/network.hpp"
#include "netkernel/random.hpp"

namespace netkernel {

enum class GraphKind { Path, Cycle, Star, RandomTree, RiverTree, CycleWithPendantTrees };

inline GraphKind parse_graph_kind(std::string_view name) {
  if (name == "path") return GraphKind::Path;
  if (name == "cycle") return GraphKind::Cycle;
  if (name == "star") return GraphKind::Star;
  if (name == "random_tree") return GraphKind::RandomTree;
  if (name == "river_tree") return GraphKind::RiverTree;
  if (name == "cycle_with_pendant_trees") return GraphKind::CycleWithPendantTrees;
  throw Error(ErrorCode::InvalidParams, "unknown graph kind '" + std::string(name) + "'");
}

inline std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Path: return "path";
    case GraphKind::Cycle: return "cycle";
    case GraphKind::Star: return "star";
    case GraphKind::RandomTree: return "random_tree";
    case GraphKind::RiverTree: return "river_tree";
    case GraphKind::CycleWithPendantTrees: return "cycle_with_pendant_trees";
  }
  return "path";
}

struct GenerateParams {
  // Vertex count for path/cycle/random_tree, spoke count for star, cycle length for
  // cycle_with_pendant_trees. Branching depth for river_tree.
  std::size_t n = 10;
  double min_length = 1.0;
  double max_length = 1.0;
  // Planar embedding: chord = length / detour, detour uniform in [detour_min, detour_max].
  double detour_min = 1.0;
  double detour_max = 1.0;
  // river_tree: root edge length, per-level length ratio, branching half-angle (degrees).
  double root_length = 50.0;
  double decay = 0.7;
  double branch_angle = 50.0;
  double angle_jitter = 25.0;
  // cycle_with_pendant_trees: vertices per pendant tree (excluding its cycle vertex).
  std::size_t pendant_size = 3;
};

namespace detail {

class GraphBuilder {
 public:
  int add_vertex(Coords c) {
    const int id = static_cast<int>(vertices_.size());
    vertices_.push_back({id, c});
    return id;
  }
  void add_edge(int u, int v, double length) {
    edges_.push_back({static_cast<int>(edges_.size()), u, v, length, {}});
  }
  [[nodiscard]] Coords coords(int id) const { return *vertices_[static_cast<std::size_t>(id)].coords; }
  Network build() { return Network::build(std::move(vertices_), std::move(edges_)); }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
};

inline Coords step(Coords from, double chord, double angle) {
  return {from[0] + chord * std::cos(angle), from[1] + chord * std::sin(angle)};
}

inline void grow_random_tree(GraphBuilder& g, Rng& rng, const GenerateParams& p, std::vector<int> attach_to,
                             std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    const int parent = attach_to[uniform_index(rng, attach_to.size())];
    const double length = uniform(rng, p.min_length, p.max_length);
    const double detour = uniform(rng, p.detour_min, p.detour_max);
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const int child = g.add_vertex(step(g.coords(parent), length / detour, angle));
    g.add_edge(parent, child, length);
    attach_to.push_back(child);
  }
}

inline std::vector<int> add_cycle(GraphBuilder& g, Rng& rng, const GenerateParams& p, std::size_t n) {
  std::vector<double> lengths(n);
  double total = 0.0;
  for (double& l : lengths) total += (l = uniform(rng, p.min_length, p.max_length));
  for (double l : lengths) {
    if (l > total - l) throw Error(ErrorCode::InvalidParams, "cycle lengths violate distance consistency");
  }
  // Vertices on a circle of circumference `total`; chords never exceed arcs.
  const double radius = total / (2.0 * std::numbers::pi);
  std::vector<int> ids;
  double arc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = arc / radius;
    ids.push_back(g.add_vertex({radius * std::cos(theta), radius * std::sin(theta)}));
    arc += lengths[k];
  }
  for (std::size_t k = 0; k < n; ++k) g.add_edge(ids[k], ids[(k + 1) % n], lengths[k]);
  return ids;
}

}  // namespace detail

/// Deterministic fixture networks with planar coordinates. Every embedding keeps
/// straight-line distance at or below network distance.
inline Network generate(GraphKind kind, const GenerateParams& p, std::uint64_t seed) {
  if (!(p.min_length > 0.0) || p.max_length < p.min_length) {
    throw Error(ErrorCode::InvalidParams, "need 0 < min_length <= max_length");
  }
  if (!(p.detour_min >= 1.0) || p.detour_max < p.detour_min) {
    throw Error(ErrorCode::InvalidParams, "need 1 <= detour_min <= detour_max");
  }
  Rng rng = make_rng(seed, 0x9e17);
  detail::GraphBuilder g;
  switch (kind) {
    case GraphKind::Path: {
      if (p.n < 2) throw Error(ErrorCode::InvalidParams, "path needs n >= 2");
      int prev = g.add_vertex({0.0, 0.0});
      for (std::size_t k = 1; k < p.n; ++k) {
        const double length = uniform(rng, p.min_length, p.max_length);
        const double detour = uniform(rng, p.detour_min, p.detour_max);
        const int next = g.add_vertex(detail::step(g.coords(prev), length / detour, 0.0));
        g.add_edge(prev, next, length);
        prev = next;
      }
      break;
    }
    case GraphKind::Cycle: {
      if (p.n < 3) throw Error(ErrorCode::InvalidParams, "cycle needs n >= 3");
      detail::add_cycle(g, rng, p, p.n);
      break;
    }
    case GraphKind::Star: {
      if (p.n < 1) throw Error(ErrorCode::InvalidParams, "star needs at least one spoke");
      const int hub = g.add_vertex({0.0, 0.0});
      for (std::size_t k = 0; k < p.n; ++k) {
        const double length = uniform(rng, p.min_length, p.max_length);
        const double detour = uniform(rng, p.detour_min, p.detour_max);
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p.n);
        g.add_edge(hub, g.add_vertex(detail::step({0.0, 0.0}, length / detour, angle)), length);
      }
      break;
    }
    case GraphKind::RandomTree: {
      if (p.n < 2) throw Error(ErrorCode::InvalidParams, "random_tree needs n >= 2");
      const int root = g.add_vertex({0.0, 0.0});
      detail::grow_random_tree(g, rng, p, {root}, p.n - 1);
      break;
    }
    case GraphKind::RiverTree: {
      // Outlet, trunk, then binary branching for n levels with lengths shrinking by
      // `decay` per level; the +/-10% jitter keeps lengths strictly decreasing for decay < 0.8.
      if (p.n < 1 || p.n > 16) throw Error(ErrorCode::InvalidParams, "river_tree depth must be in [1, 16]");
      if (!(p.decay > 0.0 && p.decay < 0.8)) throw Error(ErrorCode::InvalidParams, "river_tree decay in (0, 0.8)");
      if (!(p.root_length > 0.0)) throw Error(ErrorCode::InvalidParams, "river_tree root_length must be positive");
      constexpr double kDeg = std::numbers::pi / 180.0;
      struct Tip {
        int vertex;
        double heading;
      };
      const int outlet = g.add_vertex({0.0, 0.0});
      const double trunk_detour = uniform(rng, p.detour_min, p.detour_max);
      const int first = g.add_vertex(detail::step({0.0, 0.0}, p.root_length / trunk_detour, std::numbers::pi / 2));
      g.add_edge(outlet, first, p.root_length);
      std::vector<Tip> tips{{first, std::numbers::pi / 2}};
      double level_length = p.root_length;
      for (std::size_t level = 0; level < p.n; ++level) {
        level_length *= p.decay;
        std::vector<Tip> next;
        for (const Tip& tip : tips) {
          for (int side : {-1, 1}) {
            const double length = level_length * uniform(rng, 0.9, 1.1);
            const double detour = uniform(rng, p.detour_min, p.detour_max);
            const double heading =
                tip.heading + side * p.branch_angle * kDeg + uniform(rng, -p.angle_jitter, p.angle_jitter) * kDeg;
            const int child = g.add_vertex(detail::step(g.coords(tip.vertex), length / detour, heading));
            g.add_edge(tip.vertex, child, length);
            next.push_back({child, heading});
          }
        }
        tips = std::move(next);
      }
      break;
    }
    case GraphKind::CycleWithPendantTrees: {
      if (p.n < 3) throw Error(ErrorCode::InvalidParams, "cycle_with_pendant_trees needs n >= 3");
      const auto ring = detail::add_cycle(g, rng, p, p.n);
      for (int anchor : ring) detail::grow_random_tree(g, rng, p, {anchor}, p.pendant_size);
      break;
    }
  }
  return g.build();
}

}  // namespace netkernel

#endif  // NETKERNEL_GENERATE_HPP
