#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include "netkernel/network.hpp"

namespace testing_helpers {

struct E {
  int u, v;
  double length;
};

/// Vertices 1..n inferred from the edge list; edge ids 1..m in order.
inline netkernel::Network make_net(std::initializer_list<E> edges) {
  std::vector<netkernel::Vertex> vs;
  std::vector<netkernel::Edge> es;
  int max_id = 0;
  int id = 1;
  for (const E& e : edges) {
    max_id = std::max({max_id, e.u, e.v});
    es.push_back({id++, e.u, e.v, e.length, {}});
  }
  for (int v = 1; v <= max_id; ++v) vs.push_back({v, std::nullopt});
  return netkernel::Network::build(vs, es);
}

/// Cycle of n vertices with the given edge lengths (vertex k joined to k+1).
inline netkernel::Network make_cycle(const std::vector<double>& lengths) {
  std::vector<netkernel::Vertex> vs;
  std::vector<netkernel::Edge> es;
  const int n = static_cast<int>(lengths.size());
  for (int k = 1; k <= n; ++k) vs.push_back({k, std::nullopt});
  for (int k = 1; k <= n; ++k) es.push_back({k, k, k % n + 1, lengths[static_cast<std::size_t>(k - 1)], {}});
  return netkernel::Network::build(vs, es);
}

/// Two hubs joined by three internally disjoint paths of 2, 2 and 3 edges.
inline netkernel::Network make_theta() {
  return make_net({{1, 3, 1.0}, {3, 2, 1.0}, {1, 4, 1.0}, {4, 2, 1.0}, {1, 5, 1.0}, {5, 6, 0.5}, {6, 2, 0.5}});
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("netkernel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_helpers
