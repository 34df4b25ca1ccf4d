#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "netexp/graph.hpp"

namespace netexp::testing {

inline Graph graph_from(std::size_t n, std::vector<std::pair<Node, Node>> edges) {
  return Graph::from_edges(n, edges);
}

inline Graph parse(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in).graph;
}

/// Erdos-Renyi G(n, q).
inline Graph random_graph(std::size_t n, double q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(q);
  std::vector<std::pair<Node, Node>> edges;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

/// Uniform random labels in 0..k-1, relabeled so every id in 0..K'-1 is used.
inline std::vector<ClusterId> random_clusters(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<ClusterId> raw(n);
  for (auto& c : raw) c = static_cast<ClusterId>(pick(rng));
  std::vector<ClusterId> ids(raw);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (auto& c : raw) c = static_cast<ClusterId>(std::lower_bound(ids.begin(), ids.end(), c) - ids.begin());
  return raw;
}

/// Dense 0/1 adjacency, row-major.
inline std::vector<std::vector<double>> dense_adjacency(const Graph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (Node i = 0; i < n; ++i)
    for (Node j : g.neighbors(i)) a[i][j] = 1.0;
  return a;
}

inline std::vector<std::uint8_t> bits_of(std::uint64_t mask, std::size_t k) {
  std::vector<std::uint8_t> bits(k);
  for (std::size_t c = 0; c < k; ++c) bits[c] = static_cast<std::uint8_t>((mask >> c) & 1U);
  return bits;
}

}  // namespace netexp::testing
