#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netexp/graph.hpp"

namespace netexp {

struct ClusteringStats {
  std::size_t cluster_count = 0;
  double interior_fraction = 0.0;
  double within_edge_fraction = 0.0;
  double modularity = 0.0;
};

struct LouvainOptions {
  double resolution = 1.0;
  std::uint64_t seed = 0;
  /// A local-move phase ends once a full pass gains less than this.
  double tolerance = 1e-7;
};

/// Modularity after every local-move pass, across all aggregation levels.
struct LouvainTrace {
  std::vector<double> pass_modularity;
  std::size_t levels = 0;
};

/// Louvain modularity maximization with a resolution parameter.
///
/// Nodes are visited in a seeded shuffled order on every pass; ties in the
/// modularity gain go to the lowest community index. Cluster ids of the
/// result are numbered by first appearance in node order. The result is a
/// pure function of (g, options).
Partition louvain(const Graph& g, const LouvainOptions& options, LouvainTrace* trace = nullptr);

/// Q = sum_c [ e_c / m - resolution * (d_c / 2m)^2 ].
/// Throws Error on an edgeless graph.
double modularity(const Graph& g, std::span<const ClusterId> cluster_of, double resolution);
double modularity(const Graph& g, const Partition& part, double resolution);

ClusteringStats clustering_stats(const Graph& g, const Partition& part, double resolution);

}  // namespace netexp
