#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "netexp/graph.hpp"

namespace netexp {

struct SbmSpec {
  std::size_t blocks = 10;
  std::size_t block_size = 20;
  double p_in = 0.3;
  double p_out = 0.01;
  std::uint64_t seed = 1;
};

/// Degree-corrected SBM: node weights are lognormal with log-scale
/// `degree_spread`, normalized to mean 1, and pair (i, j) is linked with
/// probability min(1, w_i w_j * rate). The two rates are set from
/// mean_degree and within_share before clipping, so heavy spreads realize a
/// lower mean degree. Nodes left isolated are joined to a random node of
/// their own block. The defaults give a graph whose Louvain statistics at
/// resolution 5 resemble a mid-sized Facebook school network.
struct DegreeCorrectedSbmSpec {
  std::size_t blocks = 95;
  std::size_t block_size = 122;
  double mean_degree = 98.0;
  double within_share = 0.55;
  double degree_spread = 1.65;
  std::uint64_t seed = 1;
};

struct PlantedGraph {
  Graph graph;
  std::vector<ClusterId> block_of;
};

PlantedGraph stochastic_block_model(const SbmSpec& spec);
PlantedGraph degree_corrected_sbm(const DegreeCorrectedSbmSpec& spec);

/// Nine nodes in three triangles {0,1,2}, {3,4,5}, {6,7,8} joined in a ring
/// by the edges 2-3, 5-6 and 8-0. With the triangles as clusters the
/// interior nodes are 1, 4 and 7 and every other node touches two clusters.
PlantedGraph tri_ring();

}  // namespace netexp
