#include "netexp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "netexp/error.hpp"

namespace netexp {

namespace {

std::vector<ClusterId> planted_blocks(std::size_t blocks, std::size_t block_size) {
  std::vector<ClusterId> block_of(blocks * block_size);
  for (std::size_t i = 0; i < block_of.size(); ++i)
    block_of[i] = static_cast<ClusterId>(i / block_size);
  return block_of;
}

}  // namespace

PlantedGraph stochastic_block_model(const SbmSpec& spec) {
  if (spec.blocks == 0 || spec.block_size == 0) throw Error("SBM needs at least one non-empty block");
  if (spec.p_in < 0.0 || spec.p_in > 1.0 || spec.p_out < 0.0 || spec.p_out > 1.0)
    throw Error("SBM probabilities must lie in [0, 1]");
  const std::size_t n = spec.blocks * spec.block_size;
  PlantedGraph out;
  out.block_of = planted_blocks(spec.blocks, spec.block_size);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<Node, Node>> edges;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) {
      const double prob = out.block_of[i] == out.block_of[j] ? spec.p_in : spec.p_out;
      if (unit(rng) < prob) edges.emplace_back(i, j);
    }
  out.graph = Graph::from_edges(n, edges);
  return out;
}

PlantedGraph degree_corrected_sbm(const DegreeCorrectedSbmSpec& spec) {
  if (spec.blocks < 2 || spec.block_size < 2) throw Error("degree-corrected SBM needs >= 2 blocks of >= 2 nodes");
  if (spec.within_share < 0.0 || spec.within_share > 1.0) throw Error("within_share must lie in [0, 1]");
  if (spec.degree_spread < 0.0) throw Error("degree_spread must be non-negative");
  const std::size_t n = spec.blocks * spec.block_size;
  PlantedGraph out;
  out.block_of = planted_blocks(spec.blocks, spec.block_size);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> log_weight(0.0, spec.degree_spread);
  std::vector<double> weight(n);
  for (auto& w : weight) w = std::exp(log_weight(rng));
  const double mean_w = std::accumulate(weight.begin(), weight.end(), 0.0) / static_cast<double>(n);
  for (auto& w : weight) w /= mean_w;

  const double in_rate = spec.mean_degree * spec.within_share / static_cast<double>(spec.block_size - 1);
  const double out_rate = spec.mean_degree * (1.0 - spec.within_share) / static_cast<double>(n - spec.block_size);
  std::vector<std::pair<Node, Node>> edges;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) {
      const double rate = out.block_of[i] == out.block_of[j] ? in_rate : out_rate;
      if (unit(rng) < std::min(1.0, weight[i] * weight[j] * rate)) edges.emplace_back(i, j);
    }
  // Nodes left without an edge get one partner inside their own block.
  std::vector<std::uint8_t> touched(n, 0);
  for (const auto& [a, b] : edges) touched[a] = touched[b] = 1;
  std::uniform_int_distribution<std::size_t> other(0, spec.block_size - 2);
  for (Node i = 0; i < n; ++i) {
    if (touched[i]) continue;
    const std::size_t first = out.block_of[i] * spec.block_size;
    std::size_t j = first + other(rng);
    if (j >= i) ++j;
    edges.emplace_back(i, static_cast<Node>(j));
    touched[i] = touched[j] = 1;
  }
  out.graph = Graph::from_edges(n, edges);
  return out;
}

PlantedGraph tri_ring() {
  const std::vector<std::pair<Node, Node>> edges{{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5},
                                                 {6, 7}, {6, 8}, {7, 8}, {2, 3}, {5, 6}, {8, 0}};
  return {Graph::from_edges(9, edges), planted_blocks(3, 3)};
}

}  // namespace netexp
