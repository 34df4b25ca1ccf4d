#include "netexp/community.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "netexp/error.hpp"

namespace netexp {

namespace {

// Weighted graph used across aggregation levels. `self_weight[i]` holds the
// weight of ordered pairs inside the super-node, so strength[i] equals
// self_weight[i] plus the weights of its links.
struct WeightedGraph {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  std::vector<double> self_weight;
  std::vector<double> strength;

  std::size_t size() const { return self_weight.size(); }
};

WeightedGraph from_graph(const Graph& g) {
  WeightedGraph wg;
  const auto n = g.node_count();
  wg.offsets.assign(g.offsets().begin(), g.offsets().end());
  wg.targets.assign(g.adjacency().begin(), g.adjacency().end());
  wg.weights.assign(wg.targets.size(), 1.0);
  wg.self_weight.assign(n, 0.0);
  wg.strength.resize(n);
  for (Node i = 0; i < n; ++i) wg.strength[i] = static_cast<double>(g.degree(i));
  return wg;
}

double level_modularity(const WeightedGraph& wg, const std::vector<std::uint32_t>& comm,
                        std::size_t community_slots, double two_m, double resolution) {
  std::vector<double> inside(community_slots, 0.0);
  std::vector<double> total(community_slots, 0.0);
  for (std::size_t i = 0; i < wg.size(); ++i) {
    const auto c = comm[i];
    total[c] += wg.strength[i];
    inside[c] += wg.self_weight[i];
    for (std::size_t e = wg.offsets[i]; e < wg.offsets[i + 1]; ++e)
      if (comm[wg.targets[e]] == c) inside[c] += wg.weights[e];
  }
  double q = 0.0;
  for (std::size_t c = 0; c < community_slots; ++c) {
    const double share = total[c] / two_m;
    q += inside[c] / two_m - resolution * share * share;
  }
  return q;
}

// Runs local-move passes until a pass gains less than the tolerance.
// Returns true when at least one node changed community.
bool local_moves(const WeightedGraph& wg, std::vector<std::uint32_t>& comm, double two_m,
                 const LouvainOptions& options, std::mt19937_64& rng, LouvainTrace* trace) {
  const std::size_t n = wg.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) total[comm[i]] += wg.strength[i];

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::vector<double> link_weight(n, 0.0);
  std::vector<std::uint32_t> touched;
  touched.reserve(64);

  bool moved_any = false;
  double q = level_modularity(wg, comm, n, two_m, options.resolution);
  while (true) {
    std::shuffle(order.begin(), order.end(), rng);
    bool moved = false;
    for (const auto i : order) {
      const auto home = comm[i];
      const double k = wg.strength[i];
      for (std::size_t e = wg.offsets[i]; e < wg.offsets[i + 1]; ++e) {
        const auto c = comm[wg.targets[e]];
        if (link_weight[c] == 0.0) touched.push_back(c);
        link_weight[c] += wg.weights[e];
      }
      total[home] -= k;

      auto best = home;
      double best_gain = link_weight[home] - options.resolution * total[home] * k / two_m;
      for (const auto c : touched) {
        const double gain = link_weight[c] - options.resolution * total[c] * k / two_m;
        if (gain > best_gain || (gain == best_gain && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      total[best] += k;
      if (best != home) {
        comm[i] = best;
        moved = true;
      }
      for (const auto c : touched) link_weight[c] = 0.0;
      touched.clear();
    }
    const double next_q = level_modularity(wg, comm, n, two_m, options.resolution);
    if (trace) trace->pass_modularity.push_back(next_q);
    moved_any = moved_any || moved;
    const double gain = next_q - q;
    q = next_q;
    if (!moved || gain < options.tolerance) break;
  }
  return moved_any;
}

// Renumbers `comm` densely by first appearance and returns the count.
std::size_t renumber(std::vector<std::uint32_t>& comm) {
  constexpr auto unset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(comm.size(), unset);
  std::uint32_t next = 0;
  for (auto& c : comm) {
    if (remap[c] == unset) remap[c] = next++;
    c = remap[c];
  }
  return next;
}

WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<std::uint32_t>& comm,
                        std::size_t count) {
  std::vector<std::vector<std::uint32_t>> members(count);
  for (std::size_t i = 0; i < wg.size(); ++i) members[comm[i]].push_back(static_cast<std::uint32_t>(i));

  WeightedGraph out;
  out.offsets.assign(1, 0);
  out.self_weight.assign(count, 0.0);
  out.strength.assign(count, 0.0);
  std::vector<double> acc(count, 0.0);
  std::vector<std::uint32_t> touched;
  for (std::size_t c = 0; c < count; ++c) {
    for (const auto i : members[c]) {
      out.self_weight[c] += wg.self_weight[i];
      out.strength[c] += wg.strength[i];
      for (std::size_t e = wg.offsets[i]; e < wg.offsets[i + 1]; ++e) {
        const auto d = comm[wg.targets[e]];
        if (d == c) {
          out.self_weight[c] += wg.weights[e];
          continue;
        }
        if (acc[d] == 0.0) touched.push_back(d);
        acc[d] += wg.weights[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const auto d : touched) {
      out.targets.push_back(d);
      out.weights.push_back(acc[d]);
      acc[d] = 0.0;
    }
    touched.clear();
    out.offsets.push_back(out.targets.size());
  }
  return out;
}

}  // namespace

Partition louvain(const Graph& g, const LouvainOptions& options, LouvainTrace* trace) {
  if (g.node_count() == 0) throw Error("louvain requires a non-empty graph");
  if (!(options.resolution > 0.0)) throw Error("resolution must be positive");

  std::vector<ClusterId> assignment(g.node_count());
  std::iota(assignment.begin(), assignment.end(), ClusterId{0});
  if (g.edge_count() == 0) return decompose(g, std::move(assignment));

  std::mt19937_64 rng(options.seed);
  WeightedGraph level = from_graph(g);
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  while (true) {
    std::vector<std::uint32_t> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0U);
    if (trace) ++trace->levels;
    const bool moved = local_moves(level, comm, two_m, options, rng, trace);
    if (!moved) break;
    const auto count = renumber(comm);
    for (auto& a : assignment) a = comm[a];
    if (count == level.size()) break;
    level = aggregate(level, comm, count);
  }
  renumber(assignment);
  return decompose(g, std::move(assignment));
}

double modularity(const Graph& g, std::span<const ClusterId> cluster_of, double resolution) {
  if (g.edge_count() == 0) throw Error("modularity is undefined on an edgeless graph");
  if (cluster_of.size() != g.node_count()) throw Error("cluster assignment must cover every node");
  std::size_t k = 0;
  for (auto c : cluster_of) k = std::max<std::size_t>(k, std::size_t{c} + 1);
  std::vector<double> internal(k, 0.0);
  std::vector<double> degree_sum(k, 0.0);
  for (Node i = 0; i < g.node_count(); ++i) {
    degree_sum[cluster_of[i]] += static_cast<double>(g.degree(i));
    for (Node j : g.neighbors(i))
      if (i < j && cluster_of[i] == cluster_of[j]) internal[cluster_of[i]] += 1.0;
  }
  const double m = static_cast<double>(g.edge_count());
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = degree_sum[c] / (2.0 * m);
    q += internal[c] / m - resolution * share * share;
  }
  return q;
}

double modularity(const Graph& g, const Partition& part, double resolution) {
  return modularity(g, part.cluster_of, resolution);
}

ClusteringStats clustering_stats(const Graph& g, const Partition& part, double resolution) {
  ClusteringStats s;
  s.cluster_count = part.cluster_count();
  s.interior_fraction = g.node_count() == 0 ? 0.0
                                            : static_cast<double>(part.interior_count()) /
                                                  static_cast<double>(g.node_count());
  std::size_t within = 0;
  for (Node i = 0; i < g.node_count(); ++i)
    for (Node j : g.neighbors(i))
      if (i < j && part.cluster_of[i] == part.cluster_of[j]) ++within;
  s.within_edge_fraction = g.edge_count() == 0 ? 0.0
                                               : static_cast<double>(within) /
                                                     static_cast<double>(g.edge_count());
  s.modularity = g.edge_count() == 0 ? 0.0 : modularity(g, part, resolution);
  return s;
}

}  // namespace netexp
