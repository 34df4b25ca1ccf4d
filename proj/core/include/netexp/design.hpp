#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "netexp/graph.hpp"

namespace netexp {

enum class Arm : std::uint8_t { control = 0, treated = 1 };

inline std::uint8_t arm_bit(Arm a) { return static_cast<std::uint8_t>(a); }

using Rng = std::mt19937_64;

/// Independent random stream for (master seed, repetition, lane). Streams
/// for different keys do not depend on the order in which they are made.
Rng substream(std::uint64_t master_seed, std::uint64_t repetition, std::uint64_t lane = 0);

/// One cluster-level Bernoulli assignment and its unit-level expansion.
struct TreatmentDraw {
  std::vector<std::uint8_t> cluster_bits;
  std::vector<std::uint8_t> unit_bits;
  double p = 0.5;
};

/// Every cluster is treated independently with probability p in (0,1).
TreatmentDraw draw_assignment(const Partition& part, double p, Rng& rng);

/// Expands fixed cluster bits to units (z_i = t_{cluster_of[i]}).
TreatmentDraw expand_assignment(const Partition& part, std::vector<std::uint8_t> cluster_bits,
                                double p);

/// Full-neighborhood exposure: node i and all its neighbors carry `arm`.
/// For an isolated node this is just z_i == arm.
bool exposed(const Graph& g, std::span<const std::uint8_t> z, Node i, Arm arm);

/// p^{c_i} for the treated arm and (1-p)^{c_i} for control.
double exposure_probability(const Partition& part, double p, Node i, Arm arm);

struct AssignmentAtom {
  std::vector<std::uint8_t> cluster_bits;
  double probability = 0.0;
};

/// All 2^K cluster assignments with their probabilities, in binary counting
/// order with cluster 0 as the least significant bit. Refuses K > 20.
std::vector<AssignmentAtom> enumerate_assignments(const Partition& part, double p);

inline constexpr std::size_t kMaxEnumerationClusters = 20;

}  // namespace netexp
