#include "netexp/design.hpp"

#include <cmath>

#include "netexp/error.hpp"

namespace netexp {

namespace {

void check_proportion(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("treatment proportion must lie in (0, 1)");
}

}  // namespace

Rng substream(std::uint64_t master_seed, std::uint64_t repetition, std::uint64_t lane) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(repetition >> 32),
                    static_cast<std::uint32_t>(lane), static_cast<std::uint32_t>(lane >> 32)};
  return Rng(seq);
}

TreatmentDraw draw_assignment(const Partition& part, double p, Rng& rng) {
  check_proportion(p);
  std::bernoulli_distribution coin(p);
  std::vector<std::uint8_t> bits(part.cluster_count());
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  return expand_assignment(part, std::move(bits), p);
}

TreatmentDraw expand_assignment(const Partition& part, std::vector<std::uint8_t> cluster_bits,
                                double p) {
  if (cluster_bits.size() != part.cluster_count())
    throw Error("cluster bit vector does not match the partition");
  TreatmentDraw draw;
  draw.p = p;
  draw.unit_bits.resize(part.node_count());
  for (Node i = 0; i < part.node_count(); ++i) draw.unit_bits[i] = cluster_bits[part.cluster_of[i]];
  draw.cluster_bits = std::move(cluster_bits);
  return draw;
}

bool exposed(const Graph& g, std::span<const std::uint8_t> z, Node i, Arm arm) {
  const auto level = arm_bit(arm);
  if (z[i] != level) return false;
  for (Node j : g.neighbors(i))
    if (z[j] != level) return false;
  return true;
}

double exposure_probability(const Partition& part, double p, Node i, Arm arm) {
  check_proportion(p);
  const double base = arm == Arm::treated ? p : 1.0 - p;
  return std::pow(base, static_cast<double>(part.touch_counts[i]));
}

std::vector<AssignmentAtom> enumerate_assignments(const Partition& part, double p) {
  check_proportion(p);
  const std::size_t k = part.cluster_count();
  if (k > kMaxEnumerationClusters)
    throw Error("refusing to enumerate more than 2^20 cluster assignments");
  const std::size_t count = std::size_t{1} << k;
  std::vector<AssignmentAtom> atoms(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    auto& atom = atoms[mask];
    atom.cluster_bits.resize(k);
    double prob = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      const bool on = (mask >> c) & 1U;
      atom.cluster_bits[c] = on ? 1 : 0;
      prob *= on ? p : 1.0 - p;
    }
    atom.probability = prob;
  }
  return atoms;
}

}  // namespace netexp
