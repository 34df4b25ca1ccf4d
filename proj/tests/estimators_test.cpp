#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "netexp/error.hpp"
#include "netexp/estimators.hpp"
#include "netexp/generators.hpp"
#include "netexp/outcomes.hpp"
#include "netexp/predictor.hpp"
#include "support.hpp"

namespace netexp {
namespace {

using testing::bits_of;
using testing::graph_from;
using testing::random_clusters;
using testing::random_graph;

struct Toy {
  Graph graph;
  Partition part;
};

Toy tri_ring_toy() {
  auto planted = tri_ring();
  auto part = decompose(planted.graph, planted.block_of);
  return {std::move(planted.graph), std::move(part)};
}

// Connected toy graphs with at most 10 clusters and 60 nodes.
std::vector<Toy> toys() {
  std::vector<Toy> out;
  out.push_back(tri_ring_toy());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto planted = stochastic_block_model({5 + seed, 6, 0.7, 0.05, seed});
    auto part = decompose(planted.graph, planted.block_of);
    out.push_back({std::move(planted.graph), std::move(part)});
  }
  {
    auto g = random_graph(40, 0.12, 99);
    auto part = decompose(g, random_clusters(40, 8, 5));
    out.push_back({std::move(g), std::move(part)});
  }
  {
    // Star plus a pendant path, with an isolated node.
    auto g = graph_from(8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {4, 5}, {5, 6}});
    auto part = decompose(g, {0, 0, 0, 1, 1, 2, 2, 2});
    out.push_back({std::move(g), std::move(part)});
  }
  return out;
}

// HT written out from its definition with an independent exposure check.
double reference_ht(const Graph& g, const Partition& part, const std::vector<std::uint8_t>& z,
                    const std::vector<double>& y, double p) {
  double total = 0.0;
  for (Node i = 0; i < g.node_count(); ++i) {
    bool all1 = z[i] == 1;
    bool all0 = z[i] == 0;
    for (Node j : g.neighbors(i)) {
      all1 = all1 && z[j] == 1;
      all0 = all0 && z[j] == 0;
    }
    const double c = part.touch_counts[i];
    total += (all1 ? y[i] / std::pow(p, c) : 0.0) - (all0 ? y[i] / std::pow(1 - p, c) : 0.0);
  }
  return total / static_cast<double>(g.node_count());
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

TEST(Dim, HandValues) {
  const std::vector<std::uint8_t> z{1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(dim(z, std::vector<double>{1, 0, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(dim(z, std::vector<double>(4, 7.0)), 0.0);
  EXPECT_DOUBLE_EQ(dim(std::vector<std::uint8_t>{1, 0}, std::vector<double>{3, 1}), 2.0);
  EXPECT_THROW(dim(std::vector<std::uint8_t>{1, 1}, std::vector<double>{3, 1}), DegenerateArmError);
}

TEST(Ht, ExactlyUnbiasedUnderEnumeration) {
  for (const auto& toy : toys()) {
    const auto& g = toy.graph;
    const auto n = g.node_count();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(1.0 + static_cast<double>(i));
    const PartialLinearModel plm(g, 1.0, 0.7, normalized_degree(g), v, ExposureShape::square_root, 2.0, 0.0);
    const LinearTwoHopModel ltm(g, 1.0, 1.0, 0.0, 0.0, covariate_interactions(g, toy.part, CovariatePreset::two));
    for (const OutcomeModel* model : {static_cast<const OutcomeModel*>(&plm), static_cast<const OutcomeModel*>(&ltm)}) {
      const double tau = true_gate(*model);
      const auto k = toy.part.cluster_count();
      for (double p : {0.1, 0.3, 0.5}) {
        double expectation = 0.0;
        for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
          const auto bits = bits_of(mask, k);
          double prob = 1.0;
          for (auto b : bits) prob *= b ? p : 1 - p;
          const auto d = expand_assignment(toy.part, bits, p);
          const auto y = model->potential(d.unit_bits);
          const double est = ht(g, toy.part, d.unit_bits, y, p);
          const double ref = reference_ht(g, toy.part, d.unit_bits, y, p);
          EXPECT_NEAR(est, ref, 1e-12 * std::max(1.0, std::abs(ref)));
          expectation += prob * est;
        }
        EXPECT_NEAR(expectation, tau, 1e-12);
      }
    }
  }
}

TEST(Ht, AllTreatedFlagsMissingControls) {
  const auto toy = tri_ring_toy();
  const LinearTwoHopModel model(toy.graph, 1.0, 1.0, 0.0, 0.0);
  const std::vector<std::uint8_t> z(9, 1);
  const auto y = model.potential(z);
  EstimatorDiagnostics diag;
  const double est = ht(toy.graph, toy.part, z, y, 0.5, &diag);
  double expected = 0.0;
  for (Node i = 0; i < 9; ++i) expected += y[i] / std::pow(0.5, toy.part.touch_counts[i]);
  EXPECT_NEAR(est, expected / 9.0, 1e-15);
  EXPECT_GE(est, 0.0);
  EXPECT_TRUE(diag.no_control_clean);
  EXPECT_FALSE(diag.no_treated_clean);
}

TEST(Ht, SingleClusterIsScaledMean) {
  const auto g = random_graph(20, 0.2, 3);
  const auto part = decompose(g, std::vector<ClusterId>(20, 0));
  std::mt19937_64 rng(1);
  const auto y = random_vector(20, rng);
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / 20.0;
  EXPECT_NEAR(ht(g, part, std::vector<std::uint8_t>(20, 1), y, 0.3), mean_y / 0.3, 1e-12);
  EXPECT_NEAR(ht(g, part, std::vector<std::uint8_t>(20, 0), y, 0.3), -mean_y / 0.7, 1e-12);
}

TEST(Hajek, ConstantOutcomeIsZero) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {1, 0, 1}, 0.5);
  EXPECT_NEAR(hajek(toy.graph, toy.part, d.unit_bits, std::vector<double>(9, 3.3), 0.5), 0.0, 1e-15);
}

TEST(Hajek, SingleClusterIsDegenerate) {
  const auto g = random_graph(20, 0.2, 3);
  const auto part = decompose(g, std::vector<ClusterId>(20, 0));
  EXPECT_THROW(hajek(g, part, std::vector<std::uint8_t>(20, 1), std::vector<double>(20, 1.0), 0.5),
               DegenerateArmError);
}

TEST(Hajek, BiasedOnInteractionModel) {
  const auto toy = tri_ring_toy();
  const LinearTwoHopModel model(toy.graph, 1.0, 1.0, 0.0, 0.0,
                                covariate_interactions(toy.graph, toy.part, CovariatePreset::two));
  // Conditional on both arms having clean nodes.
  double num = 0.0;
  double mass = 0.0;
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    const auto bits = bits_of(mask, 3);
    const auto d = expand_assignment(toy.part, bits, 0.5);
    try {
      num += 0.125 * hajek(toy.graph, toy.part, d.unit_bits, model.potential(d.unit_bits), 0.5);
      mass += 0.125;
    } catch (const DegenerateArmError&) {
    }
  }
  EXPECT_GT(std::abs(num / mass - true_gate(model)), 1e-3);
}

// Per cluster: mean over clean nodes at the cluster's level; then arm means.
double reference_cae(const Graph& g, const Partition& part, const std::vector<std::uint8_t>& z,
                     const std::vector<double>& y) {
  double sum[2] = {0, 0};
  double count[2] = {0, 0};
  for (std::size_t k = 0; k < part.cluster_count(); ++k) {
    const int level = z[part.clusters[k][0]];
    double s = 0;
    double m = 0;
    for (Node i : part.clusters[k]) {
      bool clean = true;
      for (Node j : g.neighbors(i)) clean = clean && z[j] == level;
      if (clean) {
        s += y[i];
        m += 1;
      }
    }
    if (m > 0) {
      sum[level] += s / m;
      count[level] += 1;
    }
  }
  return sum[1] / count[1] - sum[0] / count[0];
}

TEST(Cae, MatchesReferenceOnRandomDraws) {
  std::mt19937_64 rng(21);
  for (const auto& toy : toys()) {
    for (int t = 0; t < 30; ++t) {
      auto stream = substream(t, 0);
      const auto d = draw_assignment(toy.part, 0.5, stream);
      const auto y = random_vector(toy.graph.node_count(), rng);
      try {
        const double got = cae(toy.graph, toy.part, d.unit_bits, y);
        EXPECT_NEAR(got, reference_cae(toy.graph, toy.part, d.unit_bits, y), 1e-12);
      } catch (const DegenerateArmError&) {
      }
    }
  }
}

TEST(Cae, AllInteriorComponents) {
  // Two disjoint triangles and an edge: every node is interior.
  const auto g = graph_from(8, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {6, 7}});
  const auto part = decompose(g, {0, 0, 0, 1, 1, 1, 2, 2});
  const auto d = expand_assignment(part, {1, 0, 1}, 0.5);
  const std::vector<double> y{1, 2, 3, 10, 20, 30, 5, 9};
  EstimatorDiagnostics diag;
  EXPECT_NEAR(cae(g, part, d.unit_bits, y, &diag), (2.0 + 7.0) / 2.0 - 20.0, 1e-15);
  EXPECT_EQ(diag.clusters_skipped, 0U);
}

TEST(Cae, TriRingTreatedTermIsNodeOne) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {1, 0, 0}, 0.5);
  const LinearTwoHopModel model(toy.graph, 1.0, 1.0, 0.0, 0.0);
  const auto y = model.potential(d.unit_bits);
  // Control clean sets: cluster B {4, 5}, cluster C {6, 7}.
  const double control = ((y[4] + y[5]) / 2.0 + (y[6] + y[7]) / 2.0) / 2.0;
  EXPECT_NEAR(cae(toy.graph, toy.part, d.unit_bits, y), y[1] - control, 1e-15);
  EXPECT_NEAR(cae(toy.graph, toy.part, d.unit_bits, std::vector<double>(9, 4.0)), 0.0, 1e-15);
}

TEST(Cae, NoTreatedClusterIsDegenerate) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {0, 0, 0}, 0.5);
  EXPECT_THROW(cae(toy.graph, toy.part, d.unit_bits, std::vector<double>(9, 1.0)), DegenerateArmError);
}

TEST(Mii, TriRingHandValue) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {1, 0, 0}, 0.5);
  const LinearTwoHopModel model(toy.graph, 1.0, 1.0, 0.0, 0.0);
  const auto y = model.potential(d.unit_bits);
  // Node 1 sees only treated neighbors (Y = beta + r1); nodes 4 and 7 see none.
  EXPECT_NEAR(y[1], 2.0, 1e-15);
  EXPECT_NEAR(y[4], 0.0, 1e-15);
  EXPECT_NEAR(y[7], 0.0, 1e-15);
  EstimatorDiagnostics diag;
  EXPECT_NEAR(mii(toy.part, d.unit_bits, y, &diag), 2.0, 1e-15);
  EXPECT_EQ(diag.interior_treated, 1U);
  EXPECT_EQ(diag.interior_control, 2U);
}

TEST(Mii, ConstantOutcomeAndDegenerateArms) {
  const auto toy = tri_ring_toy();
  const auto mixed = expand_assignment(toy.part, {0, 1, 1}, 0.5);
  EXPECT_NEAR(mii(toy.part, mixed.unit_bits, std::vector<double>(9, -1.5)), 0.0, 1e-15);
  const auto all = expand_assignment(toy.part, {1, 1, 1}, 0.5);
  EXPECT_THROW(mii(toy.part, all.unit_bits, std::vector<double>(9, 1.0)), DegenerateArmError);
}

TEST(Mii, EqualsDimWhenEveryNodeIsInterior) {
  const auto g = graph_from(8, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {6, 7}});
  const auto part = decompose(g, {0, 0, 0, 1, 1, 1, 2, 2});
  std::mt19937_64 rng(5);
  const auto d = expand_assignment(part, {1, 0, 1}, 0.5);
  const auto y = random_vector(8, rng);
  EXPECT_NEAR(mii(part, d.unit_bits, y), dim(d.unit_bits, y), 1e-14);
  const auto single = decompose(g, std::vector<ClusterId>(8, 0));
  EXPECT_THROW(mii(single, std::vector<std::uint8_t>(8, 1), y), DegenerateArmError);
}

TEST(Gnn, PointEstimate) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(gnn_point(a, a), 0.0);
  EXPECT_NEAR(gnn_point(a, std::vector<double>{0, 0, 0}), 2.0, 1e-15);
}

TEST(Amii, ConstantPredictionsReduceToMii) {
  const auto toy = tri_ring_toy();
  std::mt19937_64 rng(8);
  const auto d = expand_assignment(toy.part, {1, 0, 1}, 0.5);
  const auto y = random_vector(9, rng);
  EXPECT_NEAR(amii(toy.part, d.unit_bits, y, std::vector<double>(9, 2.0), std::vector<double>(9, -1.0)),
              mii(toy.part, d.unit_bits, y), 1e-14);
}

TEST(Amii, MatchesAdjustmentDefinition) {
  std::mt19937_64 rng(13);
  for (const auto& toy : toys()) {
    const auto n = toy.graph.node_count();
    for (int t = 0; t < 20; ++t) {
      auto stream = substream(t, 1);
      const auto d = draw_assignment(toy.part, 0.5, stream);
      const auto y = random_vector(n, rng);
      const auto p1 = random_vector(n, rng);
      const auto p0 = random_vector(n, rng);
      double m1 = 0, m0 = 0, i1 = 0, i0 = 0, y1 = 0, y0 = 0, s1 = 0, s0 = 0;
      for (Node i = 0; i < n; ++i) {
        m1 += p1[i] / n;
        m0 += p0[i] / n;
        if (!toy.part.is_interior(i)) continue;
        if (d.unit_bits[i]) {
          i1 += p1[i];
          y1 += y[i];
          s1 += 1;
        } else {
          i0 += p0[i];
          y0 += y[i];
          s0 += 1;
        }
      }
      if (s1 == 0 || s0 == 0) {
        EXPECT_THROW(amii(toy.part, d.unit_bits, y, p1, p0), DegenerateArmError);
        continue;
      }
      const double expected = (y1 / s1 - y0 / s0) + (m1 - i1 / s1) - (m0 - i0 / s0);
      EXPECT_NEAR(amii(toy.part, d.unit_bits, y, p1, p0), expected, 1e-12);
    }
  }
}

TEST(PpiForm, IdentityOnRandomInputs) {
  std::mt19937_64 rng(17);
  std::size_t checked = 0;
  for (const auto& toy : toys()) {
    const auto n = toy.graph.node_count();
    for (int t = 0; t < 200; ++t) {
      auto stream = substream(t, 2);
      const auto d = draw_assignment(toy.part, 0.5, stream);
      const auto y = random_vector(n, rng);
      const auto p1 = random_vector(n, rng);
      const auto p0 = random_vector(n, rng);
      try {
        const double a = amii(toy.part, d.unit_bits, y, p1, p0);
        const double b = ppi_arm_mean(toy.part, d.unit_bits, y, p1, Arm::treated) -
                         ppi_arm_mean(toy.part, d.unit_bits, y, p0, Arm::control);
        EXPECT_NEAR(a, b, 1e-10);
        ++checked;
      } catch (const DegenerateArmError&) {
      }
    }
  }
  EXPECT_GT(checked, 500U);
}

TEST(PpiForm, SpecialCases) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {1, 1, 0}, 0.5);
  std::mt19937_64 rng(3);
  const auto y = random_vector(9, rng);
  auto pred = random_vector(9, rng);
  pred[1] = y[1];
  pred[4] = y[4];
  const double mean_pred = std::accumulate(pred.begin(), pred.end(), 0.0) / 9.0;
  EXPECT_NEAR(ppi_arm_mean(toy.part, d.unit_bits, y, pred, Arm::treated), mean_pred, 1e-14);
  EXPECT_NEAR(ppi_arm_mean(toy.part, d.unit_bits, y, std::vector<double>(9, 0.0), Arm::treated),
              (y[1] + y[4]) / 2.0, 1e-14);
  const auto none = expand_assignment(toy.part, {0, 0, 0}, 0.5);
  EXPECT_THROW(ppi_arm_mean(toy.part, none.unit_bits, y, pred, Arm::treated), DegenerateArmError);
}

TEST(ShiftEquivariance, DifferencesIgnoreShiftHtDoesNot) {
  std::mt19937_64 rng(23);
  const auto kinds = std::vector<EstimatorKind>{EstimatorKind::dim, EstimatorKind::hajek, EstimatorKind::cae,
                                                EstimatorKind::mii, EstimatorKind::amii};
  std::size_t ht_moved = 0;
  std::size_t draws = 0;
  for (const auto& toy : toys()) {
    const auto n = toy.graph.node_count();
    for (int t = 0; t < 20; ++t) {
      auto stream = substream(t, 3);
      const auto d = draw_assignment(toy.part, 0.5, stream);
      const auto y = random_vector(n, rng);
      auto shifted = y;
      for (auto& v : shifted) v += 5.0;
      const auto p1 = random_vector(n, rng);
      const auto p0 = random_vector(n, rng);
      EstimationInput a{&toy.graph, &toy.part, d.unit_bits, y, 0.5, p1, p0};
      EstimationInput b{&toy.graph, &toy.part, d.unit_bits, shifted, 0.5, p1, p0};
      const auto ea = estimate_all(a, kinds);
      const auto eb = estimate_all(b, kinds);
      for (auto k : kinds) {
        const auto va = ea.value(k);
        const auto vb = eb.value(k);
        ASSERT_EQ(va.has_value(), vb.has_value());
        if (va) EXPECT_NEAR(*va, *vb, 1e-10) << estimator_name(k);
      }
      ++draws;
      if (std::abs(ht(toy.graph, toy.part, d.unit_bits, y, 0.5) -
                   ht(toy.graph, toy.part, d.unit_bits, shifted, 0.5)) > 1e-6)
        ++ht_moved;
    }
  }
  EXPECT_GT(ht_moved, draws / 2);
}

TEST(EstimateAll, DegenerateArmsAreAbsentWithReason) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {1, 1, 1}, 0.5);
  const std::vector<double> y(9, 1.0);
  EstimationInput in{&toy.graph, &toy.part, d.unit_bits, y, 0.5, y, y};
  const auto set = estimate_all(in, kAllEstimators);
  for (auto k : {EstimatorKind::dim, EstimatorKind::hajek, EstimatorKind::cae, EstimatorKind::mii,
                 EstimatorKind::amii}) {
    EXPECT_FALSE(set.value(k).has_value()) << estimator_name(k);
    EXPECT_FALSE(set.find(k)->diagnostics.degenerate_reason.empty());
  }
  EXPECT_TRUE(set.value(EstimatorKind::ht).has_value());
  EXPECT_TRUE(set.find(EstimatorKind::ht)->diagnostics.no_control_clean);
  EXPECT_NEAR(*set.value(EstimatorKind::gnn), 0.0, 1e-15);
}

TEST(EstimateAll, PredictorEstimatorsNeedPredictions) {
  const auto toy = tri_ring_toy();
  const auto d = expand_assignment(toy.part, {1, 0, 1}, 0.5);
  const std::vector<double> y(9, 1.0);
  EstimationInput in{&toy.graph, &toy.part, d.unit_bits, y, 0.5, {}, {}};
  EXPECT_THROW(estimate_all(in, std::vector<EstimatorKind>{EstimatorKind::amii}), Error);
}

TEST(EstimatorNames, RoundTrip) {
  for (auto k : kAllEstimators) EXPECT_EQ(parse_estimator(estimator_name(k)), k);
  EXPECT_EQ(parse_estimator("hajek"), EstimatorKind::hajek);
  EXPECT_THROW(parse_estimator("OLS"), Error);
}

}  // namespace
}  // namespace netexp
