#include "netexp/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "netexp/error.hpp"

namespace netexp {

namespace {

struct ArmSums {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return sum / static_cast<double>(count); }
};

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw Error("estimator inputs have mismatched lengths");
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Interior sums of `values` for the requested arm.
ArmSums interior_arm(const Partition& part, std::span<const std::uint8_t> z,
                     std::span<const double> values, Arm arm) {
  ArmSums s;
  const auto level = arm_bit(arm);
  for (Node i = 0; i < part.node_count(); ++i)
    if (part.is_interior(i) && z[i] == level) {
      s.sum += values[i];
      ++s.count;
    }
  return s;
}

}  // namespace

std::string_view estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::dim: return "DIM";
    case EstimatorKind::ht: return "HT";
    case EstimatorKind::hajek: return "HAJEK";
    case EstimatorKind::cae: return "CAE";
    case EstimatorKind::mii: return "MII";
    case EstimatorKind::gnn: return "GNN";
    case EstimatorKind::amii: return "AMII";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto kind : kAllEstimators)
    if (estimator_name(kind) == upper) return kind;
  throw Error("unknown estimator: " + std::string(name));
}

double dim(std::span<const std::uint8_t> z, std::span<const double> y) {
  check_sizes(z.size(), y.size());
  ArmSums treated;
  ArmSums control;
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto& arm = z[i] ? treated : control;
    arm.sum += y[i];
    ++arm.count;
  }
  if (treated.count == 0 || control.count == 0) throw DegenerateArmError("DIM: an arm is empty");
  return treated.mean() - control.mean();
}

namespace {

// Inverse-probability weighted sums over clean nodes of each arm.
struct ExposureSums {
  double weighted_y[2] = {0.0, 0.0};
  double weight[2] = {0.0, 0.0};
  std::size_t clean[2] = {0, 0};
};

ExposureSums exposure_sums(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
                           std::span<const double> y, double p) {
  check_sizes(z.size(), g.node_count());
  check_sizes(y.size(), g.node_count());
  ExposureSums s;
  for (Node i = 0; i < g.node_count(); ++i) {
    const Arm arm = z[i] ? Arm::treated : Arm::control;
    if (!exposed(g, z, i, arm)) continue;
    const double w = 1.0 / exposure_probability(part, p, i, arm);
    const auto a = arm_bit(arm);
    s.weighted_y[a] += w * y[i];
    s.weight[a] += w;
    ++s.clean[a];
  }
  return s;
}

void record_clean(const ExposureSums& s, EstimatorDiagnostics* diag) {
  if (!diag) return;
  diag->clean_treated = s.clean[1];
  diag->clean_control = s.clean[0];
  diag->no_treated_clean = s.clean[1] == 0;
  diag->no_control_clean = s.clean[0] == 0;
}

}  // namespace

double ht(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
          std::span<const double> y, double p, EstimatorDiagnostics* diag) {
  const auto s = exposure_sums(g, part, z, y, p);
  record_clean(s, diag);
  return (s.weighted_y[1] - s.weighted_y[0]) / static_cast<double>(g.node_count());
}

double hajek(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
             std::span<const double> y, double p, EstimatorDiagnostics* diag) {
  const auto s = exposure_sums(g, part, z, y, p);
  record_clean(s, diag);
  if (s.clean[1] == 0 || s.clean[0] == 0)
    throw DegenerateArmError("HAJEK: an arm has no clean nodes");
  return s.weighted_y[1] / s.weight[1] - s.weighted_y[0] / s.weight[0];
}

double cae(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
           std::span<const double> y, EstimatorDiagnostics* diag) {
  check_sizes(z.size(), g.node_count());
  check_sizes(y.size(), g.node_count());
  ArmSums arms[2];
  std::size_t skipped = 0;
  std::size_t clean[2] = {0, 0};
  for (std::size_t k = 0; k < part.cluster_count(); ++k) {
    const auto& members = part.clusters[k];
    if (members.empty()) continue;
    const auto level = z[members.front()];
    const Arm arm = level ? Arm::treated : Arm::control;
    ArmSums within;
    for (Node i : members)
      if (exposed(g, z, i, arm)) {
        within.sum += y[i];
        ++within.count;
      }
    if (within.count == 0) {
      ++skipped;
      continue;
    }
    clean[level] += within.count;
    arms[level].sum += within.mean();
    ++arms[level].count;
  }
  if (diag) {
    diag->clusters_skipped = skipped;
    diag->clean_treated = clean[1];
    diag->clean_control = clean[0];
    diag->no_treated_clean = clean[1] == 0;
    diag->no_control_clean = clean[0] == 0;
  }
  if (arms[1].count == 0 || arms[0].count == 0)
    throw DegenerateArmError("CAE: an arm has no contributing cluster");
  return arms[1].mean() - arms[0].mean();
}

double mii(const Partition& part, std::span<const std::uint8_t> z, std::span<const double> y,
           EstimatorDiagnostics* diag) {
  check_sizes(z.size(), part.node_count());
  check_sizes(y.size(), part.node_count());
  const auto treated = interior_arm(part, z, y, Arm::treated);
  const auto control = interior_arm(part, z, y, Arm::control);
  if (diag) {
    diag->interior_treated = treated.count;
    diag->interior_control = control.count;
  }
  if (treated.count == 0 || control.count == 0)
    throw DegenerateArmError("MII: no treated or no control interior node");
  return treated.mean() - control.mean();
}

double gnn_point(std::span<const double> pred1, std::span<const double> pred0) {
  check_sizes(pred1.size(), pred0.size());
  if (pred1.empty()) throw Error("GNN: empty prediction vectors");
  return mean_of(pred1) - mean_of(pred0);
}

double amii(const Partition& part, std::span<const std::uint8_t> z, std::span<const double> y,
            std::span<const double> pred1, std::span<const double> pred0,
            EstimatorDiagnostics* diag) {
  check_sizes(pred1.size(), part.node_count());
  check_sizes(pred0.size(), part.node_count());
  const double base = mii(part, z, y, diag);
  const double treated_adjust = mean_of(pred1) - interior_arm(part, z, pred1, Arm::treated).mean();
  const double control_adjust = mean_of(pred0) - interior_arm(part, z, pred0, Arm::control).mean();
  return base + treated_adjust - control_adjust;
}

double ppi_arm_mean(const Partition& part, std::span<const std::uint8_t> z,
                    std::span<const double> y, std::span<const double> pred, Arm arm) {
  check_sizes(z.size(), part.node_count());
  check_sizes(y.size(), part.node_count());
  check_sizes(pred.size(), part.node_count());
  ArmSums residual;
  const auto level = arm_bit(arm);
  for (Node i = 0; i < part.node_count(); ++i)
    if (part.is_interior(i) && z[i] == level) {
      residual.sum += y[i] - pred[i];
      ++residual.count;
    }
  if (residual.count == 0) throw DegenerateArmError("PPI: the arm has no interior node");
  return mean_of(pred) + residual.mean();
}

const EstimateSet::Entry* EstimateSet::find(EstimatorKind kind) const {
  for (const auto& e : entries)
    if (e.kind == kind) return &e;
  return nullptr;
}

std::optional<double> EstimateSet::value(EstimatorKind kind) const {
  const auto* e = find(kind);
  return e ? e->value : std::nullopt;
}

EstimateSet estimate_all(const EstimationInput& in, std::span<const EstimatorKind> kinds) {
  if (!in.graph || !in.partition) throw Error("estimation input needs a graph and a partition");
  const auto& g = *in.graph;
  const auto& part = *in.partition;
  EstimateSet out;
  for (auto kind : kinds) {
    EstimateSet::Entry entry{kind, std::nullopt, {}};
    auto* diag = &entry.diagnostics;
    try {
      switch (kind) {
        case EstimatorKind::dim: entry.value = dim(in.z, in.y); break;
        case EstimatorKind::ht: entry.value = ht(g, part, in.z, in.y, in.p, diag); break;
        case EstimatorKind::hajek: entry.value = hajek(g, part, in.z, in.y, in.p, diag); break;
        case EstimatorKind::cae: entry.value = cae(g, part, in.z, in.y, diag); break;
        case EstimatorKind::mii: entry.value = mii(part, in.z, in.y, diag); break;
        case EstimatorKind::gnn: entry.value = gnn_point(in.pred1, in.pred0); break;
        case EstimatorKind::amii:
          entry.value = amii(part, in.z, in.y, in.pred1, in.pred0, diag);
          break;
      }
      if (entry.value && !std::isfinite(*entry.value)) {
        entry.value.reset();
        diag->degenerate_reason = "non-finite estimate";
      }
    } catch (const DegenerateArmError& e) {
      diag->degenerate_reason = e.what();
    }
    out.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace netexp
