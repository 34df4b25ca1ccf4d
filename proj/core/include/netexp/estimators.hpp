#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netexp/design.hpp"
#include "netexp/graph.hpp"

namespace netexp {

enum class EstimatorKind : std::uint8_t { dim, ht, hajek, cae, mii, gnn, amii };

inline constexpr std::array<EstimatorKind, 7> kAllEstimators{
    EstimatorKind::dim,  EstimatorKind::ht,  EstimatorKind::hajek, EstimatorKind::cae,
    EstimatorKind::mii,  EstimatorKind::gnn, EstimatorKind::amii};

std::string_view estimator_name(EstimatorKind kind);
/// Accepts the canonical upper-case names (DIM, HT, HAJEK, CAE, MII, GNN, AMII)
/// in any case. Throws Error for anything else.
EstimatorKind parse_estimator(std::string_view name);

struct EstimatorDiagnostics {
  std::size_t clean_treated = 0;
  std::size_t clean_control = 0;
  std::size_t clusters_skipped = 0;
  std::size_t interior_treated = 0;  // s1
  std::size_t interior_control = 0;  // s0
  bool no_treated_clean = false;
  bool no_control_clean = false;
  std::string degenerate_reason;
};

/// Difference in means. Throws DegenerateArmError when an arm is empty.
double dim(std::span<const std::uint8_t> z, std::span<const double> y);

/// Horvitz-Thompson with full-neighborhood exposure and analytic exposure
/// probabilities p^{c_i}, (1-p)^{c_i}. Always defined; an arm without clean
/// nodes contributes zero and is flagged in `diag`.
double ht(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
          std::span<const double> y, double p, EstimatorDiagnostics* diag = nullptr);

/// Self-normalized (Hajek) variant of ht.
double hajek(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
             std::span<const double> y, double p, EstimatorDiagnostics* diag = nullptr);

/// Cluster-adaptive estimator: per cluster, the mean outcome of its clean
/// nodes at the cluster's own level; then an unweighted mean over clusters
/// per arm. Clusters without clean nodes are skipped and counted.
double cae(const Graph& g, const Partition& part, std::span<const std::uint8_t> z,
           std::span<const double> y, EstimatorDiagnostics* diag = nullptr);

/// Mean in interior: treated interior mean minus control interior mean.
double mii(const Partition& part, std::span<const std::uint8_t> z, std::span<const double> y,
           EstimatorDiagnostics* diag = nullptr);

/// mean(pred1) - mean(pred0).
double gnn_point(std::span<const double> pred1, std::span<const double> pred0);

/// MII plus, per arm, the gap between the population mean prediction and the
/// mean prediction over that arm's interior nodes.
double amii(const Partition& part, std::span<const std::uint8_t> z, std::span<const double> y,
            std::span<const double> pred1, std::span<const double> pred0,
            EstimatorDiagnostics* diag = nullptr);

/// Prediction-powered form of one arm: mean of `pred` over all nodes plus
/// the mean residual y - pred over that arm's interior nodes.
double ppi_arm_mean(const Partition& part, std::span<const std::uint8_t> z,
                    std::span<const double> y, std::span<const double> pred, Arm arm);

struct EstimationInput {
  const Graph* graph = nullptr;
  const Partition* partition = nullptr;
  std::span<const std::uint8_t> z;
  std::span<const double> y;
  double p = 0.5;
  /// Required only for GNN and AMII.
  std::span<const double> pred1;
  std::span<const double> pred0;
};

struct EstimateSet {
  struct Entry {
    EstimatorKind kind;
    std::optional<double> value;  // empty when degenerate
    EstimatorDiagnostics diagnostics;
  };
  std::vector<Entry> entries;

  const Entry* find(EstimatorKind kind) const;
  std::optional<double> value(EstimatorKind kind) const;
};

/// Evaluates each requested estimator; degenerate arms give an empty value
/// with the reason recorded rather than an exception.
EstimateSet estimate_all(const EstimationInput& input, std::span<const EstimatorKind> kinds);

}  // namespace netexp
