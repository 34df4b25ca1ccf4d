#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netexp/design.hpp"
#include "netexp/graph.hpp"

namespace netexp {

struct NamedCovariate {
  std::string name;
  std::vector<double> values;
};

struct ColumnDescriptor {
  std::string name;
  unsigned hop = 0;
  std::string source;

  friend bool operator==(const ColumnDescriptor&, const ColumnDescriptor&) = default;
};

/// Dense n x d design matrix over a hop-0/1/2 graph-filter basis.
///
/// Column order: intercept, z, each covariate u, each u*z, the neighbor mean
/// of z (rho), the neighbor mean of each u, and for max_hop = 2 the
/// neighbor mean of those neighbor means (P^2 z, P^2 u). Isolated nodes get
/// zero neighbor means.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnDescriptor> columns;
};

/// Precomputes the treatment-independent columns once so that features for
/// many assignments on the same graph are cheap.
class FeatureBuilder {
 public:
  FeatureBuilder(const Graph& g, std::vector<NamedCovariate> covariates, unsigned max_hop);

  FeatureMatrix build(std::span<const std::uint8_t> z) const;
  const std::vector<ColumnDescriptor>& columns() const { return columns_; }
  unsigned max_hop() const { return max_hop_; }
  std::size_t node_count() const { return graph_->node_count(); }

 private:
  std::vector<double> neighbor_mean(std::span<const double> x) const;

  const Graph* graph_;
  std::vector<NamedCovariate> covariates_;
  unsigned max_hop_;
  std::vector<ColumnDescriptor> columns_;
  std::vector<std::vector<double>> covariate_hops_;  // P u and P^2 u, per covariate
};

FeatureMatrix build_features(const Graph& g, std::span<const std::uint8_t> z,
                             std::vector<NamedCovariate> covariates, unsigned max_hop);

struct FitOptions {
  /// Unset selects 1e-6 * trace(F'F) / d over the training rows.
  std::optional<double> ridge_lambda;
  bool penalize_intercept = true;
};

struct LinearPredictor {
  Eigen::VectorXd coefficients;
  double ridge_lambda = 0.0;
  bool penalize_intercept = true;
  std::vector<ColumnDescriptor> columns;
  std::vector<Node> training_rows;
  /// Set when lambda = 0 met a rank-deficient design and 1e-8 was used.
  bool rank_fallback = false;

  Eigen::VectorXd predict(const FeatureMatrix& features) const;
};

/// Ridge least squares over `rows` (any order; sorted internally), solved by
/// Householder QR of the penalty-augmented design.
LinearPredictor fit(const FeatureMatrix& features, std::span<const double> y,
                    std::span<const Node> rows, const FitOptions& options = {});

/// Predictions at global treatment (treated) or global control.
/// Throws Error when the builder's columns differ from the predictor's.
std::vector<double> predict_counterfactual(const LinearPredictor& predictor,
                                           const FeatureBuilder& builder, Arm level);
std::vector<double> predict_counterfactual(const LinearPredictor& predictor, const Graph& g,
                                           std::vector<NamedCovariate> covariates,
                                           unsigned max_hop, Arm level);

std::vector<Node> all_nodes(std::size_t n);

}  // namespace netexp
