#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netexp/design.hpp"
#include "netexp/graph.hpp"

namespace netexp {

/// deg_i / mean degree.
std::vector<double> normalized_degree(const Graph& g);
/// c_i / mean c over all nodes.
std::vector<double> normalized_touch_count(const Partition& part);

/// Potential-outcome model evaluated on a fixed graph.
///
/// Models keep a pointer to the graph they were built on; the graph must
/// outlive the model.
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;

  /// Noiseless Y(z).
  virtual std::vector<double> potential(std::span<const std::uint8_t> z) const = 0;
  virtual double sigma() const = 0;
  virtual std::size_t node_count() const = 0;
};

/// Y(z) = beta z + B z + (sum_k w_k x_k) .* z + sigma eps, where
/// B = (11' - I) .* (r1 P + r2 P^2) and P = D^{-1} A.
///
/// B z is evaluated with sparse products: P has a zero diagonal, and the
/// diagonal of P^2 is precomputed (diag(P^2)_ii = sum_j P_ij P_ji) and
/// subtracted.
class LinearTwoHopModel final : public OutcomeModel {
 public:
  struct Interaction {
    std::string name;
    double weight = 0.0;
    std::vector<double> values;
  };

  LinearTwoHopModel(const Graph& g, double beta, double r1, double r2, double sigma,
                    std::vector<Interaction> interactions = {});

  std::vector<double> potential(std::span<const std::uint8_t> z) const override;
  double sigma() const override { return sigma_; }
  std::size_t node_count() const override { return graph_->node_count(); }

  double beta() const { return beta_; }
  double r1() const { return r1_; }
  double r2() const { return r2_; }
  const std::vector<Interaction>& interactions() const { return interactions_; }
  /// Per-node multiplier of z_i coming from the covariate interactions.
  std::span<const double> interaction_effect() const { return interaction_effect_; }
  std::span<const double> two_hop_diagonal() const { return diag_p2_; }

 private:
  const Graph* graph_;
  double beta_;
  double r1_;
  double r2_;
  double sigma_;
  std::vector<Interaction> interactions_;
  std::vector<double> interaction_effect_;
  std::vector<double> inverse_degree_;
  std::vector<double> diag_p2_;
};

/// Interaction presets used by the simulation tables: two covariates
/// (weights 1/2 on normalized degree and normalized touch count), one
/// covariate (weight 1 on normalized touch count) or none.
enum class CovariatePreset { none, one, two };
std::vector<LinearTwoHopModel::Interaction> covariate_interactions(const Graph& g,
                                                                    const Partition& part,
                                                                    CovariatePreset preset);

enum class ExposureShape { linear, square_root, quadratic };

/// Y_i(z) = (beta + alpha u_i) z_i + h(rho_i(z), v_i) + sigma eps_i, with
/// rho_i the treated fraction of i's neighbors (0 for isolated nodes) and
/// h(rho, v) = level * shape(rho) + v.
class PartialLinearModel final : public OutcomeModel {
 public:
  PartialLinearModel(const Graph& g, double beta, double alpha, std::vector<double> u,
                     std::vector<double> v, ExposureShape shape, double level, double sigma);

  std::vector<double> potential(std::span<const std::uint8_t> z) const override;
  double sigma() const override { return sigma_; }
  std::size_t node_count() const override { return graph_->node_count(); }

  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  std::span<const double> u() const { return u_; }
  std::span<const double> v() const { return v_; }
  double h(double rho, double v) const;

 private:
  const Graph* graph_;
  double beta_;
  double alpha_;
  std::vector<double> u_;
  std::vector<double> v_;
  ExposureShape shape_;
  double level_;
  double sigma_;
};

/// potential(z) + sigma * eps with eps i.i.d. standard normal from `rng`.
std::vector<double> realize(const OutcomeModel& model, std::span<const std::uint8_t> z, Rng& rng);

/// Mean of Y(1) - Y(0), noiseless.
double true_gate(const OutcomeModel& model);
/// Mean of Y(1), noiseless.
double global_treatment_mean(const OutcomeModel& model);

/// mean of u over interior nodes minus mean of u over all nodes.
/// Throws Error when the partition has no interior node.
double interior_mean_gap(const PartialLinearModel& model, const Partition& part);

}  // namespace netexp
