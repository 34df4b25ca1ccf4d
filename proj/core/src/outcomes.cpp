#include "netexp/outcomes.hpp"

#include <cmath>
#include <numeric>

#include "netexp/error.hpp"

namespace netexp {

namespace {

double mean_of(std::span<const double> xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<double> normalized(std::vector<double> xs) {
  const double m = mean_of(xs);
  if (m == 0.0) throw Error("cannot normalize a covariate with zero mean");
  for (auto& x : xs) x /= m;
  return xs;
}

void check_length(std::span<const std::uint8_t> z, std::size_t n) {
  if (z.size() != n) throw Error("treatment vector length does not match the graph");
}

}  // namespace

std::vector<double> normalized_degree(const Graph& g) {
  std::vector<double> deg(g.node_count());
  for (Node i = 0; i < g.node_count(); ++i) deg[i] = static_cast<double>(g.degree(i));
  return normalized(std::move(deg));
}

std::vector<double> normalized_touch_count(const Partition& part) {
  std::vector<double> c(part.touch_counts.begin(), part.touch_counts.end());
  return normalized(std::move(c));
}

LinearTwoHopModel::LinearTwoHopModel(const Graph& g, double beta, double r1, double r2,
                                     double sigma, std::vector<Interaction> interactions)
    : graph_(&g), beta_(beta), r1_(r1), r2_(r2), sigma_(sigma),
      interactions_(std::move(interactions)) {
  if (sigma < 0.0) throw Error("noise scale must be nonnegative");
  const auto n = g.node_count();
  interaction_effect_.assign(n, 0.0);
  for (const auto& term : interactions_) {
    if (term.values.size() != n) throw Error("interaction covariate '" + term.name + "' has wrong length");
    for (std::size_t i = 0; i < n; ++i) interaction_effect_[i] += term.weight * term.values[i];
  }
  inverse_degree_.assign(n, 0.0);
  for (Node i = 0; i < n; ++i)
    if (g.degree(i) > 0) inverse_degree_[i] = 1.0 / static_cast<double>(g.degree(i));
  diag_p2_.assign(n, 0.0);
  for (Node i = 0; i < n; ++i) {
    double s = 0.0;
    for (Node j : g.neighbors(i)) s += inverse_degree_[j];
    diag_p2_[i] = inverse_degree_[i] * s;
  }
}

std::vector<double> LinearTwoHopModel::potential(std::span<const std::uint8_t> z) const {
  const auto& g = *graph_;
  const auto n = g.node_count();
  check_length(z, n);

  std::vector<double> one_hop(n, 0.0);
  for (Node i = 0; i < n; ++i) {
    double s = 0.0;
    for (Node j : g.neighbors(i)) s += z[j];
    one_hop[i] = inverse_degree_[i] * s;
  }
  std::vector<double> y(n);
  for (Node i = 0; i < n; ++i) {
    const double zi = z[i];
    y[i] = (beta_ + interaction_effect_[i]) * zi + r1_ * one_hop[i];
  }
  if (r2_ != 0.0) {
    for (Node i = 0; i < n; ++i) {
      double s = 0.0;
      for (Node j : g.neighbors(i)) s += one_hop[j];
      y[i] += r2_ * (inverse_degree_[i] * s - diag_p2_[i] * z[i]);
    }
  }
  return y;
}

std::vector<LinearTwoHopModel::Interaction> covariate_interactions(const Graph& g,
                                                                    const Partition& part,
                                                                    CovariatePreset preset) {
  std::vector<LinearTwoHopModel::Interaction> terms;
  switch (preset) {
    case CovariatePreset::none:
      break;
    case CovariatePreset::one:
      terms.push_back({"touch_count", 1.0, normalized_touch_count(part)});
      break;
    case CovariatePreset::two:
      terms.push_back({"degree", 0.5, normalized_degree(g)});
      terms.push_back({"touch_count", 0.5, normalized_touch_count(part)});
      break;
  }
  return terms;
}

PartialLinearModel::PartialLinearModel(const Graph& g, double beta, double alpha,
                                       std::vector<double> u, std::vector<double> v,
                                       ExposureShape shape, double level, double sigma)
    : graph_(&g), beta_(beta), alpha_(alpha), u_(std::move(u)), v_(std::move(v)),
      shape_(shape), level_(level), sigma_(sigma) {
  if (u_.size() != g.node_count() || v_.size() != g.node_count())
    throw Error("covariate vectors must have one entry per node");
  if (sigma < 0.0) throw Error("noise scale must be nonnegative");
}

double PartialLinearModel::h(double rho, double v) const {
  double shaped = rho;
  switch (shape_) {
    case ExposureShape::linear:
      break;
    case ExposureShape::square_root:
      shaped = std::sqrt(rho);
      break;
    case ExposureShape::quadratic:
      shaped = rho * rho;
      break;
  }
  return level_ * shaped + v;
}

std::vector<double> PartialLinearModel::potential(std::span<const std::uint8_t> z) const {
  const auto& g = *graph_;
  const auto n = g.node_count();
  check_length(z, n);
  std::vector<double> y(n);
  for (Node i = 0; i < n; ++i) {
    double rho = 0.0;
    if (g.degree(i) > 0) {
      double s = 0.0;
      for (Node j : g.neighbors(i)) s += z[j];
      rho = s / static_cast<double>(g.degree(i));
    }
    y[i] = (beta_ + alpha_ * u_[i]) * z[i] + h(rho, v_[i]);
  }
  return y;
}

std::vector<double> realize(const OutcomeModel& model, std::span<const std::uint8_t> z, Rng& rng) {
  auto y = model.potential(z);
  const double sigma = model.sigma();
  if (sigma == 0.0) return y;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& yi : y) yi += sigma * noise(rng);
  return y;
}

double true_gate(const OutcomeModel& model) {
  const auto n = model.node_count();
  const auto y1 = model.potential(std::vector<std::uint8_t>(n, 1));
  const auto y0 = model.potential(std::vector<std::uint8_t>(n, 0));
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += y1[i] - y0[i];
  return s / static_cast<double>(n);
}

double global_treatment_mean(const OutcomeModel& model) {
  return mean_of(model.potential(std::vector<std::uint8_t>(model.node_count(), 1)));
}

double interior_mean_gap(const PartialLinearModel& model, const Partition& part) {
  const auto u = model.u();
  double interior_sum = 0.0;
  std::size_t interior = 0;
  for (Node i = 0; i < part.node_count(); ++i)
    if (part.is_interior(i)) {
      interior_sum += u[i];
      ++interior;
    }
  if (interior == 0) throw Error("partition has no interior nodes");
  return interior_sum / static_cast<double>(interior) - mean_of(u);
}

}  // namespace netexp
