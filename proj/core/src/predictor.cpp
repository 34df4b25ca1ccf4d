#include "netexp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netexp/error.hpp"

namespace netexp {

FeatureBuilder::FeatureBuilder(const Graph& g, std::vector<NamedCovariate> covariates,
                               unsigned max_hop)
    : graph_(&g), covariates_(std::move(covariates)), max_hop_(max_hop) {
  if (max_hop < 1 || max_hop > 2) throw Error("max_hop must be 1 or 2");
  for (const auto& cov : covariates_)
    if (cov.values.size() != g.node_count())
      throw Error("covariate '" + cov.name + "' has wrong length");

  columns_.push_back({"intercept", 0, "intercept"});
  columns_.push_back({"z", 0, "treatment"});
  for (const auto& cov : covariates_) columns_.push_back({cov.name, 0, cov.name});
  for (const auto& cov : covariates_) columns_.push_back({cov.name + "*z", 0, cov.name});
  for (unsigned hop = 1; hop <= max_hop; ++hop) {
    const auto suffix = "@" + std::to_string(hop);
    columns_.push_back({"z" + suffix, hop, "treatment"});
    for (const auto& cov : covariates_) columns_.push_back({cov.name + suffix, hop, cov.name});
  }

  for (const auto& cov : covariates_) {
    auto once = neighbor_mean(cov.values);
    if (max_hop == 2) {
      auto twice = neighbor_mean(once);
      covariate_hops_.push_back(std::move(once));
      covariate_hops_.push_back(std::move(twice));
    } else {
      covariate_hops_.push_back(std::move(once));
    }
  }
}

std::vector<double> FeatureBuilder::neighbor_mean(std::span<const double> x) const {
  const auto& g = *graph_;
  std::vector<double> out(g.node_count(), 0.0);
  for (Node i = 0; i < g.node_count(); ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    double s = 0.0;
    for (Node j : nb) s += x[j];
    out[i] = s / static_cast<double>(nb.size());
  }
  return out;
}

FeatureMatrix FeatureBuilder::build(std::span<const std::uint8_t> z) const {
  const auto n = graph_->node_count();
  if (z.size() != n) throw Error("treatment vector length does not match the graph");
  const auto d = static_cast<Eigen::Index>(columns_.size());
  const auto rows = static_cast<Eigen::Index>(n);
  const auto k = covariates_.size();

  FeatureMatrix f;
  f.columns = columns_;
  f.values.resize(rows, d);

  std::vector<double> zd(z.begin(), z.end());
  Eigen::Index col = 0;
  f.values.col(col++).setOnes();
  f.values.col(col++) = Eigen::Map<const Eigen::VectorXd>(zd.data(), rows);
  for (const auto& cov : covariates_)
    f.values.col(col++) = Eigen::Map<const Eigen::VectorXd>(cov.values.data(), rows);
  for (const auto& cov : covariates_)
    f.values.col(col++) = Eigen::Map<const Eigen::VectorXd>(cov.values.data(), rows)
                              .cwiseProduct(Eigen::Map<const Eigen::VectorXd>(zd.data(), rows));

  std::vector<double> z_hop = zd;
  for (unsigned hop = 1; hop <= max_hop_; ++hop) {
    z_hop = neighbor_mean(z_hop);
    f.values.col(col++) = Eigen::Map<const Eigen::VectorXd>(z_hop.data(), rows);
    for (std::size_t c = 0; c < k; ++c) {
      const auto& pre = covariate_hops_[c * max_hop_ + (hop - 1)];
      f.values.col(col++) = Eigen::Map<const Eigen::VectorXd>(pre.data(), rows);
    }
  }
  return f;
}

FeatureMatrix build_features(const Graph& g, std::span<const std::uint8_t> z,
                             std::vector<NamedCovariate> covariates, unsigned max_hop) {
  return FeatureBuilder(g, std::move(covariates), max_hop).build(z);
}

Eigen::VectorXd LinearPredictor::predict(const FeatureMatrix& features) const {
  if (features.columns != columns) throw Error("feature columns do not match the predictor");
  return features.values * coefficients;
}

namespace {

Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                            bool penalize_intercept) {
  const auto rows = x.rows();
  const auto d = x.cols();
  if (lambda == 0.0) return x.householderQr().solve(y);
  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(rows + d, d);
  augmented.topRows(rows) = x;
  const double root = std::sqrt(lambda);
  for (Eigen::Index j = 0; j < d; ++j) augmented(rows + j, j) = root;
  if (!penalize_intercept) augmented(rows, 0) = 0.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + d);
  rhs.head(rows) = y;
  return augmented.householderQr().solve(rhs);
}

}  // namespace

LinearPredictor fit(const FeatureMatrix& features, std::span<const double> y,
                    std::span<const Node> rows, const FitOptions& options) {
  const auto n = features.values.rows();
  if (static_cast<Eigen::Index>(y.size()) != n) throw Error("outcome vector length does not match features");
  if (rows.empty()) throw Error("training mask is empty");
  if (options.ridge_lambda && *options.ridge_lambda < 0.0) throw Error("ridge lambda must be nonnegative");

  LinearPredictor pred;
  pred.columns = features.columns;
  pred.penalize_intercept = options.penalize_intercept;
  pred.training_rows.assign(rows.begin(), rows.end());
  std::sort(pred.training_rows.begin(), pred.training_rows.end());
  pred.training_rows.erase(std::unique(pred.training_rows.begin(), pred.training_rows.end()),
                           pred.training_rows.end());

  const auto m = static_cast<Eigen::Index>(pred.training_rows.size());
  const auto d = features.values.cols();
  Eigen::MatrixXd x(m, d);
  Eigen::VectorXd target(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = static_cast<Eigen::Index>(pred.training_rows[static_cast<std::size_t>(r)]);
    if (i >= n) throw OutOfRangeError("training row outside the feature matrix");
    x.row(r) = features.values.row(i);
    target(r) = y[static_cast<std::size_t>(i)];
  }

  double lambda = 0.0;
  if (options.ridge_lambda) {
    lambda = *options.ridge_lambda;
  } else {
    lambda = 1e-6 * x.colwise().squaredNorm().sum() / static_cast<double>(d);
  }
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < d) {
      lambda = 1e-8;
      pred.rank_fallback = true;
    }
  }
  pred.ridge_lambda = lambda;
  pred.coefficients = solve_ridge(x, target, lambda, options.penalize_intercept);
  return pred;
}

std::vector<double> predict_counterfactual(const LinearPredictor& predictor,
                                           const FeatureBuilder& builder, Arm level) {
  if (builder.columns() != predictor.columns)
    throw Error("feature descriptors do not match the fitted predictor");
  const std::vector<std::uint8_t> z(builder.node_count(), arm_bit(level));
  const Eigen::VectorXd out = predictor.predict(builder.build(z));
  return {out.data(), out.data() + out.size()};
}

std::vector<double> predict_counterfactual(const LinearPredictor& predictor, const Graph& g,
                                           std::vector<NamedCovariate> covariates,
                                           unsigned max_hop, Arm level) {
  return predict_counterfactual(predictor, FeatureBuilder(g, std::move(covariates), max_hop), level);
}

std::vector<Node> all_nodes(std::size_t n) {
  std::vector<Node> rows(n);
  std::iota(rows.begin(), rows.end(), Node{0});
  return rows;
}

}  // namespace netexp
