#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netexp/estimators.hpp"
#include "netexp/generators.hpp"
#include "netexp/outcomes.hpp"

namespace netexp {

/// Where the interference network comes from: a file, or a synthetic
/// generator (whose planted blocks can double as clusters).
struct GraphSourceSpec {
  enum class Kind { file, sbm, degree_corrected_sbm, tri_ring };
  Kind kind = Kind::file;
  std::string path;
  SbmSpec sbm;
  DegreeCorrectedSbmSpec dcsbm;
};

struct ClusteringSpec {
  enum class Kind { louvain, planted, file };
  Kind kind = Kind::louvain;
  double resolution = 5.0;
  std::uint64_t seed = 0;
  std::string partition_path;
};

struct OutcomeSpec {
  enum class Kind { linear_two_hop, partial_linear };
  Kind kind = Kind::linear_two_hop;
  double beta = 1.0;
  double r1 = 1.0;
  double r2 = 0.0;
  double sigma = 2.0;
  CovariatePreset covariates = CovariatePreset::two;
  // partial_linear only
  double alpha = 1.0;
  std::string u = "degree";  // degree | touch_count | constant
  ExposureShape h_shape = ExposureShape::linear;
  double h_level = 1.0;
  double v_scale = 1.0;
};

struct PredictorSpec {
  unsigned max_hop = 2;
  std::optional<double> ridge_lambda;
  bool boundary_only = false;
  /// Node covariates fed to the predictor: degree | touch_count | constant.
  std::vector<std::string> covariates{"degree"};
};

enum class Truth { gate, global_treatment_mean };

struct ExperimentConfig {
  GraphSourceSpec graph;
  ClusteringSpec clustering;
  std::vector<double> proportions{0.1, 0.3, 0.5};
  OutcomeSpec outcome;
  PredictorSpec predictor;
  std::vector<EstimatorKind> estimators{EstimatorKind::hajek, EstimatorKind::cae,
                                        EstimatorKind::mii, EstimatorKind::gnn,
                                        EstimatorKind::amii};
  std::size_t repetitions = 1000;
  std::uint64_t master_seed = 2024;
  /// 0 selects the hardware concurrency.
  unsigned threads = 0;
  Truth truth = Truth::global_treatment_mean;
  std::string output_dir = "out";
  bool verbose = false;

  /// Throws Error when R < 1, a proportion is outside (0,1) or the estimator
  /// list needs a predictor that the spec cannot provide.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON form.
std::string config_hash(const ExperimentConfig& config);

}  // namespace netexp
