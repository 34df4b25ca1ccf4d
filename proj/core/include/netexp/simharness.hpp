#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netexp/community.hpp"
#include "netexp/config.hpp"
#include "netexp/design.hpp"
#include "netexp/estimators.hpp"
#include "netexp/graph.hpp"
#include "netexp/outcomes.hpp"
#include "netexp/predictor.hpp"

namespace netexp {

std::string_view toolkit_version();

/// Estimates from one realized (assignment, outcome) pair.
struct DrawResult {
  EstimateSet estimates;
  /// Fitted coefficient on the "<u>*z" column, when the predictor has one.
  std::optional<double> interaction_coefficient;
  bool rank_fallback = false;
};

/// Graph, partition, outcome model and predictor basis: everything that
/// stays fixed across Monte Carlo repetitions. Immutable after construction
/// and safe to share between threads.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  /// Uses an already-built graph instead of the config's graph source.
  Experiment(ExperimentConfig config, Graph graph);
  Experiment(ExperimentConfig config, Graph graph, Partition partition);

  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  const ExperimentConfig& config() const { return config_; }
  const Graph& graph() const { return *graph_; }
  const Partition& partition() const { return partition_; }
  const OutcomeModel& model() const { return *model_; }
  const ClusteringStats& stats() const { return stats_; }
  double gate() const { return gate_; }
  /// The estimand selected by the config.
  double truth() const { return truth_; }
  bool needs_predictor() const { return builder_ != nullptr; }
  std::size_t self_loops_dropped() const { return self_loops_dropped_; }
  std::size_t duplicates_dropped() const { return duplicates_dropped_; }

  DrawResult evaluate(const TreatmentDraw& draw, std::span<const double> y) const;

 private:
  void setup(std::optional<Partition> partition, std::vector<ClusterId> planted);
  std::vector<double> named_covariate(const std::string& name) const;

  ExperimentConfig config_;
  std::unique_ptr<Graph> graph_;
  Partition partition_;
  ClusteringStats stats_;
  std::unique_ptr<OutcomeModel> model_;
  std::unique_ptr<FeatureBuilder> builder_;
  FeatureMatrix treated_features_;
  FeatureMatrix control_features_;
  std::vector<Node> training_rows_;
  std::optional<std::size_t> interaction_column_;
  double gate_ = 0.0;
  double truth_ = 0.0;
  std::size_t self_loops_dropped_ = 0;
  std::size_t duplicates_dropped_ = 0;
};

struct RepetitionRecord {
  std::vector<DrawResult> per_proportion;
};

/// Runs every repetition; record r depends only on (config, r).
std::vector<RepetitionRecord> simulate(const Experiment& experiment, unsigned threads = 0);

struct CellSummary {
  EstimatorKind estimator = EstimatorKind::mii;
  double p = 0.0;
  std::optional<double> mean;
  std::optional<double> bias;
  std::optional<double> std;
  std::optional<double> mse;
  std::size_t reps_used = 0;
  std::size_t degenerate = 0;
  std::string absent_reason;
};

struct SimulationReport {
  std::vector<CellSummary> cells;
  ClusteringStats stats;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double truth = 0.0;
  double gate = 0.0;
  Truth truth_kind = Truth::global_treatment_mean;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::size_t repetitions = 0;
  std::string version;

  const CellSummary* find(EstimatorKind estimator, double p) const;
};

/// Bias = mean - truth, std = sample standard deviation, mse = mean squared
/// error, each over the non-degenerate repetitions of a cell, summed in
/// repetition order.
SimulationReport summarize(const Experiment& experiment, const std::vector<RepetitionRecord>& records);

SimulationReport run(const ExperimentConfig& config);
SimulationReport run(const Experiment& experiment);

/// CSV: provenance lines starting with '#', then
/// "estimator,p,bias,std,mse,reps_used,degenerate" and one row per cell.
void emit_csv(const SimulationReport& report, std::ostream& out);
nlohmann::json report_json(const SimulationReport& report, const ExperimentConfig& config);
/// Writes report.csv and report.json into `dir` (created if missing), and
/// repetitions.jsonl with per-repetition diagnostics when `records` is given.
/// Throws Error on I/O failure.
void emit_report(const SimulationReport& report, const ExperimentConfig& config,
                 const std::filesystem::path& dir,
                 const std::vector<RepetitionRecord>* records = nullptr);

struct InteriorBiasRow {
  double p = 0.0;
  std::size_t reps_used = 0;
  double mii_bias = 0.0;
  double mii_predicted = 0.0;
  double mii_se = 0.0;
  double amii_bias = 0.0;
  double amii_predicted = 0.0;
  double amii_se = 0.0;
  double mean_alpha_hat = 0.0;
  bool mii_pass = false;
  bool amii_pass = false;
};

struct InteriorBiasReport {
  double alpha = 0.0;
  double interior_gap = 0.0;  // mu_Int - mu
  double gate = 0.0;
  std::vector<InteriorBiasRow> rows;
  bool pass = false;
};

/// Compares the empirical MII and AMII biases against alpha * (mu_Int - mu)
/// and (mean alpha_hat - alpha) * (mu - mu_Int), at 3 Monte Carlo standard
/// errors. Requires a partial_linear outcome and a predictor that includes
/// the outcome's u covariate.
InteriorBiasReport verify_interior_bias(const ExperimentConfig& config);
InteriorBiasReport verify_interior_bias(const Experiment& experiment);

struct ExactExpectation {
  EstimatorKind estimator = EstimatorKind::ht;
  double p = 0.0;
  /// Conditional on a non-degenerate draw; empty when every draw is degenerate.
  std::optional<double> expectation;
  double degenerate_probability = 0.0;
};

struct EnumerationReport {
  double gate = 0.0;
  double truth = 0.0;
  std::vector<ExactExpectation> rows;
};

/// Exact noiseless expectations over all 2^K cluster assignments (K <= 20).
EnumerationReport enumerate_expectations(const Experiment& experiment);

}  // namespace netexp
