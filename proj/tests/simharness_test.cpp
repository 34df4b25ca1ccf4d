#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netexp/error.hpp"
#include "netexp/simharness.hpp"

namespace netexp {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_sbm_config() {
  ExperimentConfig c;
  c.graph.kind = GraphSourceSpec::Kind::sbm;
  c.graph.sbm = {12, 25, 0.3, 0.004, 5};
  c.clustering.kind = ClusteringSpec::Kind::planted;
  c.repetitions = 40;
  c.master_seed = 99;
  c.threads = 1;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("netexp_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string csv_of(const SimulationReport& r) {
  std::ostringstream out;
  emit_csv(r, out);
  return out.str();
}

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      EXPECT_EQ(line, "estimator,p,bias,std,mse,reps_used,degenerate");
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  EXPECT_TRUE(header_seen);
  return rows;
}

TEST(Config, JsonRoundTrip) {
  auto c = small_sbm_config();
  c.outcome.kind = OutcomeSpec::Kind::partial_linear;
  c.outcome.h_shape = ExposureShape::square_root;
  c.outcome.covariates = CovariatePreset::one;
  c.predictor.ridge_lambda = 0.25;
  c.predictor.boundary_only = true;
  c.predictor.covariates = {"degree", "touch_count"};
  c.truth = Truth::gate;
  c.estimators = {EstimatorKind::ht, EstimatorKind::amii};
  const auto doc = to_json(c);
  EXPECT_EQ(to_json(config_from_json(doc)), doc);
  EXPECT_EQ(config_hash(config_from_json(doc)), config_hash(c));
}

TEST(Config, FileRoundTrip) {
  const auto dir = scratch_dir("config");
  fs::create_directories(dir);
  const auto c = small_sbm_config();
  {
    std::ofstream out(dir / "c.json");
    out << to_json(c).dump(2);
  }
  EXPECT_EQ(to_json(load_config(dir / "c.json")), to_json(c));
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const auto c = config_from_json(nlohmann::json::parse(R"({"repetitions": 7, "outcome": {"r2": 1}})"));
  EXPECT_EQ(c.repetitions, 7U);
  EXPECT_EQ(c.outcome.r2, 1.0);
  EXPECT_EQ(c.outcome.sigma, 2.0);
  EXPECT_EQ(c.proportions, (std::vector<double>{0.1, 0.3, 0.5}));
  EXPECT_EQ(c.estimators.size(), 5U);
}

TEST(Config, Validation) {
  auto c = small_sbm_config();
  c.repetitions = 0;
  EXPECT_THROW(c.validate(), Error);
  c = small_sbm_config();
  c.proportions = {0.2, 1.0};
  EXPECT_THROW(c.validate(), Error);
  c = small_sbm_config();
  c.predictor.covariates = {"age"};
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"truth": "ate"})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"estimators": ["XYZ"]})")), Error);
}

TEST(Config, HashIgnoresThreadsAndOutput) {
  auto a = small_sbm_config();
  auto b = a;
  b.threads = 8;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.master_seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Run, SingleNoiselessRepetition) {
  auto c = small_sbm_config();
  c.repetitions = 1;
  c.outcome.sigma = 0.0;
  c.outcome.covariates = CovariatePreset::two;
  c.predictor.covariates = {"degree", "touch_count"};
  c.predictor.ridge_lambda = 0.0;
  c.truth = Truth::gate;
  c.proportions = {0.5};
  const Experiment e(c);
  const auto records = simulate(e, 1);
  const auto report = summarize(e, records);
  const auto* cell = report.find(EstimatorKind::amii, 0.5);
  ASSERT_NE(cell, nullptr);
  ASSERT_TRUE(cell->bias.has_value());
  const double estimate = *records[0].per_proportion[0].estimates.value(EstimatorKind::amii);
  EXPECT_DOUBLE_EQ(*cell->bias, estimate - e.gate());
  EXPECT_EQ(*cell->std, 0.0);
  // The model lies in the predictor's span, so the prediction-based
  // estimators recover the GATE.
  EXPECT_NEAR(estimate, e.gate(), 1e-6);
  EXPECT_NEAR(*records[0].per_proportion[0].estimates.value(EstimatorKind::gnn), e.gate(), 1e-6);
}

TEST(Run, CsvShapeAndMseConsistency) {
  const auto c = small_sbm_config();
  const auto report = run(c);
  const auto rows = data_rows(csv_of(report));
  EXPECT_EQ(rows.size(), 15U);
  for (const auto& cell : report.cells) {
    ASSERT_TRUE(cell.mse.has_value());
    const double n = static_cast<double>(cell.reps_used);
    EXPECT_NEAR(*cell.mse, *cell.bias * *cell.bias + *cell.std * *cell.std * (n - 1) / n, 1e-9);
    EXPECT_EQ(cell.reps_used + cell.degenerate, c.repetitions);
  }
}

TEST(Run, EmptyEstimatorListGivesHeaderOnlyCsv) {
  auto c = small_sbm_config();
  c.estimators.clear();
  EXPECT_TRUE(data_rows(csv_of(run(c))).empty());
}

TEST(Run, IdenticalAcrossThreadCounts) {
  auto c = small_sbm_config();
  c.repetitions = 30;
  const Experiment e(c);
  const auto one = csv_of(summarize(e, simulate(e, 1)));
  const auto four = csv_of(summarize(e, simulate(e, 4)));
  const auto again = csv_of(summarize(e, simulate(e, 1)));
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, again);
}

TEST(Run, AllDegenerateCellIsAbsent) {
  auto c = small_sbm_config();
  // A single planted block: every draw is one-armed.
  c.graph.sbm = {1, 30, 0.3, 0.0, 2};
  c.estimators = {EstimatorKind::mii, EstimatorKind::ht};
  c.repetitions = 5;
  const auto report = run(c);
  const auto* mii_cell = report.find(EstimatorKind::mii, 0.1);
  ASSERT_NE(mii_cell, nullptr);
  EXPECT_FALSE(mii_cell->bias.has_value());
  EXPECT_EQ(mii_cell->degenerate, 5U);
  EXPECT_FALSE(mii_cell->absent_reason.empty());
  EXPECT_TRUE(report.find(EstimatorKind::ht, 0.1)->bias.has_value());
  const auto csv = csv_of(report);
  EXPECT_NE(csv.find("MII,0.1,NA,NA,NA,0,5"), std::string::npos);
}

TEST(Report, WritesFiles) {
  auto c = small_sbm_config();
  c.repetitions = 3;
  const Experiment e(c);
  const auto records = simulate(e, 1);
  const auto report = summarize(e, records);
  const auto dir = scratch_dir("report");
  emit_report(report, c, dir, &records);
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
  std::ifstream json_in(dir / "report.json");
  const auto doc = nlohmann::json::parse(json_in);
  EXPECT_EQ(doc["cells"].size(), 15U);
  EXPECT_EQ(doc["config_hash"], config_hash(c));
  std::ifstream lines(dir / "repetitions.jsonl");
  std::size_t count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  EXPECT_EQ(count, 9U);
}

TEST(Report, UnwritableSinkIsAnError) {
  const auto dir = scratch_dir("blocked");
  fs::create_directories(dir);
  { std::ofstream(dir / "file") << "x"; }
  auto c = small_sbm_config();
  c.repetitions = 1;
  EXPECT_THROW(emit_report(run(c), c, dir / "file" / "sub"), Error);
}

TEST(Experiment, PlantedNeedsSyntheticGraph) {
  ExperimentConfig c;
  c.graph.path = "graph.txt";
  c.clustering.kind = ClusteringSpec::Kind::planted;
  EXPECT_THROW(Experiment{c}, Error);
}

TEST(Experiment, PartitionFromFile) {
  auto c = small_sbm_config();
  const Experiment planted(c);
  const auto dir = scratch_dir("partition");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "part.txt");
    write_partition(planted.graph(), planted.partition(), out);
  }
  c.clustering.kind = ClusteringSpec::Kind::file;
  c.clustering.partition_path = (dir / "part.txt").string();
  const Experiment from_file(c);
  EXPECT_EQ(from_file.partition().cluster_of, planted.partition().cluster_of);
}

TEST(Enumeration, HtExpectationIsGate) {
  ExperimentConfig c;
  c.graph.kind = GraphSourceSpec::Kind::tri_ring;
  c.clustering.kind = ClusteringSpec::Kind::planted;
  c.outcome.sigma = 0.0;
  c.truth = Truth::gate;
  c.estimators = {EstimatorKind::ht, EstimatorKind::mii};
  const Experiment e(c);
  const auto report = enumerate_expectations(e);
  for (const auto& row : report.rows) {
    if (row.estimator == EstimatorKind::ht) {
      EXPECT_NEAR(*row.expectation, report.gate, 1e-12);
      EXPECT_EQ(row.degenerate_probability, 0.0);
    } else {
      const double p = row.p;
      // MII is defined unless all three clusters share one arm.
      EXPECT_NEAR(row.degenerate_probability, p * p * p + (1 - p) * (1 - p) * (1 - p), 1e-12);
    }
  }
}

ExperimentConfig bias_law_config(double alpha, const std::string& u) {
  ExperimentConfig c;
  c.graph.kind = GraphSourceSpec::Kind::sbm;
  c.graph.sbm = {15, 40, 0.15, 0.002, 3};
  c.clustering.kind = ClusteringSpec::Kind::planted;
  c.outcome.kind = OutcomeSpec::Kind::partial_linear;
  c.outcome.alpha = alpha;
  c.outcome.u = u;
  c.predictor.covariates = {u};
  c.outcome.sigma = 2.0;
  c.proportions = {0.5};
  c.estimators = {EstimatorKind::mii, EstimatorKind::amii};
  c.truth = Truth::gate;
  c.repetitions = 400;
  c.threads = 1;
  return c;
}

TEST(InteriorBiasLaw, NoInteractionMeansNoBias) {
  const auto report = verify_interior_bias(bias_law_config(0.0, "degree"));
  ASSERT_EQ(report.rows.size(), 1U);
  EXPECT_EQ(report.rows[0].mii_predicted, 0.0);
  EXPECT_TRUE(report.pass);
}

TEST(InteriorBiasLaw, ConstantCovariateIsHarmless) {
  const auto report = verify_interior_bias(bias_law_config(1.0, "constant"));
  EXPECT_NEAR(report.interior_gap, 0.0, 1e-12);
  EXPECT_LE(std::abs(report.rows[0].mii_bias), 3 * report.rows[0].mii_se);
  EXPECT_LE(std::abs(report.rows[0].amii_bias), 3 * report.rows[0].amii_se);
}

TEST(InteriorBiasLaw, DegreeInteraction) {
  const auto report = verify_interior_bias(bias_law_config(1.0, "degree"));
  EXPECT_LT(report.interior_gap, 0.0);
  EXPECT_TRUE(report.rows[0].mii_pass);
  EXPECT_TRUE(report.rows[0].amii_pass);
}

TEST(InteriorBiasLaw, NeedsPartialLinearModel) {
  auto c = bias_law_config(1.0, "degree");
  c.outcome.kind = OutcomeSpec::Kind::linear_two_hop;
  EXPECT_THROW(verify_interior_bias(c), Error);
}

// Clusters are the planted blocks of an SBM whose block size stays fixed
// while the number of blocks grows; cross-block degree is held near 0.3.
SimulationReport consistency_run(std::size_t blocks) {
  ExperimentConfig c;
  c.graph.kind = GraphSourceSpec::Kind::sbm;
  const std::size_t size = 20;
  c.graph.sbm = {blocks, size, 0.4, 0.3 / static_cast<double>(blocks * size), 17};
  c.clustering.kind = ClusteringSpec::Kind::planted;
  c.outcome.covariates = CovariatePreset::none;
  c.outcome.r2 = 0.0;
  c.outcome.sigma = 2.0;
  c.proportions = {0.5};
  c.estimators = {EstimatorKind::mii};
  c.truth = Truth::gate;
  c.repetitions = 300;
  c.master_seed = 5;
  return run(c);
}

TEST(Consistency, MiiImprovesWithMoreClusters) {
  std::optional<CellSummary> previous;
  for (std::size_t k : {10U, 40U, 160U}) {
    const auto report = consistency_run(k);
    const auto cell = *report.find(EstimatorKind::mii, 0.5);
    ASSERT_TRUE(cell.bias.has_value());
    const double se = *cell.std / std::sqrt(static_cast<double>(cell.reps_used));
    EXPECT_LE(std::abs(*cell.bias), 3 * se + 1e-12) << "K=" << k;
    if (previous) {
      const double prev_se = *previous->std / std::sqrt(static_cast<double>(previous->reps_used));
      EXPECT_LE(std::abs(*cell.bias), std::abs(*previous->bias) + 3 * (se + prev_se)) << "K=" << k;
      EXPECT_LT(*cell.std, *previous->std) << "K=" << k;
    }
    previous = cell;
  }
}

TEST(Gnn, BetterAtHigherProportion) {
  ExperimentConfig c;
  c.graph.kind = GraphSourceSpec::Kind::degree_corrected_sbm;
  c.graph.dcsbm = {20, 60, 30.0, 0.6, 1.0, 4};
  c.clustering.kind = ClusteringSpec::Kind::louvain;
  c.proportions = {0.1, 0.5};
  c.estimators = {EstimatorKind::gnn};
  c.repetitions = 100;
  const auto report = run(c);
  EXPECT_LT(*report.find(EstimatorKind::gnn, 0.5)->mse, *report.find(EstimatorKind::gnn, 0.1)->mse);
}

}  // namespace
}  // namespace netexp
