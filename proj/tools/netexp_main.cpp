#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "netexp/error.hpp"
#include "netexp/simharness.hpp"

namespace {

using namespace netexp;

struct Overrides {
  std::string config_path;
  std::string graph;
  std::optional<double> gamma;
  std::vector<double> proportions;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> estimators;
  bool no_estimators = false;
  std::string out;
  std::optional<unsigned> threads;
  bool verbose = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--graph", o.graph, "Edge list or MatrixMarket file (replaces the graph source)");
  cmd->add_option("--gamma", o.gamma, "Louvain resolution")->check(CLI::PositiveNumber);
  cmd->add_option("--p", o.proportions, "Treatment proportions")->delimiter(',');
  cmd->add_option("--reps", o.reps, "Monte Carlo repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--estimators", o.estimators, "Estimators (DIM,HT,HAJEK,CAE,MII,GNN,AMII)")->delimiter(',');
  cmd->add_flag("--no-estimators", o.no_estimators, "Run with an empty estimator list");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
  cmd->add_flag("--verbose", o.verbose, "Also write per-repetition diagnostics");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!o.graph.empty()) {
    c.graph.kind = GraphSourceSpec::Kind::file;
    c.graph.path = o.graph;
    if (c.clustering.kind == ClusteringSpec::Kind::planted) c.clustering.kind = ClusteringSpec::Kind::louvain;
  }
  if (o.gamma) {
    c.clustering.kind = ClusteringSpec::Kind::louvain;
    c.clustering.resolution = *o.gamma;
  }
  if (!o.proportions.empty()) c.proportions = o.proportions;
  if (o.reps) c.repetitions = *o.reps;
  if (o.seed) c.master_seed = *o.seed;
  if (!o.estimators.empty()) {
    c.estimators.clear();
    for (const auto& name : o.estimators) c.estimators.push_back(parse_estimator(name));
  }
  if (o.no_estimators) c.estimators.clear();
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.verbose) c.verbose = true;
  c.validate();
  return c;
}

void print_stats(const Experiment& e) {
  const auto& s = e.stats();
  fmt::print("nodes {} edges {} (dropped {} self-loops, {} duplicates)\n", e.graph().node_count(),
             e.graph().edge_count(), e.self_loops_dropped(), e.duplicates_dropped());
  fmt::print("clusters {} interior_fraction {:.4f} within_edge_fraction {:.4f} modularity {:.4f}\n",
             s.cluster_count, s.interior_fraction, s.within_edge_fraction, s.modularity);
}

int cmd_run(const Overrides& o) {
  const auto config = resolve(o);
  const Experiment experiment(config);
  print_stats(experiment);
  const auto records = simulate(experiment, config.threads);
  const auto report = summarize(experiment, records);
  emit_report(report, config, config.output_dir, config.verbose ? &records : nullptr);
  emit_csv(report, std::cout);
  const bool any = std::any_of(report.cells.begin(), report.cells.end(),
                               [](const CellSummary& c) { return c.reps_used > 0; });
  if (!report.cells.empty() && !any) {
    std::cerr << "error: every repetition was degenerate for every estimator\n";
    return 3;
  }
  return 0;
}

int cmd_stats(const Overrides& o) {
  auto config = resolve(o);
  config.estimators.clear();
  const Experiment experiment(config);
  print_stats(experiment);
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "partition.txt");
    if (!out) throw Error("cannot write " + (dir / "partition.txt").string());
    write_partition(experiment.graph(), experiment.partition(), out);
  }
  const auto& s = experiment.stats();
  nlohmann::json doc = {{"nodes", experiment.graph().node_count()},
                        {"edges", experiment.graph().edge_count()},
                        {"resolution", config.clustering.resolution},
                        {"seed", config.clustering.seed},
                        {"clusters", s.cluster_count},
                        {"interior_fraction", s.interior_fraction},
                        {"within_edge_fraction", s.within_edge_fraction},
                        {"modularity", s.modularity}};
  std::ofstream out(dir / "stats.json");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("cannot write " + (dir / "stats.json").string());
  return 0;
}

ExperimentConfig toy_config() {
  ExperimentConfig c;
  c.graph.kind = GraphSourceSpec::Kind::tri_ring;
  c.clustering.kind = ClusteringSpec::Kind::planted;
  c.outcome.sigma = 0.0;
  c.truth = Truth::gate;
  c.estimators.assign(kAllEstimators.begin(), kAllEstimators.end());
  c.predictor.ridge_lambda = 0.0;
  return c;
}

int cmd_enumerate(const Overrides& o) {
  auto config = o.config_path.empty() && o.graph.empty() ? toy_config() : resolve(o);
  if (!o.proportions.empty()) config.proportions = o.proportions;
  if (!o.estimators.empty()) {
    config.estimators.clear();
    for (const auto& name : o.estimators) config.estimators.push_back(parse_estimator(name));
  }
  const Experiment experiment(config);
  const auto report = enumerate_expectations(experiment);
  fmt::print("gate {:.12f} truth {:.12f}\n", report.gate, report.truth);
  fmt::print("estimator,p,expectation,bias,degenerate_probability\n");
  for (const auto& row : report.rows) {
    if (row.expectation)
      fmt::print("{},{:g},{:.12f},{:.12f},{:.12f}\n", estimator_name(row.estimator), row.p, *row.expectation,
                 *row.expectation - report.truth, row.degenerate_probability);
    else
      fmt::print("{},{:g},NA,NA,{:.12f}\n", estimator_name(row.estimator), row.p, row.degenerate_probability);
  }
  return 0;
}

bool report_line(bool ok, const std::string& what) {
  fmt::print("[{}] {}\n", ok ? "PASS" : "FAIL", what);
  return ok;
}

bool verify_ht_enumeration() {
  bool ok = true;
  for (const auto shape : {ExposureShape::linear, ExposureShape::quadratic}) {
    auto config = toy_config();
    config.outcome.kind = OutcomeSpec::Kind::partial_linear;
    config.outcome.h_shape = shape;
    config.outcome.u = "touch_count";
    config.estimators = {EstimatorKind::ht};
    const Experiment experiment(config);
    const auto report = enumerate_expectations(experiment);
    double worst = 0.0;
    for (const auto& row : report.rows) worst = std::max(worst, std::abs(*row.expectation - report.gate));
    ok &= report_line(worst <= 1e-12, fmt::format("HT exact expectation equals GATE on the tri-ring toy, {} exposure (max error {:.2e})",
                                               shape == ExposureShape::linear ? "linear" : "quadratic", worst));
  }
  return ok;
}

bool verify_exposure_probability() {
  const auto toy = tri_ring();
  const auto part = decompose(toy.graph, toy.block_of);
  double worst = 0.0;
  for (double p : {0.1, 0.3, 0.5}) {
    const auto atoms = enumerate_assignments(part, p);
    for (Node i = 0; i < toy.graph.node_count(); ++i)
      for (const auto arm : {Arm::control, Arm::treated}) {
        double mass = 0.0;
        for (const auto& atom : atoms) {
          const auto draw = expand_assignment(part, atom.cluster_bits, p);
          if (exposed(toy.graph, draw.unit_bits, i, arm)) mass += atom.probability;
        }
        worst = std::max(worst, std::abs(mass - exposure_probability(part, p, i, arm)));
      }
  }
  return report_line(worst <= 1e-12, fmt::format("exposure probabilities match enumeration (max error {:.2e})", worst));
}

bool verify_ppi_identity() {
  const auto toy = tri_ring();
  const auto part = decompose(toy.graph, toy.block_of);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 3.0);
  double worst = 0.0;
  std::size_t trials = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::uint8_t> bits{static_cast<std::uint8_t>(t & 1), static_cast<std::uint8_t>((t >> 1) & 1), 1};
    if (bits[0] && bits[1]) bits[2] = 0;
    const auto draw = expand_assignment(part, bits, 0.5);
    std::vector<double> y(9), p1(9), p0(9);
    for (std::size_t i = 0; i < 9; ++i) {
      y[i] = normal(rng);
      p1[i] = normal(rng);
      p0[i] = normal(rng);
    }
    const double a = amii(part, draw.unit_bits, y, p1, p0);
    const double b = ppi_arm_mean(part, draw.unit_bits, y, p1, Arm::treated) -
                     ppi_arm_mean(part, draw.unit_bits, y, p0, Arm::control);
    worst = std::max(worst, std::abs(a - b));
    ++trials;
  }
  return report_line(worst <= 1e-10, fmt::format("AMII equals the PPI form over {} random inputs (max error {:.2e})", trials, worst));
}

bool verify_bias_law(const Overrides& o, bool quick) {
  ExperimentConfig config;
  if (!o.config_path.empty()) {
    config = resolve(o);
  } else {
    config.graph.kind = GraphSourceSpec::Kind::sbm;
    config.graph.sbm = {20, 100, 0.1, 0.0005, 11};
    config.clustering.kind = ClusteringSpec::Kind::planted;
    config.outcome.kind = OutcomeSpec::Kind::partial_linear;
    config.outcome.alpha = 1.0;
    config.outcome.sigma = 2.0;
    config.proportions = {0.5};
    config.truth = Truth::gate;
    config.repetitions = quick ? 300 : 2000;
    if (o.reps) config.repetitions = *o.reps;
    if (o.threads) config.threads = *o.threads;
  }
  config.estimators = {EstimatorKind::mii, EstimatorKind::amii};
  const auto report = verify_interior_bias(config);
  fmt::print("alpha {:.4f} mu_int - mu {:.6f} gate {:.6f}\n", report.alpha, report.interior_gap, report.gate);
  for (const auto& row : report.rows) {
    report_line(row.mii_pass, fmt::format("p={:g} MII bias {:.5f} vs predicted {:.5f} (3 SE = {:.5f})", row.p,
                                          row.mii_bias, row.mii_predicted, 3 * row.mii_se));
    report_line(row.amii_pass, fmt::format("p={:g} AMII bias {:.5f} vs predicted {:.5f} (3 SE = {:.5f}, mean alpha_hat {:.4f})",
                                           row.p, row.amii_bias, row.amii_predicted, 3 * row.amii_se,
                                           row.mean_alpha_hat));
  }
  return report.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimators and Monte Carlo harness for A/B tests on networks with interference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(netexp::toolkit_version()));

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Monte Carlo bias/std/MSE tables");
  add_overrides(run, run_opts);

  Overrides stats_opts;
  auto* stats = app.add_subcommand("stats", "Clustering statistics and partition sidecar");
  add_overrides(stats, stats_opts);

  Overrides verify_opts;
  bool quick = false;
  bool skip_bias_law = false;
  auto* verify = app.add_subcommand("verify", "Exact oracles and the interior-bias law check");
  add_overrides(verify, verify_opts);
  verify->add_flag("--quick", quick, "Fewer repetitions for the interior-bias check");
  verify->add_flag("--skip-bias-law", skip_bias_law, "Run only the exact oracles");

  Overrides enum_opts;
  auto* enumerate = app.add_subcommand("enumerate", "Exact expectations over all cluster assignments");
  add_overrides(enumerate, enum_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*stats) return cmd_stats(stats_opts);
    if (*enumerate) return cmd_enumerate(enum_opts);
    if (*verify) {
      bool ok = verify_ht_enumeration();
      ok &= verify_exposure_probability();
      ok &= verify_ppi_identity();
      if (!skip_bias_law) ok &= verify_bias_law(verify_opts, quick);
      return ok ? 0 : 1;
    }
  } catch (const netexp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
