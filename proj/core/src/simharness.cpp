#include "netexp/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "netexp/error.hpp"
#include "netexp/generators.hpp"

#ifndef NETEXP_VERSION
#define NETEXP_VERSION "0.0.0"
#endif

namespace netexp {

std::string_view toolkit_version() { return NETEXP_VERSION; }

namespace {

constexpr std::uint64_t kCovariateStream = ~std::uint64_t{0};

struct LoadedGraph {
  Graph graph;
  std::vector<ClusterId> planted;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
};

LoadedGraph load_graph(const GraphSourceSpec& spec) {
  LoadedGraph out;
  switch (spec.kind) {
    case GraphSourceSpec::Kind::file: {
      auto loaded = load_edge_list_file(spec.path);
      out.graph = std::move(loaded.graph);
      out.self_loops = loaded.self_loops_dropped;
      out.duplicates = loaded.duplicates_dropped;
      break;
    }
    case GraphSourceSpec::Kind::sbm: {
      auto planted = stochastic_block_model(spec.sbm);
      out.graph = std::move(planted.graph);
      out.planted = std::move(planted.block_of);
      break;
    }
    case GraphSourceSpec::Kind::degree_corrected_sbm: {
      auto planted = degree_corrected_sbm(spec.dcsbm);
      out.graph = std::move(planted.graph);
      out.planted = std::move(planted.block_of);
      break;
    }
    case GraphSourceSpec::Kind::tri_ring: {
      auto planted = tri_ring();
      out.graph = std::move(planted.graph);
      out.planted = std::move(planted.block_of);
      break;
    }
  }
  return out;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  auto loaded = load_graph(config_.graph);
  graph_ = std::make_unique<Graph>(std::move(loaded.graph));
  self_loops_dropped_ = loaded.self_loops;
  duplicates_dropped_ = loaded.duplicates;
  setup(std::nullopt, std::move(loaded.planted));
}

Experiment::Experiment(ExperimentConfig config, Graph graph) : config_(std::move(config)) {
  graph_ = std::make_unique<Graph>(std::move(graph));
  setup(std::nullopt, {});
}

Experiment::Experiment(ExperimentConfig config, Graph graph, Partition partition)
    : config_(std::move(config)) {
  graph_ = std::make_unique<Graph>(std::move(graph));
  setup(std::move(partition), {});
}

std::vector<double> Experiment::named_covariate(const std::string& name) const {
  if (name == "degree") return normalized_degree(*graph_);
  if (name == "touch_count") return normalized_touch_count(partition_);
  if (name == "constant") return std::vector<double>(graph_->node_count(), 1.0);
  throw Error("unknown covariate: " + name);
}

void Experiment::setup(std::optional<Partition> partition, std::vector<ClusterId> planted) {
  const auto& g = *graph_;
  if (g.node_count() == 0) throw Error("experiment graph is empty");

  if (partition) {
    partition_ = std::move(*partition);
  } else {
    switch (config_.clustering.kind) {
      case ClusteringSpec::Kind::louvain:
        partition_ = louvain(g, {config_.clustering.resolution, config_.clustering.seed});
        break;
      case ClusteringSpec::Kind::planted:
        if (planted.empty()) throw Error("planted clustering requires a synthetic graph source");
        partition_ = decompose(g, std::move(planted));
        break;
      case ClusteringSpec::Kind::file: {
        std::ifstream in(config_.clustering.partition_path);
        if (!in) throw Error("cannot open partition file: " + config_.clustering.partition_path);
        partition_ = read_partition(g, in);
        break;
      }
    }
  }
  if (partition_.node_count() != g.node_count()) throw Error("partition does not match the graph");
  stats_ = clustering_stats(g, partition_, config_.clustering.resolution);

  const auto& o = config_.outcome;
  if (o.kind == OutcomeSpec::Kind::linear_two_hop) {
    model_ = std::make_unique<LinearTwoHopModel>(g, o.beta, o.r1, o.r2, o.sigma,
                                                 covariate_interactions(g, partition_, o.covariates));
  } else {
    auto rng = substream(config_.master_seed, kCovariateStream, kCovariateStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(g.node_count());
    for (auto& x : v) x = o.v_scale * normal(rng);
    model_ = std::make_unique<PartialLinearModel>(g, o.beta, o.alpha, named_covariate(o.u), std::move(v),
                                                  o.h_shape, o.h_level, o.sigma);
  }
  gate_ = true_gate(*model_);
  truth_ = config_.truth == Truth::gate ? gate_ : global_treatment_mean(*model_);

  const bool wants_predictor =
      std::any_of(config_.estimators.begin(), config_.estimators.end(), [](EstimatorKind k) {
        return k == EstimatorKind::gnn || k == EstimatorKind::amii;
      });
  if (wants_predictor) {
    std::vector<NamedCovariate> covs;
    for (const auto& name : config_.predictor.covariates) covs.push_back({name, named_covariate(name)});
    builder_ = std::make_unique<FeatureBuilder>(g, std::move(covs), config_.predictor.max_hop);
    treated_features_ = builder_->build(std::vector<std::uint8_t>(g.node_count(), 1));
    control_features_ = builder_->build(std::vector<std::uint8_t>(g.node_count(), 0));
    if (config_.predictor.boundary_only) {
      for (Node i = 0; i < g.node_count(); ++i)
        if (!partition_.is_interior(i)) training_rows_.push_back(i);
      if (training_rows_.empty()) throw Error("boundary-only training needs at least one boundary node");
    } else {
      training_rows_ = all_nodes(g.node_count());
    }
    if (o.kind == OutcomeSpec::Kind::partial_linear) {
      const auto& cols = builder_->columns();
      for (std::size_t c = 0; c < cols.size(); ++c)
        if (cols[c].name == o.u + "*z") interaction_column_ = c;
    }
  }
}

DrawResult Experiment::evaluate(const TreatmentDraw& draw, std::span<const double> y) const {
  DrawResult result;
  EstimationInput in;
  in.graph = graph_.get();
  in.partition = &partition_;
  in.z = draw.unit_bits;
  in.y = y;
  in.p = draw.p;

  std::vector<double> pred1;
  std::vector<double> pred0;
  if (builder_) {
    const auto features = builder_->build(draw.unit_bits);
    FitOptions options;
    options.ridge_lambda = config_.predictor.ridge_lambda;
    const auto predictor = fit(features, y, training_rows_, options);
    const Eigen::VectorXd t = predictor.predict(treated_features_);
    const Eigen::VectorXd c = predictor.predict(control_features_);
    pred1.assign(t.data(), t.data() + t.size());
    pred0.assign(c.data(), c.data() + c.size());
    result.rank_fallback = predictor.rank_fallback;
    if (interaction_column_)
      result.interaction_coefficient = predictor.coefficients(static_cast<Eigen::Index>(*interaction_column_));
  }
  in.pred1 = pred1;
  in.pred0 = pred0;
  result.estimates = estimate_all(in, config_.estimators);
  return result;
}

std::vector<RepetitionRecord> simulate(const Experiment& experiment, unsigned threads) {
  const auto& config = experiment.config();
  const std::size_t reps = config.repetitions;
  std::vector<RepetitionRecord> records(reps);

  auto run_one = [&](std::size_t r) {
    auto& record = records[r];
    record.per_proportion.reserve(config.proportions.size());
    for (std::size_t j = 0; j < config.proportions.size(); ++j) {
      auto rng = substream(config.master_seed, r, j);
      const auto draw = draw_assignment(experiment.partition(), config.proportions[j], rng);
      const auto y = realize(experiment.model(), draw.unit_bits, rng);
      record.per_proportion.push_back(experiment.evaluate(draw, y));
    }
  };

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  if (threads <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < reps; r = next++) {
        try {
          run_one(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = reps;
        }
      }
    });
  for (auto& worker : pool) worker.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

const CellSummary* SimulationReport::find(EstimatorKind estimator, double p) const {
  for (const auto& c : cells)
    if (c.estimator == estimator && c.p == p) return &c;
  return nullptr;
}

SimulationReport summarize(const Experiment& experiment, const std::vector<RepetitionRecord>& records) {
  const auto& config = experiment.config();
  SimulationReport report;
  report.stats = experiment.stats();
  report.node_count = experiment.graph().node_count();
  report.edge_count = experiment.graph().edge_count();
  report.truth = experiment.truth();
  report.gate = experiment.gate();
  report.truth_kind = config.truth;
  report.config_hash = config_hash(config);
  report.master_seed = config.master_seed;
  report.repetitions = records.size();
  report.version = std::string(toolkit_version());

  for (auto kind : config.estimators) {
    for (std::size_t j = 0; j < config.proportions.size(); ++j) {
      CellSummary cell;
      cell.estimator = kind;
      cell.p = config.proportions[j];
      std::vector<double> values;
      values.reserve(records.size());
      for (const auto& rec : records) {
        const auto* entry = rec.per_proportion[j].estimates.find(kind);
        if (entry && entry->value) {
          values.push_back(*entry->value);
        } else {
          ++cell.degenerate;
          if (cell.absent_reason.empty() && entry) cell.absent_reason = entry->diagnostics.degenerate_reason;
        }
      }
      cell.reps_used = values.size();
      if (!values.empty()) {
        const double m = mean_of(values);
        double ss = 0.0;
        double se = 0.0;
        for (double v : values) {
          ss += (v - m) * (v - m);
          se += (v - report.truth) * (v - report.truth);
        }
        const auto count = static_cast<double>(values.size());
        cell.mean = m;
        cell.bias = m - report.truth;
        cell.std = values.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
        cell.mse = se / count;
        cell.absent_reason.clear();
      } else if (cell.absent_reason.empty()) {
        cell.absent_reason = "every repetition was degenerate";
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

SimulationReport run(const Experiment& experiment) {
  return summarize(experiment, simulate(experiment, experiment.config().threads));
}

SimulationReport run(const ExperimentConfig& config) {
  const Experiment experiment(config);
  return run(experiment);
}

namespace {

std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("NA");
}

std::string truth_name(Truth t) { return t == Truth::gate ? "gate" : "global_treatment_mean"; }

}  // namespace

void emit_csv(const SimulationReport& r, std::ostream& out) {
  out << fmt::format("# netexp {}\n", r.version);
  out << fmt::format("# config_hash: {}\n", r.config_hash);
  out << fmt::format("# master_seed: {}\n", r.master_seed);
  out << fmt::format("# repetitions: {}\n", r.repetitions);
  out << fmt::format("# graph: nodes={} edges={}\n", r.node_count, r.edge_count);
  out << fmt::format("# clustering: clusters={} interior_fraction={:.6f} within_edge_fraction={:.6f} modularity={:.6f}\n",
                     r.stats.cluster_count, r.stats.interior_fraction, r.stats.within_edge_fraction,
                     r.stats.modularity);
  out << fmt::format("# truth: {}={:.6f} gate={:.6f}\n", truth_name(r.truth_kind), r.truth, r.gate);
  out << "estimator,p,bias,std,mse,reps_used,degenerate\n";
  for (const auto& c : r.cells)
    out << fmt::format("{},{:g},{},{},{},{},{}\n", estimator_name(c.estimator), c.p, fmt_optional(c.bias),
                       fmt_optional(c.std), fmt_optional(c.mse), c.reps_used, c.degenerate);
}

nlohmann::json report_json(const SimulationReport& r, const ExperimentConfig& config) {
  using nlohmann::json;
  json doc;
  doc["version"] = r.version;
  doc["config_hash"] = r.config_hash;
  doc["master_seed"] = r.master_seed;
  doc["repetitions"] = r.repetitions;
  doc["config"] = to_json(config);
  doc["graph"] = {{"nodes", r.node_count}, {"edges", r.edge_count}};
  doc["clustering"] = {{"clusters", r.stats.cluster_count},
                       {"interior_fraction", r.stats.interior_fraction},
                       {"within_edge_fraction", r.stats.within_edge_fraction},
                       {"modularity", r.stats.modularity}};
  doc["truth"] = {{"kind", truth_name(r.truth_kind)}, {"value", r.truth}, {"gate", r.gate}};
  json cells = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const auto& c : r.cells) {
    json cell = {{"estimator", std::string(estimator_name(c.estimator))},
                 {"p", c.p},
                 {"mean", opt(c.mean)},
                 {"bias", opt(c.bias)},
                 {"std", opt(c.std)},
                 {"mse", opt(c.mse)},
                 {"reps_used", c.reps_used},
                 {"degenerate", c.degenerate}};
    if (!c.absent_reason.empty()) cell["absent_reason"] = c.absent_reason;
    cells.push_back(std::move(cell));
  }
  doc["cells"] = std::move(cells);
  return doc;
}

void emit_report(const SimulationReport& report, const ExperimentConfig& config,
                 const std::filesystem::path& dir, const std::vector<RepetitionRecord>* records) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
  };
  {
    auto out = open(dir / "report.csv");
    emit_csv(report, out);
    if (!out) throw Error("write failed: " + (dir / "report.csv").string());
  }
  {
    auto out = open(dir / "report.json");
    out << report_json(report, config).dump(2) << '\n';
    if (!out) throw Error("write failed: " + (dir / "report.json").string());
  }
  if (records) {
    auto out = open(dir / "repetitions.jsonl");
    for (std::size_t r = 0; r < records->size(); ++r) {
      for (std::size_t j = 0; j < (*records)[r].per_proportion.size(); ++j) {
        const auto& draw = (*records)[r].per_proportion[j];
        nlohmann::json line = {{"repetition", r}, {"p", config.proportions[j]}};
        for (const auto& e : draw.estimates.entries) {
          const auto& d = e.diagnostics;
          line["estimates"][std::string(estimator_name(e.kind))] = {
              {"value", e.value ? nlohmann::json(*e.value) : nlohmann::json(nullptr)},
              {"clean_treated", d.clean_treated},
              {"clean_control", d.clean_control},
              {"clusters_skipped", d.clusters_skipped},
              {"s1", d.interior_treated},
              {"s0", d.interior_control},
              {"degenerate_reason", d.degenerate_reason}};
        }
        if (draw.interaction_coefficient) line["interaction_coefficient"] = *draw.interaction_coefficient;
        line["rank_fallback"] = draw.rank_fallback;
        out << line.dump() << '\n';
      }
    }
    if (!out) throw Error("write failed: " + (dir / "repetitions.jsonl").string());
  }
}

InteriorBiasReport verify_interior_bias(const ExperimentConfig& config) {
  const Experiment experiment(config);
  return verify_interior_bias(experiment);
}

InteriorBiasReport verify_interior_bias(const Experiment& experiment) {
  const auto& config = experiment.config();
  const auto* model = dynamic_cast<const PartialLinearModel*>(&experiment.model());
  if (!model) throw Error("interior-bias check needs a partial_linear outcome model");
  const auto has = [&](EstimatorKind k) {
    return std::find(config.estimators.begin(), config.estimators.end(), k) != config.estimators.end();
  };
  if (!has(EstimatorKind::mii) || !has(EstimatorKind::amii))
    throw Error("interior-bias check needs the MII and AMII estimators");
  if (std::find(config.predictor.covariates.begin(), config.predictor.covariates.end(), config.outcome.u) ==
      config.predictor.covariates.end())
    throw Error("interior-bias check needs the predictor to include the u*z column");

  InteriorBiasReport report;
  report.alpha = model->alpha();
  report.interior_gap = interior_mean_gap(*model, experiment.partition());
  report.gate = experiment.gate();
  const auto records = simulate(experiment, config.threads);

  report.pass = true;
  for (std::size_t j = 0; j < config.proportions.size(); ++j) {
    std::vector<double> mii_values;
    std::vector<double> amii_values;
    std::vector<double> alpha_hats;
    for (const auto& rec : records) {
      const auto& draw = rec.per_proportion[j];
      const auto m = draw.estimates.value(EstimatorKind::mii);
      const auto a = draw.estimates.value(EstimatorKind::amii);
      if (!m || !a || !draw.interaction_coefficient) continue;
      mii_values.push_back(*m);
      amii_values.push_back(*a);
      alpha_hats.push_back(*draw.interaction_coefficient);
    }
    InteriorBiasRow row;
    row.p = config.proportions[j];
    row.reps_used = mii_values.size();
    if (mii_values.size() < 2) {
      report.rows.push_back(row);
      report.pass = false;
      continue;
    }
    const auto se_of = [](const std::vector<double>& xs, double mean) {
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      const auto n = static_cast<double>(xs.size());
      return std::sqrt(ss / (n - 1.0) / n);
    };
    const double mii_mean = mean_of(mii_values);
    const double amii_mean = mean_of(amii_values);
    row.mean_alpha_hat = mean_of(alpha_hats);
    row.mii_bias = mii_mean - report.gate;
    row.mii_se = se_of(mii_values, mii_mean);
    row.mii_predicted = report.alpha * report.interior_gap;
    row.amii_bias = amii_mean - report.gate;
    row.amii_se = se_of(amii_values, amii_mean);
    row.amii_predicted = (row.mean_alpha_hat - report.alpha) * (-report.interior_gap);
    row.mii_pass = std::abs(row.mii_bias - row.mii_predicted) <= 3.0 * row.mii_se + 1e-12;
    row.amii_pass = std::abs(row.amii_bias - row.amii_predicted) <= 3.0 * row.amii_se + 1e-12;
    report.pass = report.pass && row.mii_pass && row.amii_pass;
    report.rows.push_back(row);
  }
  return report;
}

EnumerationReport enumerate_expectations(const Experiment& experiment) {
  const auto& config = experiment.config();
  EnumerationReport report;
  report.gate = experiment.gate();
  report.truth = experiment.truth();
  for (double p : config.proportions) {
    const auto atoms = enumerate_assignments(experiment.partition(), p);
    std::vector<double> weighted(config.estimators.size(), 0.0);
    std::vector<double> degenerate(config.estimators.size(), 0.0);
    for (const auto& atom : atoms) {
      const auto draw = expand_assignment(experiment.partition(), atom.cluster_bits, p);
      const auto y = experiment.model().potential(draw.unit_bits);
      const auto result = experiment.evaluate(draw, y);
      for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        const auto v = result.estimates.value(config.estimators[e]);
        if (v) {
          weighted[e] += atom.probability * *v;
        } else {
          degenerate[e] += atom.probability;
        }
      }
    }
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      ExactExpectation row;
      row.estimator = config.estimators[e];
      row.p = p;
      row.degenerate_probability = degenerate[e];
      if (degenerate[e] < 1.0) row.expectation = weighted[e] / (1.0 - degenerate[e]);
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace netexp
