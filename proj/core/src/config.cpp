#include "netexp/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "netexp/error.hpp"

namespace netexp {

using nlohmann::json;

namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<GraphSourceSpec::Kind> kGraphKinds[] = {
    {GraphSourceSpec::Kind::file, "file"},
    {GraphSourceSpec::Kind::sbm, "sbm"},
    {GraphSourceSpec::Kind::degree_corrected_sbm, "degree_corrected_sbm"},
    {GraphSourceSpec::Kind::tri_ring, "tri_ring"}};
constexpr EnumName<ClusteringSpec::Kind> kClusteringKinds[] = {
    {ClusteringSpec::Kind::louvain, "louvain"},
    {ClusteringSpec::Kind::planted, "planted"},
    {ClusteringSpec::Kind::file, "file"}};
constexpr EnumName<OutcomeSpec::Kind> kOutcomeKinds[] = {
    {OutcomeSpec::Kind::linear_two_hop, "linear_two_hop"},
    {OutcomeSpec::Kind::partial_linear, "partial_linear"}};
constexpr EnumName<CovariatePreset> kPresets[] = {
    {CovariatePreset::none, "none"}, {CovariatePreset::one, "one"}, {CovariatePreset::two, "two"}};
constexpr EnumName<ExposureShape> kShapes[] = {{ExposureShape::linear, "linear"},
                                               {ExposureShape::square_root, "sqrt"},
                                               {ExposureShape::quadratic, "quadratic"}};
constexpr EnumName<Truth> kTruths[] = {{Truth::gate, "gate"},
                                       {Truth::global_treatment_mean, "global_treatment_mean"}};

template <typename Enum, std::size_t N>
const char* to_name(const EnumName<Enum> (&table)[N], Enum value) {
  for (const auto& e : table)
    if (e.value == value) return e.name;
  throw Error("unnamed enum value");
}

template <typename Enum, std::size_t N>
Enum from_name(const EnumName<Enum> (&table)[N], const std::string& name, const char* field) {
  for (const auto& e : table)
    if (name == e.name) return e.value;
  throw Error(fmt::format("config field '{}': unknown value '{}'", field, name));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw Error("repetitions must be at least 1");
  for (double p : proportions)
    if (!(p > 0.0 && p < 1.0)) throw Error("treatment proportions must lie in (0, 1)");
  if (predictor.max_hop < 1 || predictor.max_hop > 2) throw Error("predictor max_hop must be 1 or 2");
  if (predictor.ridge_lambda && *predictor.ridge_lambda < 0.0)
    throw Error("predictor ridge_lambda must be nonnegative");
  for (const auto& c : predictor.covariates)
    if (c != "degree" && c != "touch_count" && c != "constant")
      throw Error("unknown predictor covariate: " + c);
  if (outcome.kind == OutcomeSpec::Kind::partial_linear && outcome.u != "degree" &&
      outcome.u != "touch_count" && outcome.u != "constant")
    throw Error("unknown partial_linear covariate u: " + outcome.u);
  if (outcome.sigma < 0.0) throw Error("outcome sigma must be nonnegative");
  if (graph.kind == GraphSourceSpec::Kind::file && graph.path.empty())
    throw Error("graph path is required for a file graph source");
  if (clustering.kind == ClusteringSpec::Kind::louvain && !(clustering.resolution > 0.0))
    throw Error("clustering resolution must be positive");
  if (clustering.kind == ClusteringSpec::Kind::planted && graph.kind == GraphSourceSpec::Kind::file)
    throw Error("planted clustering requires a synthetic graph source");
  if (clustering.kind == ClusteringSpec::Kind::file && clustering.partition_path.empty())
    throw Error("clustering partition_path is required for a file partition");
}

json to_json(const ExperimentConfig& c) {
  json doc;
  auto& g = doc["graph"];
  g["kind"] = to_name(kGraphKinds, c.graph.kind);
  g["path"] = c.graph.path;
  g["sbm"] = {{"blocks", c.graph.sbm.blocks},
              {"block_size", c.graph.sbm.block_size},
              {"p_in", c.graph.sbm.p_in},
              {"p_out", c.graph.sbm.p_out},
              {"seed", c.graph.sbm.seed}};
  g["degree_corrected_sbm"] = {{"blocks", c.graph.dcsbm.blocks},
                               {"block_size", c.graph.dcsbm.block_size},
                               {"mean_degree", c.graph.dcsbm.mean_degree},
                               {"within_share", c.graph.dcsbm.within_share},
                               {"degree_spread", c.graph.dcsbm.degree_spread},
                               {"seed", c.graph.dcsbm.seed}};
  doc["clustering"] = {{"kind", to_name(kClusteringKinds, c.clustering.kind)},
                       {"resolution", c.clustering.resolution},
                       {"seed", c.clustering.seed},
                       {"partition_path", c.clustering.partition_path}};
  doc["proportions"] = c.proportions;
  doc["outcome"] = {{"kind", to_name(kOutcomeKinds, c.outcome.kind)},
                    {"beta", c.outcome.beta},
                    {"r1", c.outcome.r1},
                    {"r2", c.outcome.r2},
                    {"sigma", c.outcome.sigma},
                    {"covariates", to_name(kPresets, c.outcome.covariates)},
                    {"alpha", c.outcome.alpha},
                    {"u", c.outcome.u},
                    {"h_shape", to_name(kShapes, c.outcome.h_shape)},
                    {"h_level", c.outcome.h_level},
                    {"v_scale", c.outcome.v_scale}};
  doc["predictor"] = {{"max_hop", c.predictor.max_hop},
                      {"ridge_lambda", c.predictor.ridge_lambda ? json(*c.predictor.ridge_lambda) : json(nullptr)},
                      {"training_mask", c.predictor.boundary_only ? "boundary" : "full"},
                      {"covariates", c.predictor.covariates}};
  json names = json::array();
  for (auto k : c.estimators) names.push_back(std::string(estimator_name(k)));
  doc["estimators"] = names;
  doc["repetitions"] = c.repetitions;
  doc["seed"] = c.master_seed;
  doc["threads"] = c.threads;
  doc["truth"] = to_name(kTruths, c.truth);
  doc["output"] = {{"dir", c.output_dir}, {"verbose", c.verbose}};
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  try {
    if (doc.contains("graph")) {
      const auto& g = doc.at("graph");
      if (g.contains("path")) c.graph.path = g.at("path").get<std::string>();
      c.graph.kind = from_name(kGraphKinds, g.value("kind", std::string("file")), "graph.kind");
      if (g.contains("sbm")) {
        const auto& s = g.at("sbm");
        c.graph.sbm.blocks = s.value("blocks", c.graph.sbm.blocks);
        c.graph.sbm.block_size = s.value("block_size", c.graph.sbm.block_size);
        c.graph.sbm.p_in = s.value("p_in", c.graph.sbm.p_in);
        c.graph.sbm.p_out = s.value("p_out", c.graph.sbm.p_out);
        c.graph.sbm.seed = s.value("seed", c.graph.sbm.seed);
      }
      if (g.contains("degree_corrected_sbm")) {
        const auto& s = g.at("degree_corrected_sbm");
        auto& d = c.graph.dcsbm;
        d.blocks = s.value("blocks", d.blocks);
        d.block_size = s.value("block_size", d.block_size);
        d.mean_degree = s.value("mean_degree", d.mean_degree);
        d.within_share = s.value("within_share", d.within_share);
        d.degree_spread = s.value("degree_spread", d.degree_spread);
        d.seed = s.value("seed", d.seed);
      }
    }
    if (doc.contains("clustering")) {
      const auto& s = doc.at("clustering");
      c.clustering.kind = from_name(kClusteringKinds, s.value("kind", std::string("louvain")), "clustering.kind");
      c.clustering.resolution = s.value("resolution", c.clustering.resolution);
      c.clustering.seed = s.value("seed", c.clustering.seed);
      c.clustering.partition_path = s.value("partition_path", std::string());
    }
    if (doc.contains("proportions")) c.proportions = doc.at("proportions").get<std::vector<double>>();
    if (doc.contains("outcome")) {
      const auto& s = doc.at("outcome");
      auto& o = c.outcome;
      o.kind = from_name(kOutcomeKinds, s.value("kind", std::string("linear_two_hop")), "outcome.kind");
      o.beta = s.value("beta", o.beta);
      o.r1 = s.value("r1", o.r1);
      o.r2 = s.value("r2", o.r2);
      o.sigma = s.value("sigma", o.sigma);
      o.covariates = from_name(kPresets, s.value("covariates", std::string("two")), "outcome.covariates");
      o.alpha = s.value("alpha", o.alpha);
      o.u = s.value("u", o.u);
      o.h_shape = from_name(kShapes, s.value("h_shape", std::string("linear")), "outcome.h_shape");
      o.h_level = s.value("h_level", o.h_level);
      o.v_scale = s.value("v_scale", o.v_scale);
    }
    if (doc.contains("predictor")) {
      const auto& s = doc.at("predictor");
      auto& p = c.predictor;
      p.max_hop = s.value("max_hop", p.max_hop);
      if (s.contains("ridge_lambda") && !s.at("ridge_lambda").is_null())
        p.ridge_lambda = s.at("ridge_lambda").get<double>();
      const auto mask = s.value("training_mask", std::string("full"));
      if (mask != "full" && mask != "boundary")
        throw Error("config field 'predictor.training_mask': unknown value '" + mask + "'");
      p.boundary_only = mask == "boundary";
      if (s.contains("covariates")) p.covariates = s.at("covariates").get<std::vector<std::string>>();
    }
    if (doc.contains("estimators")) {
      c.estimators.clear();
      for (const auto& name : doc.at("estimators")) c.estimators.push_back(parse_estimator(name.get<std::string>()));
    }
    c.repetitions = doc.value("repetitions", c.repetitions);
    c.master_seed = doc.value("seed", c.master_seed);
    c.threads = doc.value("threads", c.threads);
    c.truth = from_name(kTruths, doc.value("truth", std::string("global_treatment_mean")), "truth");
    if (doc.contains("output")) {
      c.output_dir = doc.at("output").value("dir", c.output_dir);
      c.verbose = doc.at("output").value("verbose", c.verbose);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("config file is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(doc);
}

std::string config_hash(const ExperimentConfig& config) {
  // Thread count and output location do not affect results.
  auto doc = to_json(config);
  doc.erase("threads");
  doc.erase("output");
  const auto text = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace netexp
