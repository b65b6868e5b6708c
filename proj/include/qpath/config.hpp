#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "encoding.hpp"
#include "errors.hpp"
#include "field.hpp"
#include "pathways.hpp"
#include "propagator.hpp"
#include "rcga.hpp"
#include "system.hpp"

namespace qpath {

using json = nlohmann::json;

struct FieldConfig {
  /// "eps1".."eps8", or empty for explicit modes.
  std::string preset;
  /// Amplitude applied to every preset mode.
  double preset_amplitude = 0.1;
  ControlField field;

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

struct UncertaintyConfig {
  PathwayKind kind = PathwayKind::amplitude;
  /// Per-parameter sigmas; empty means use `sweep` uniformly.
  std::vector<double> sigmas;
  /// Uniform sigma values, one analysis per entry.
  std::vector<double> sweep{0.06, 0.12, 0.18, 0.24, 0.30};
  /// sigma_k = value * |nominal_k| when true.
  bool relative = true;

  friend bool operator==(const UncertaintyConfig&, const UncertaintyConfig&) = default;
};

struct AnalysisConfig {
  int max_order = 21;
  std::int64_t base_frequency = 1;
  /// 0: next power of two above M gamma_K.
  std::int64_t grid_size = 0;
  /// One-based level indices.
  int initial = 1;
  int target = 4;
  double confidence = 0.95;
  double residual_threshold = 1e-3;
  PropagationSettings propagation{};

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct MonteCarloConfig {
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  /// 0: use the analysis step count.
  int steps = 0;
  bool dump_samples = false;

  friend bool operator==(const MonteCarloConfig&, const MonteCarloConfig&) = default;
};

struct WorstCaseConfig {
  /// Absolute sigma of every independent dipole element when no covariance is given.
  double sigma = 0.05;
  /// Optional full covariance over all pairs p < q.
  std::vector<std::vector<double>> covariance;

  friend bool operator==(const WorstCaseConfig&, const WorstCaseConfig&) = default;
};

struct OptimizerConfig {
  GAConfig ga;
  /// Fixed amplitude of every mode; 0 means take the configured field's amplitudes.
  double amplitude = 0.0;
  int steps = 100;
  /// Independent runs (seeds ga.seed, ga.seed + 1, ...).
  int restarts = 1;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct ReportConfig {
  /// Amplitude strengths of the mode-sweep figure.
  std::vector<double> amplitudes{0.05, 0.075, 0.1, 0.125, 0.15};
  /// Relative amplitude sigma used to score robustness in the sweep.
  double robust_sigma = 0.2;
  /// Sigma grid of the sigma-resolved figures.
  std::vector<double> sigma_grid{0.0, 0.06, 0.12, 0.18, 0.24, 0.30};
  /// mode-sweep figure: sigma of mode `swept_mode` (one-based) runs over
  /// sigma_grid while the others stay at fixed_sigma.
  int swept_mode = 2;
  double fixed_sigma = 0.3;
  /// Monte Carlo samples behind the noisy trajectory figure.
  std::size_t trajectory_samples = 200;

  friend bool operator==(const ReportConfig&, const ReportConfig&) = default;
};

struct ExperimentConfig {
  QuantumSystem system = four_level_system();
  FieldConfig field;
  UncertaintyConfig uncertainty;
  AnalysisConfig analysis;
  MonteCarloConfig mc;
  WorstCaseConfig worstcase;
  OptimizerConfig optimizer;
  ReportConfig report;

  int initial_index() const { return analysis.initial - 1; }
  int target_index() const { return analysis.target - 1; }

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    const bool same_shape = a.system.energies.size() == b.system.energies.size() &&
                            a.system.dipole.rows() == b.system.dipole.rows() &&
                            a.system.dipole.cols() == b.system.dipole.cols();
    return same_shape && a.system.energies == b.system.energies && a.system.dipole == b.system.dipole &&
           a.field == b.field &&
           a.uncertainty == b.uncertainty && a.analysis == b.analysis && a.mc == b.mc &&
           a.worstcase == b.worstcase && a.optimizer == b.optimizer && a.report == b.report;
  }
};

namespace detail {

/// Typed, path-aware accessors over one JSON object that reject unknown keys.
class ObjectReader {
public:
  ObjectReader(const json& node, std::string path, std::initializer_list<const char*> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object())
      throw ConfigError(path_, "expected an object");
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (const char* name : allowed)
        known = known || key == name;
      if (!known)
        throw ConfigError(join(key), "unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  const json& at(const char* key) const { return node_.at(key); }

  std::string join(const std::string& key) const { return path_ + "/" + key; }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!has(key))
      return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(join(key), std::string("wrong type: ") + e.what());
    }
  }

  double number(const char* key, double fallback) const {
    if (!has(key))
      return fallback;
    if (!node_.at(key).is_number())
      throw ConfigError(join(key), "expected a number");
    return node_.at(key).get<double>();
  }

private:
  const json& node_;
  std::string path_;
};

inline std::vector<double> number_list(const json& node, const std::string& path) {
  if (node.is_number())
    return {node.get<double>()};
  if (!node.is_array())
    throw ConfigError(path, "expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& value : node) {
    if (!value.is_number())
      throw ConfigError(path, "expected an array of numbers");
    out.push_back(value.get<double>());
  }
  return out;
}

inline std::string preset_name(int index) { return "eps" + std::to_string(index); }

inline int preset_index(const std::string& name, const std::string& path) {
  for (int k = 1; k <= table2_field_count; ++k)
    if (name == preset_name(k))
      return k;
  throw ConfigError(path, "unknown field preset '" + name + "' (expected eps1..eps8)");
}

inline Carrier parse_carrier(const std::string& name, const std::string& path) {
  if (name == "cosine")
    return Carrier::cosine;
  if (name == "sine")
    return Carrier::sine;
  throw ConfigError(path, "carrier must be 'cosine' or 'sine'");
}

inline StepMethod parse_method(const std::string& name, const std::string& path) {
  if (name == "midpoint")
    return StepMethod::midpoint;
  if (name == "magnus4")
    return StepMethod::magnus4;
  throw ConfigError(path, "method must be 'midpoint' or 'magnus4'");
}

inline PathwayKind parse_kind(const std::string& name, const std::string& path) {
  if (name == "amplitude")
    return PathwayKind::amplitude;
  if (name == "dipole")
    return PathwayKind::dipole;
  throw ConfigError(path, "kind must be 'amplitude' or 'dipole'");
}

inline void parse_system(const json& node, QuantumSystem& system) {
  const ObjectReader r(node, "/system", {"energies", "dipole"});
  if (r.has("energies")) {
    const auto e = number_list(r.at("energies"), "/system/energies");
    system.energies = Eigen::Map<const RealVector>(e.data(), static_cast<Eigen::Index>(e.size()));
  }
  if (r.has("dipole")) {
    const auto& rows = r.at("dipole");
    if (!rows.is_array())
      throw ConfigError("/system/dipole", "expected an array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    system.dipole = RealMatrix::Zero(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto row = number_list(rows[static_cast<std::size_t>(p)], "/system/dipole/" + std::to_string(p));
      if (static_cast<Eigen::Index>(row.size()) != n)
        throw ConfigError("/system/dipole/" + std::to_string(p), "dipole matrix must be square");
      for (Eigen::Index q = 0; q < n; ++q)
        system.dipole(p, q) = row[static_cast<std::size_t>(q)];
    }
  }
  try {
    system.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/system", e.what());
  }
}

inline void parse_field(const json& node, FieldConfig& out) {
  if (node.is_string()) {
    out.preset = node.get<std::string>();
    out.field = table2_field(preset_index(out.preset, "/field"), out.preset_amplitude);
    return;
  }
  const ObjectReader r(node, "/field", {"preset", "amplitude", "modes", "duration", "carrier"});
  if (r.has("preset") && r.has("modes"))
    throw ConfigError("/field", "give either a preset or explicit modes, not both");
  if (r.has("preset")) {
    r.read("preset", out.preset);
    out.preset_amplitude = r.number("amplitude", out.preset_amplitude);
    if (r.has("duration") || r.has("carrier"))
      throw ConfigError("/field", "presets fix duration and carrier");
    out.field = table2_field(preset_index(out.preset, "/field/preset"), out.preset_amplitude);
    return;
  }
  if (r.has("amplitude"))
    throw ConfigError("/field/amplitude", "only valid together with a preset");
  out.preset.clear();
  if (!r.has("modes"))
    throw ConfigError("/field/modes", "missing (give modes or a preset)");
  ControlField field;
  field.duration = r.number("duration", 10.0);
  if (r.has("carrier")) {
    std::string carrier;
    r.read("carrier", carrier);
    field.carrier = parse_carrier(carrier, "/field/carrier");
  }
  const auto& modes = r.at("modes");
  if (!modes.is_array())
    throw ConfigError("/field/modes", "expected an array");
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const std::string path = "/field/modes/" + std::to_string(k);
    const ObjectReader m(modes[k], path, {"omega", "amplitude", "phase"});
    if (!m.has("omega") || !m.has("amplitude"))
      throw ConfigError(path, "mode needs omega and amplitude");
    field.modes.push_back({m.number("omega", 0.0), m.number("amplitude", 0.0), m.number("phase", 0.0)});
  }
  try {
    field.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/field", e.what());
  }
  out.field = std::move(field);
}

inline void parse_uncertainty(const json& node, UncertaintyConfig& out) {
  const ObjectReader r(node, "/uncertainty", {"kind", "sigma", "sweep", "relative"});
  if (r.has("kind")) {
    std::string kind;
    r.read("kind", kind);
    out.kind = parse_kind(kind, "/uncertainty/kind");
    if (out.kind == PathwayKind::dipole)
      out.relative = false;
  }
  if (r.has("sigma"))
    out.sigmas = number_list(r.at("sigma"), "/uncertainty/sigma");
  if (r.has("sweep"))
    out.sweep = number_list(r.at("sweep"), "/uncertainty/sweep");
  r.read("relative", out.relative);
  for (double s : out.sigmas)
    if (!(s >= 0.0))
      throw ConfigError("/uncertainty/sigma", "sigmas must be >= 0");
  for (double s : out.sweep)
    if (!(s >= 0.0))
      throw ConfigError("/uncertainty/sweep", "sigmas must be >= 0");
  if (out.sigmas.empty() && out.sweep.empty())
    throw ConfigError("/uncertainty", "needs sigma or sweep");
}

inline void parse_analysis(const json& node, AnalysisConfig& out) {
  const ObjectReader r(node, "/analysis", {"max_order", "base_frequency", "grid_size", "initial", "target",
                                           "confidence", "residual_threshold", "steps", "method"});
  r.read("max_order", out.max_order);
  r.read("base_frequency", out.base_frequency);
  r.read("grid_size", out.grid_size);
  r.read("initial", out.initial);
  r.read("target", out.target);
  out.confidence = r.number("confidence", out.confidence);
  out.residual_threshold = r.number("residual_threshold", out.residual_threshold);
  r.read("steps", out.propagation.steps);
  if (r.has("method")) {
    std::string method;
    r.read("method", method);
    out.propagation.method = parse_method(method, "/analysis/method");
  }
  if (out.max_order < 1)
    throw ConfigError("/analysis/max_order", "must be >= 1");
  if (out.base_frequency < 1)
    throw ConfigError("/analysis/base_frequency", "must be >= 1");
  if (out.grid_size < 0)
    throw ConfigError("/analysis/grid_size", "must be >= 0");
  if (!(out.confidence > 0.0 && out.confidence < 1.0))
    throw ConfigError("/analysis/confidence", "must lie in (0, 1)");
  if (!(out.residual_threshold > 0.0))
    throw ConfigError("/analysis/residual_threshold", "must be positive");
  if (out.propagation.steps < 1)
    throw ConfigError("/analysis/steps", "must be >= 1");
}

inline void parse_mc(const json& node, MonteCarloConfig& out) {
  const ObjectReader r(node, "/mc", {"samples", "seed", "steps", "dump_samples"});
  r.read("samples", out.samples);
  r.read("seed", out.seed);
  r.read("steps", out.steps);
  r.read("dump_samples", out.dump_samples);
  if (out.samples < 2)
    throw ConfigError("/mc/samples", "must be >= 2");
  if (out.steps < 0)
    throw ConfigError("/mc/steps", "must be >= 0");
}

inline void parse_worstcase(const json& node, WorstCaseConfig& out) {
  const ObjectReader r(node, "/worstcase", {"sigma", "covariance"});
  out.sigma = r.number("sigma", out.sigma);
  if (out.sigma < 0.0)
    throw ConfigError("/worstcase/sigma", "must be >= 0");
  if (r.has("covariance")) {
    const auto& rows = r.at("covariance");
    if (!rows.is_array())
      throw ConfigError("/worstcase/covariance", "expected an array of rows");
    out.covariance.clear();
    for (std::size_t p = 0; p < rows.size(); ++p)
      out.covariance.push_back(number_list(rows[p], "/worstcase/covariance/" + std::to_string(p)));
  }
}

inline void parse_bounds(const json& node, std::vector<GeneBounds>& out) {
  if (!node.is_array())
    throw ConfigError("/optimizer/bounds", "expected an array of [lower, upper] pairs");
  out.clear();
  for (std::size_t g = 0; g < node.size(); ++g) {
    const auto pair = number_list(node[g], "/optimizer/bounds/" + std::to_string(g));
    if (pair.size() != 2 || !(pair[0] < pair[1]))
      throw ConfigError("/optimizer/bounds/" + std::to_string(g), "expected [lower, upper] with lower < upper");
    out.push_back({pair[0], pair[1], false});
  }
}

inline void parse_optimizer(const json& node, OptimizerConfig& out) {
  const ObjectReader r(node, "/optimizer",
                       {"population_size", "reproductive_size", "crossover_probability", "distribution_index",
                        "mutation_probability", "mutation_scale_fraction", "mutation_scales", "tournament_size",
                        "generations", "bounds", "elitism", "seed", "amplitude", "steps", "restarts"});
  auto& ga = out.ga;
  r.read("population_size", ga.population_size);
  r.read("reproductive_size", ga.reproductive_size);
  ga.crossover_probability = r.number("crossover_probability", ga.crossover_probability);
  ga.distribution_index = r.number("distribution_index", ga.distribution_index);
  ga.mutation_probability = r.number("mutation_probability", ga.mutation_probability);
  ga.mutation_scale_fraction = r.number("mutation_scale_fraction", ga.mutation_scale_fraction);
  if (r.has("mutation_scales"))
    ga.mutation_scales = number_list(r.at("mutation_scales"), "/optimizer/mutation_scales");
  r.read("tournament_size", ga.tournament_size);
  r.read("generations", ga.generations);
  if (r.has("bounds"))
    parse_bounds(r.at("bounds"), ga.bounds);
  r.read("elitism", ga.elitism);
  r.read("seed", ga.seed);
  out.amplitude = r.number("amplitude", out.amplitude);
  r.read("steps", out.steps);
  r.read("restarts", out.restarts);
  try {
    ga.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/optimizer", e.what());
  }
  if (out.amplitude < 0.0)
    throw ConfigError("/optimizer/amplitude", "must be >= 0");
  if (out.steps < 1)
    throw ConfigError("/optimizer/steps", "must be >= 1");
  if (out.restarts < 1)
    throw ConfigError("/optimizer/restarts", "must be >= 1");
}

inline void parse_report(const json& node, ReportConfig& out) {
  const ObjectReader r(node, "/report", {"amplitudes", "robust_sigma", "sigma_grid", "swept_mode", "fixed_sigma", "trajectory_samples"});
  if (r.has("amplitudes"))
    out.amplitudes = number_list(r.at("amplitudes"), "/report/amplitudes");
  out.robust_sigma = r.number("robust_sigma", out.robust_sigma);
  if (r.has("sigma_grid"))
    out.sigma_grid = number_list(r.at("sigma_grid"), "/report/sigma_grid");
  r.read("swept_mode", out.swept_mode);
  if (out.swept_mode < 1)
    throw ConfigError("/report/swept_mode", "must be >= 1");
  out.fixed_sigma = r.number("fixed_sigma", out.fixed_sigma);
  r.read("trajectory_samples", out.trajectory_samples);
  if (out.robust_sigma < 0.0 || out.fixed_sigma < 0.0)
    throw ConfigError("/report", "sigmas must be >= 0");
  for (double s : out.sigma_grid)
    if (!(s >= 0.0))
      throw ConfigError("/report/sigma_grid", "sigmas must be >= 0");
  for (double a : out.amplitudes)
    if (!(a > 0.0))
      throw ConfigError("/report/amplitudes", "amplitudes must be positive");
  if (out.trajectory_samples < 2)
    throw ConfigError("/report/trajectory_samples", "must be >= 2");
}

/// Cross-block consistency.
inline void check_references(const ExperimentConfig& config) {
  const int n = config.system.dimension();
  if (config.analysis.initial < 1 || config.analysis.initial > n)
    throw ConfigError("/analysis/initial", "must lie in 1.." + std::to_string(n));
  if (config.analysis.target < 1 || config.analysis.target > n)
    throw ConfigError("/analysis/target", "must lie in 1.." + std::to_string(n));
  const std::size_t parameters = config.uncertainty.kind == PathwayKind::amplitude
                                     ? config.field.field.size()
                                     : nonzero_dipole_pairs(config.system).size();
  if (!config.uncertainty.sigmas.empty() && config.uncertainty.sigmas.size() != 1 &&
      config.uncertainty.sigmas.size() != parameters)
    throw ConfigError("/uncertainty/sigma", "needs 1 or " + std::to_string(parameters) + " entries");
  const std::size_t pairs = all_dipole_pairs(n).size();
  if (!config.worstcase.covariance.empty()) {
    if (config.worstcase.covariance.size() != pairs)
      throw ConfigError("/worstcase/covariance", "must be " + std::to_string(pairs) + "x" + std::to_string(pairs));
    for (const auto& row : config.worstcase.covariance)
      if (row.size() != pairs)
        throw ConfigError("/worstcase/covariance", "must be square");
  }
  if (!config.optimizer.ga.bounds.empty() && config.optimizer.ga.bounds.size() != 2 * config.field.field.size())
    throw ConfigError("/optimizer/bounds", "needs 2K = " + std::to_string(2 * config.field.field.size()) + " entries");
  try {
    assign_encoding_frequencies(static_cast<int>(parameters), config.analysis.max_order,
                                config.analysis.base_frequency, config.uncertainty.kind);
  } catch (const InvalidArgument& e) {
    throw ConfigError("/analysis/max_order", e.what());
  }
}

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

} // namespace detail

inline ExperimentConfig config_from_json(const json& root) {
  const detail::ObjectReader r(root, "",
                               {"system", "field", "uncertainty", "analysis", "mc", "worstcase", "optimizer", "report"});
  ExperimentConfig config;
  if (r.has("system"))
    detail::parse_system(r.at("system"), config.system);
  if (!r.has("field"))
    throw ConfigError("/field", "missing (give a preset such as \"eps1\" or explicit modes)");
  detail::parse_field(r.at("field"), config.field);
  if (r.has("uncertainty"))
    detail::parse_uncertainty(r.at("uncertainty"), config.uncertainty);
  if (r.has("analysis"))
    detail::parse_analysis(r.at("analysis"), config.analysis);
  if (r.has("mc"))
    detail::parse_mc(r.at("mc"), config.mc);
  if (r.has("worstcase"))
    detail::parse_worstcase(r.at("worstcase"), config.worstcase);
  if (r.has("optimizer"))
    detail::parse_optimizer(r.at("optimizer"), config.optimizer);
  if (r.has("report"))
    detail::parse_report(r.at("report"), config.report);
  detail::check_references(config);
  return config;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "JSON parse error at " + detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                              e.what());
  }
  return config_from_json(root);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

inline json config_to_json(const ExperimentConfig& config) {
  json root;
  json dipole = json::array();
  for (Eigen::Index p = 0; p < config.system.dipole.rows(); ++p) {
    json row = json::array();
    for (Eigen::Index q = 0; q < config.system.dipole.cols(); ++q)
      row.push_back(config.system.dipole(p, q));
    dipole.push_back(row);
  }
  root["system"] = {{"energies", std::vector<double>(config.system.energies.begin(), config.system.energies.end())},
                    {"dipole", dipole}};
  if (!config.field.preset.empty()) {
    root["field"] = {{"preset", config.field.preset}, {"amplitude", config.field.preset_amplitude}};
  } else {
    json modes = json::array();
    for (const auto& m : config.field.field.modes)
      modes.push_back({{"omega", m.omega}, {"amplitude", m.amplitude}, {"phase", m.phase}});
    root["field"] = {{"modes", modes},
                     {"duration", config.field.field.duration},
                     {"carrier", to_string(config.field.field.carrier)}};
  }
  const auto& u = config.uncertainty;
  root["uncertainty"] = {{"kind", to_string(u.kind)}, {"sweep", u.sweep}, {"relative", u.relative}};
  if (!u.sigmas.empty())
    root["uncertainty"]["sigma"] = u.sigmas;
  const auto& a = config.analysis;
  root["analysis"] = {{"max_order", a.max_order},
                      {"base_frequency", a.base_frequency},
                      {"grid_size", a.grid_size},
                      {"initial", a.initial},
                      {"target", a.target},
                      {"confidence", a.confidence},
                      {"residual_threshold", a.residual_threshold},
                      {"steps", a.propagation.steps},
                      {"method", to_string(a.propagation.method)}};
  root["mc"] = {{"samples", config.mc.samples},
                {"seed", config.mc.seed},
                {"steps", config.mc.steps},
                {"dump_samples", config.mc.dump_samples}};
  root["worstcase"] = {{"sigma", config.worstcase.sigma}};
  if (!config.worstcase.covariance.empty())
    root["worstcase"]["covariance"] = config.worstcase.covariance;
  const auto& ga = config.optimizer.ga;
  json opt = {{"population_size", ga.population_size},
              {"reproductive_size", ga.reproductive_size},
              {"crossover_probability", ga.crossover_probability},
              {"distribution_index", ga.distribution_index},
              {"mutation_probability", ga.mutation_probability},
              {"mutation_scale_fraction", ga.mutation_scale_fraction},
              {"tournament_size", ga.tournament_size},
              {"generations", ga.generations},
              {"elitism", ga.elitism},
              {"seed", ga.seed},
              {"amplitude", config.optimizer.amplitude},
              {"steps", config.optimizer.steps},
              {"restarts", config.optimizer.restarts}};
  if (!ga.mutation_scales.empty())
    opt["mutation_scales"] = ga.mutation_scales;
  if (!ga.bounds.empty()) {
    json bounds = json::array();
    for (const auto& b : ga.bounds)
      bounds.push_back({b.lower, b.upper});
    opt["bounds"] = bounds;
  }
  root["optimizer"] = opt;
  root["report"] = {{"amplitudes", config.report.amplitudes},
                    {"robust_sigma", config.report.robust_sigma},
                    {"sigma_grid", config.report.sigma_grid},
                    {"swept_mode", config.report.swept_mode},
                    {"fixed_sigma", config.report.fixed_sigma},
                    {"trajectory_samples", config.report.trajectory_samples}};
  return root;
}

/// 64-bit FNV-1a of the canonical (sorted-key, compact) config JSON.
inline std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

} // namespace qpath
