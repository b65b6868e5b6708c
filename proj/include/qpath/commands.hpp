#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "figures.hpp"
#include "moments.hpp"
#include "monte_carlo.hpp"
#include "pathways.hpp"
#include "propagator.hpp"
#include "rcga.hpp"
#include "serialization.hpp"
#include "worst_case.hpp"

namespace qpath {

/// Malformed command line or unknown command/figure name (exit code 2).
class UsageError : public Error {
public:
  using Error::Error;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "pathways", "moments", "worstcase",
                                              "sample",   "optimize", "report"};
  return names;
}

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"moments-ratio",   "orders",     "interference",  "interference-matrix",
                                              "mode-sweep",      "trajectory", "amplitude-sweep"};
  return names;
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::string figure = "interference";
};

/// Artifacts written by one command, keyed by file name.
struct RunResult {
  std::vector<std::filesystem::path> files;
  json summary;
};

namespace detail {

class ArtifactSink {
public:
  ArtifactSink(std::filesystem::path dir, ArtifactMeta meta) : dir_(std::move(dir)), meta_(std::move(meta)) {
    std::filesystem::create_directories(dir_);
  }

  const ArtifactMeta& meta() const { return meta_; }

  void write_json(const std::string& name, json body, RunResult& result) {
    body["meta"] = meta_.to_json();
    write(name, body.dump(2) + "\n", result);
  }

  template <typename Writer>
  void write_csv(const std::string& name, Writer&& writer, RunResult& result) {
    std::ostringstream text;
    writer(text, meta_);
    write(name, text.str(), result);
  }

private:
  void write(const std::string& name, const std::string& text, RunResult& result) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw Error("cannot write " + path.string());
    out << text;
    result.files.push_back(path);
  }

  std::filesystem::path dir_;
  ArtifactMeta meta_;
};

inline PropagationSettings mc_settings(const ExperimentConfig& config) {
  PropagationSettings settings = config.analysis.propagation;
  if (config.mc.steps > 0)
    settings.steps = config.mc.steps;
  return settings;
}

inline PathwayTable build_table(const ExperimentConfig& config, PathwayKind kind) {
  DecodeOptions options;
  options.residual_threshold = config.analysis.residual_threshold;
  return extract_pathways(kind, config.system, config.field.field, config.analysis.max_order,
                          config.analysis.propagation, config.initial_index(), config.target_index(),
                          config.analysis.base_frequency, config.analysis.grid_size, options);
}

struct LabeledModel {
  /// Uniform sigma of a sweep entry, or NaN for an explicit per-parameter list.
  double sigma = 0.0;
  UncertaintyModel model;
};

/// Explicit per-parameter sigmas give one model; otherwise one per sweep value.
inline std::vector<LabeledModel> uncertainty_models(const ExperimentConfig& config) {
  const auto& u = config.uncertainty;
  UncertaintyModel base = u.kind == PathwayKind::amplitude ? amplitude_uncertainty(config.field.field, 0.0, false)
                                                           : dipole_uncertainty(config.system, 0.0, false);
  auto scaled = [&](const std::vector<double>& values) {
    UncertaintyModel model = base;
    for (std::size_t k = 0; k < model.means.size(); ++k) {
      const double v = values.size() == 1 ? values[0] : values[k];
      model.sigmas[k] = u.relative ? v * std::abs(model.means[k]) : v;
    }
    return model;
  };
  std::vector<LabeledModel> out;
  if (!u.sigmas.empty()) {
    out.push_back({u.sigmas.size() == 1 ? u.sigmas[0] : std::nan(""), scaled(u.sigmas)});
    return out;
  }
  for (double sigma : u.sweep)
    out.push_back({sigma, scaled({sigma})});
  return out;
}

inline json sigma_json(double sigma) { return std::isnan(sigma) ? json(nullptr) : json(sigma); }

inline FieldObjective field_objective(const ExperimentConfig& config) {
  FieldObjective objective;
  objective.system = config.system;
  for (const auto& mode : config.field.field.modes)
    objective.amplitudes.push_back(config.optimizer.amplitude > 0.0 ? config.optimizer.amplitude : mode.amplitude);
  objective.duration = config.field.field.duration;
  objective.carrier = config.field.field.carrier;
  objective.initial = config.initial_index();
  objective.target = config.target_index();
  objective.settings = {config.optimizer.steps, StepMethod::magnus4};
  return objective;
}

inline ParameterCovariance worstcase_covariance(const ExperimentConfig& config) {
  const auto pairs = all_dipole_pairs(config.system.dimension());
  if (config.worstcase.covariance.empty())
    return ParameterCovariance::diagonal(std::vector<double>(pairs.size(), config.worstcase.sigma));
  const auto n = static_cast<Eigen::Index>(pairs.size());
  ParameterCovariance out{RealMatrix(n, n)};
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      out.matrix(r, c) = config.worstcase.covariance[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  try {
    out.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/worstcase/covariance", e.what());
  }
  return out;
}

// Commands --------------------------------------------------------------------

inline void run_simulate(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  const auto& settings = config.analysis.propagation;
  const ComplexMatrix u = propagate(config.system, config.field.field, settings);
  const ComplexMatrix ui = to_interaction_picture(config.system.energies, u, config.field.field.duration);
  auto matrix_json = [](const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        row.push_back(complex_json(m(r, c)));
      rows.push_back(row);
    }
    return rows;
  };
  const int i = config.initial_index();
  const int j = config.target_index();
  json body = {{"initial", config.analysis.initial},
               {"target", config.analysis.target},
               {"steps", settings.steps},
               {"method", to_string(settings.method)},
               {"U", matrix_json(u)},
               {"U_interaction", matrix_json(ui)},
               {"amplitude", complex_json(ui(j, i))},
               {"probability", transition_probability(u, i, j)},
               {"unitarity_error", unitarity_error(u)},
               {"step_doubling_change", step_doubling_change(config.system, config.field.field, settings)}};
  result.summary = {{"probability", body["probability"]}};
  sink.write_json("simulate.json", body, result);
}

inline void run_pathways(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  const auto table = build_table(config, config.uncertainty.kind);
  json body = to_json(table);
  json sums = json::array();
  for (int m = 0; m <= table.max_order(); ++m)
    sums.push_back({{"order", m}, {"sum", complex_json(pathway_order_sum(table, m))}});
  body["order_sums"] = sums;
  sink.write_json("pathways.json", body, result);
  sink.write_csv("pathways.csv", [&](std::ostream& out, const ArtifactMeta& meta) { write_pathway_csv(out, table, meta); },
                 result);
  result.summary = {{"entries", table.entries.size()}, {"residual_norm", table.residual_norm()}};
}

inline void run_moments(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  const auto table = build_table(config, config.uncertainty.kind);
  MomentOptions options;
  options.confidence = config.analysis.confidence;
  json reports = json::array();
  std::vector<std::pair<double, MomentReport>> rows;
  for (const auto& [sigma, model] : uncertainty_models(config)) {
    auto report = analyze_moments(table, model, options);
    json entry = to_json(report);
    entry["sigma"] = sigma_json(sigma);
    entry["relative"] = config.uncertainty.relative;
    reports.push_back(entry);
    rows.emplace_back(sigma, std::move(report));
  }
  sink.write_json("moments.json",
                  {{"pathways", {{"entries", table.entries.size()}, {"residual_norm", table.residual_norm()}}},
                   {"reports", reports}},
                  result);
  sink.write_csv(
      "moments.csv",
      [&](std::ostream& out, const ArtifactMeta& meta) {
        CsvWriter csv(out, meta,
                      {"sigma", "expected_probability", "variance_re", "variance_im", "expected_re", "expected_im",
                       "total_interference", "worst_case", "warnings"});
        for (const auto& [sigma, r] : rows) {
          csv.cell(std::isnan(sigma) ? std::string("custom") : format_number(sigma))
              .cell(r.expected_probability)
              .cell(r.variance.real)
              .cell(r.variance.imag)
              .cell(r.expected_amplitude.real())
              .cell(r.expected_amplitude.imag())
              .cell(r.interference.total_cross())
              .cell(r.worst_case)
              .cell(r.warnings.size());
          csv.end_row();
        }
      },
      result);
  for (std::size_t k = 0; k < rows.size(); ++k)
    sink.write_csv(
        "interference_" + std::to_string(k) + ".csv",
        [&](std::ostream& out, const ArtifactMeta& meta) { write_interference_csv(out, rows[k].second.interference, meta); },
        result);
  result.summary = reports;
}

inline void run_worstcase(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  const auto report = analyze_worst_case(config.system, config.field.field, config.initial_index(),
                                         config.target_index(), worstcase_covariance(config),
                                         config.analysis.confidence, config.analysis.propagation);
  const json body = to_json(report);
  sink.write_json("worstcase.json", body, result);
  result.summary = {{"J", report.value}, {"delta_J_wc", report.deviation.magnitude}};
}

inline void run_sample(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  json stats = json::array();
  std::vector<std::pair<double, SampleStatistics>> rows;
  const auto settings = mc_settings(config);
  for (const auto& [sigma, model] : uncertainty_models(config)) {
    auto s = estimate_statistics(config.system, config.field.field, model, config.initial_index(),
                                 config.target_index(), config.mc.samples, config.mc.seed, settings,
                                 {config.mc.dump_samples});
    json entry = to_json(s);
    entry["sigma"] = sigma_json(sigma);
    entry["steps"] = settings.steps;
    stats.push_back(entry);
    rows.emplace_back(sigma, std::move(s));
  }
  sink.write_json("sample.json", {{"statistics", stats}}, result);
  sink.write_csv(
      "sample.csv",
      [&](std::ostream& out, const ArtifactMeta& meta) {
        CsvWriter csv(out, meta,
                      {"sigma", "count", "mean_probability", "se_probability", "variance_re", "se_variance_re",
                       "variance_im", "se_variance_im"});
        for (const auto& [sigma, s] : rows) {
          csv.cell(std::isnan(sigma) ? std::string("custom") : format_number(sigma))
              .cell(s.count)
              .cell(s.probability.mean)
              .cell(s.probability.mean_error)
              .cell(s.amplitude_real.variance)
              .cell(s.amplitude_real.variance_error)
              .cell(s.amplitude_imag.variance)
              .cell(s.amplitude_imag.variance_error);
          csv.end_row();
        }
      },
      result);
  if (config.mc.dump_samples) {
    std::vector<std::string> labels;
    if (config.uncertainty.kind == PathwayKind::amplitude)
      for (std::size_t k = 0; k < config.field.field.size(); ++k)
        labels.push_back("A" + std::to_string(k + 1));
    else
      for (const auto& pair : nonzero_dipole_pairs(config.system))
        labels.push_back(pair.label());
    for (std::size_t k = 0; k < rows.size(); ++k)
      sink.write_csv(
          "samples_" + std::to_string(k) + ".csv",
          [&](std::ostream& out, const ArtifactMeta& meta) { write_samples_csv(out, rows[k].second, labels, meta); },
          result);
  }
  result.summary = stats;
}

inline void run_optimize(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  const auto objective = field_objective(config);
  json runs = json::array();
  std::vector<std::vector<GenerationRecord>> histories;
  OptimizationResult best;
  for (int r = 0; r < config.optimizer.restarts; ++r) {
    GAConfig ga = config.optimizer.ga;
    ga.seed += static_cast<std::uint64_t>(r);
    auto run = optimize(objective, ga);
    json entry = to_json(run);
    entry["seed"] = ga.seed;
    runs.push_back(entry);
    histories.push_back(run.history);
    if (r == 0 || run.best.fitness > best.best.fitness)
      best = std::move(run);
  }
  sink.write_json("optimize.json", {{"best", to_json(best)}, {"runs", runs}}, result);
  sink.write_csv("history.csv", [&](std::ostream& out, const ArtifactMeta& meta) { write_history_csv(out, histories, meta); },
                 result);
  result.summary = {{"best_fitness", best.best.fitness}};
}

// Report figures --------------------------------------------------------------

inline void figure_sigma_tables(const ExperimentConfig& config, const std::string& figure, ArtifactSink& sink,
                                RunResult& result) {
  const auto table = build_table(config, PathwayKind::amplitude);
  const auto series = sigma_series(table, config.report.sigma_grid, config.uncertainty.relative);
  std::vector<complex> nominal;
  for (int m = 0; m <= table.max_order(); ++m)
    nominal.push_back(pathway_order_sum(table, m));
  sink.write_csv(
      "figure_" + figure + ".csv",
      [&](std::ostream& out, const ArtifactMeta& meta) {
        if (figure == "moments-ratio") {
          CsvWriter csv(out, meta, {"sigma", "order", "nominal_abs", "expected_abs", "ratio"});
          for (const auto& point : series)
            for (int m = 1; m <= table.max_order(); ++m) {
              const double a = std::abs(nominal[static_cast<std::size_t>(m)]);
              if (a < 1e-12)
                continue;
              const double e = std::abs(point.report.order_expectations[static_cast<std::size_t>(m)]);
              csv.cell(point.sigma).cell(m).cell(a).cell(e).cell(e / a);
              csv.end_row();
            }
        } else if (figure == "orders") {
          CsvWriter csv(out, meta, {"sigma", "order", "re", "im", "abs"});
          for (const auto& point : series)
            for (int m = 0; m <= table.max_order(); ++m) {
              const complex z = point.report.order_expectations[static_cast<std::size_t>(m)];
              csv.cell(point.sigma).cell(m).cell(z.real()).cell(z.imag()).cell(std::abs(z));
              csv.end_row();
            }
        } else if (figure == "interference") {
          CsvWriter csv(out, meta, {"sigma", "expected_probability", "same_order_total", "cross_total"});
          for (const auto& point : series) {
            const auto& im = point.report.interference;
            csv.cell(point.sigma).cell(point.report.expected_probability).cell(im.total_same_order()).cell(im.total_cross());
            csv.end_row();
          }
        } else {
          CsvWriter csv(out, meta, {"sigma", "m_prime", "m", "value"});
          for (const auto& point : series) {
            const auto& im = point.report.interference;
            for (Eigen::Index r = 0; r < im.cross.rows(); ++r)
              for (Eigen::Index c = r; c < im.cross.cols(); ++c) {
                const double v = r == c ? im.same_order[static_cast<std::size_t>(r)] : im.cross(r, c);
                if (v == 0.0)
                  continue;
                csv.cell(point.sigma).cell(static_cast<int>(r)).cell(static_cast<int>(c)).cell(v);
                csv.end_row();
              }
          }
        }
      },
      result);
}

inline void figure_mode_sweep(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  if (config.report.swept_mode > static_cast<int>(config.field.field.size()))
    throw ConfigError("/report/swept_mode", "must lie in 1.." + std::to_string(config.field.field.size()));
  const auto table = build_table(config, PathwayKind::amplitude);
  const std::size_t swept = static_cast<std::size_t>(config.report.swept_mode - 1);
  sink.write_csv(
      "figure_mode-sweep.csv",
      [&](std::ostream& out, const ArtifactMeta& meta) {
        CsvWriter csv(out, meta,
                      {"swept_mode", "sigma_swept", "sigma_fixed", "expected_probability", "cross_total",
                       "variance_re", "variance_im"});
        for (double sigma : config.report.sigma_grid) {
          UncertaintyModel model = amplitude_uncertainty(config.field.field, config.report.fixed_sigma,
                                                         config.uncertainty.relative);
          model.sigmas[swept] =
              config.uncertainty.relative ? sigma * std::abs(model.means[swept]) : sigma;
          const auto r = analyze_moments(table, model);
          csv.cell(config.report.swept_mode)
              .cell(sigma)
              .cell(config.report.fixed_sigma)
              .cell(r.expected_probability)
              .cell(r.interference.total_cross())
              .cell(r.variance.real)
              .cell(r.variance.imag);
          csv.end_row();
        }
      },
      result);
}

inline void figure_trajectory(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  const auto model =
      amplitude_uncertainty(config.field.field, config.report.robust_sigma, config.uncertainty.relative);
  const auto series = trajectory_series(config.system, config.field.field, model, config.initial_index(),
                                        config.target_index(), config.analysis.propagation,
                                        config.report.trajectory_samples, config.mc.seed);
  sink.write_csv(
      "figure_trajectory.csv",
      [&](std::ostream& out, const ArtifactMeta& meta) {
        CsvWriter csv(out, meta, {"t", "field", "nominal", "noisy_mean"});
        for (std::size_t n = 0; n < series.times.size(); ++n) {
          csv.cell(series.times[n]).cell(series.field[n]).cell(series.nominal[n]).cell(series.noisy_mean[n]);
          csv.end_row();
        }
      },
      result);
}

inline void figure_amplitude_sweep(const ExperimentConfig& config, ArtifactSink& sink, RunResult& result) {
  AmplitudeSweepSettings settings;
  settings.amplitudes = config.report.amplitudes;
  settings.restarts = config.optimizer.restarts;
  settings.sigma = config.report.robust_sigma;
  settings.max_order = config.analysis.max_order;
  settings.encoding = config.analysis.propagation;
  const auto points = amplitude_sweep(field_objective(config), config.optimizer.ga, settings);
  sink.write_csv(
      "figure_amplitude-sweep.csv",
      [&](std::ostream& out, const ArtifactMeta& meta) {
        CsvWriter csv(out, meta,
                      {"amplitude", "best_nominal", "expected_of_best", "best_expected", "significant_orders"});
        for (const auto& p : points) {
          csv.cell(p.amplitude).cell(p.best_nominal).cell(p.expected).cell(p.best_expected).cell(p.significant_orders);
          csv.end_row();
        }
      },
      result);
}

inline void run_report(const ExperimentConfig& config, const std::string& figure, ArtifactSink& sink,
                       RunResult& result) {
  if (figure == "moments-ratio" || figure == "orders" || figure == "interference" || figure == "interference-matrix")
    figure_sigma_tables(config, figure, sink, result);
  else if (figure == "mode-sweep")
    figure_mode_sweep(config, sink, result);
  else if (figure == "trajectory")
    figure_trajectory(config, sink, result);
  else if (figure == "amplitude-sweep")
    figure_amplitude_sweep(config, sink, result);
  else
    throw UsageError("unknown figure '" + figure + "'");
  result.summary = {{"figure", figure}};
}

} // namespace detail

/// Runs one command and writes its artifacts under options.out_dir.
inline RunResult run_command(const std::string& command, const ExperimentConfig& config,
                             const RunOptions& options = {}) {
  const static std::map<std::string, std::function<void(const ExperimentConfig&, detail::ArtifactSink&, RunResult&)>>
      table{{"simulate", detail::run_simulate}, {"pathways", detail::run_pathways}, {"moments", detail::run_moments},
            {"worstcase", detail::run_worstcase}, {"sample", detail::run_sample},     {"optimize", detail::run_optimize}};
  if (command != "report" && table.find(command) == table.end())
    throw UsageError("unknown command '" + command + "'");
  detail::ArtifactSink sink(options.out_dir, ArtifactMeta{command, config_hash(config)});
  RunResult result;
  if (command == "report")
    detail::run_report(config, options.figure, sink, result);
  else
    table.at(command)(config, sink, result);
  return result;
}

/// {"error": {"kind", "message", "field"}} for a failed run.
inline json error_json(const std::exception& e) {
  json body = {{"kind", "error"}, {"message", e.what()}};
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    body["kind"] = "config";
    body["field"] = c->field();
  } else if (dynamic_cast<const UsageError*>(&e)) {
    body["kind"] = "usage";
  } else if (dynamic_cast<const NumericalError*>(&e)) {
    body["kind"] = "numerical";
  } else if (dynamic_cast<const InvalidArgument*>(&e)) {
    body["kind"] = "invalid_argument";
  }
  return {{"error", body}};
}

/// 2 for usage/config problems, 1 for any other failure.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UsageError*>(&e))
    return 2;
  return 1;
}

} // namespace qpath
