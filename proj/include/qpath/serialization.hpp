#pragma once

#include <charconv>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "encoding.hpp"
#include "errors.hpp"
#include "moments.hpp"
#include "monte_carlo.hpp"
#include "pathways.hpp"
#include "rcga.hpp"
#include "worst_case.hpp"

#ifndef QPATH_VERSION
#define QPATH_VERSION "0.1.0"
#endif

namespace qpath {

using json = nlohmann::json;

/// Provenance stamped on every artifact.
struct ArtifactMeta {
  std::string command;
  std::string config_hash;

  json to_json() const {
    return {{"tool", "qpath"}, {"version", QPATH_VERSION}, {"command", command}, {"config_hash", config_hash}};
  }

  std::string csv_comment() const {
    return "# qpath " + std::string(QPATH_VERSION) + " command=" + command + " config_hash=" + config_hash;
  }
};

/// Shortest round-trip decimal form.
inline std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc())
    throw Error("number formatting failed");
  return std::string(buffer, end);
}

inline json complex_json(complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline complex complex_from_json(const json& node) {
  return {node.at("re").get<double>(), node.at("im").get<double>()};
}

inline json vector_json(const RealVector& v) { return std::vector<double>(v.begin(), v.end()); }

inline json pairs_json(const std::vector<DipolePair>& pairs) {
  json out = json::array();
  for (const auto& pair : pairs)
    out.push_back(pair.label());
  return out;
}

/// Comma-separated rows with a provenance comment line.
class CsvWriter {
public:
  CsvWriter(std::ostream& out, const ArtifactMeta& meta, const std::vector<std::string>& columns) : out_(out) {
    out_ << meta.csv_comment() << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c)
      out_ << (c ? "," : "") << columns[c];
    out_ << '\n';
  }

  CsvWriter& cell(const std::string& text) {
    out_ << (first_ ? "" : ",") << text;
    first_ = false;
    return *this;
  }

  CsvWriter& cell(double value) { return cell(format_number(value)); }
  CsvWriter& cell(int value) { return cell(std::to_string(value)); }
  CsvWriter& cell(std::int64_t value) { return cell(std::to_string(value)); }
  CsvWriter& cell(std::size_t value) { return cell(std::to_string(value)); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

private:
  std::ostream& out_;
  bool first_ = true;
};

// Pathway tables --------------------------------------------------------------

inline json to_json(const EncodingScheme& scheme) {
  return {{"kind", to_string(scheme.kind)},
          {"base", scheme.base},
          {"frequencies", scheme.frequencies},
          {"max_order", scheme.max_order},
          {"grid_size", scheme.grid_size}};
}

inline json to_json(const PathwayTable& table) {
  json entries = json::array();
  for (const auto& e : table.entries)
    entries.push_back({{"alpha", e.index.exponents},
                       {"gamma", e.gamma},
                       {"order", e.order()},
                       {"raw", complex_json(e.raw)},
                       {"normalized", complex_json(e.normalized)}});
  return {{"kind", to_string(table.kind)},
          {"initial", table.initial + 1},
          {"target", table.target + 1},
          {"duration", table.duration},
          {"parameters", table.parameter_labels},
          {"parameter_values", table.parameter_values},
          {"scheme", to_json(table.scheme)},
          {"picture", "interaction"},
          {"free_term", complex_json(table.free_term)},
          {"nominal", complex_json(table.nominal)},
          {"reconstruction", complex_json(table.reconstruction())},
          {"total_energy", table.total_energy},
          {"residual_energy", table.residual_energy},
          {"residual_norm", table.residual_norm()},
          {"entries", entries}};
}

/// Inverse of to_json(PathwayTable); dipole pairs are recovered from labels.
inline PathwayTable pathway_table_from_json(const json& node) {
  try {
    PathwayTable table;
    const auto kind = node.at("kind").get<std::string>();
    if (kind != "amplitude" && kind != "dipole")
      throw InvalidArgument("unknown pathway kind " + kind);
    table.kind = kind == "amplitude" ? PathwayKind::amplitude : PathwayKind::dipole;
    table.initial = node.at("initial").get<int>() - 1;
    table.target = node.at("target").get<int>() - 1;
    table.duration = node.at("duration").get<double>();
    table.parameter_labels = node.at("parameters").get<std::vector<std::string>>();
    table.parameter_values = node.at("parameter_values").get<std::vector<double>>();
    if (table.kind == PathwayKind::dipole)
      for (const auto& label : table.parameter_labels) {
        if (label.size() != 4 || label.rfind("mu", 0) != 0)
          throw InvalidArgument("cannot parse dipole label " + label);
        table.pairs.push_back({label[2] - '1', label[3] - '1'});
      }
    const auto& scheme = node.at("scheme");
    table.scheme.kind = table.kind;
    table.scheme.base = scheme.at("base").get<std::int64_t>();
    table.scheme.frequencies = scheme.at("frequencies").get<std::vector<std::int64_t>>();
    table.scheme.max_order = scheme.at("max_order").get<int>();
    table.scheme.grid_size = scheme.at("grid_size").get<std::int64_t>();
    table.scheme.validate();
    table.free_term = complex_from_json(node.at("free_term"));
    table.nominal = complex_from_json(node.at("nominal"));
    table.total_energy = node.at("total_energy").get<double>();
    table.residual_energy = node.at("residual_energy").get<double>();
    for (const auto& e : node.at("entries")) {
      PathwayEntry entry;
      entry.index = {table.kind, e.at("alpha").get<std::vector<int>>()};
      entry.gamma = e.at("gamma").get<std::int64_t>();
      entry.raw = complex_from_json(e.at("raw"));
      entry.normalized = complex_from_json(e.at("normalized"));
      table.entries.push_back(std::move(entry));
    }
    return table;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed pathway table: ") + e.what());
  }
}

/// kind, alpha, gamma, order, raw_re, raw_im, norm_re, norm_im
inline void write_pathway_csv(std::ostream& out, const PathwayTable& table, const ArtifactMeta& meta) {
  CsvWriter csv(out, meta, {"kind", "alpha", "gamma", "order", "raw_re", "raw_im", "norm_re", "norm_im"});
  for (const auto& e : table.entries) {
    csv.cell(std::string(to_string(table.kind)))
        .cell(e.index.label())
        .cell(e.gamma)
        .cell(e.order())
        .cell(e.raw.real())
        .cell(e.raw.imag())
        .cell(e.normalized.real())
        .cell(e.normalized.imag());
    csv.end_row();
  }
}

// Moments ---------------------------------------------------------------------

inline json to_json(const InterferenceMoments& moments) {
  json cross = json::array();
  for (Eigen::Index r = 0; r < moments.cross.rows(); ++r)
    for (Eigen::Index c = r + 1; c < moments.cross.cols(); ++c)
      if (moments.cross(r, c) != 0.0)
        cross.push_back({{"m_lower", r}, {"m_upper", c}, {"value", moments.cross(r, c)}});
  return {{"same_order", moments.same_order},
          {"cross", cross},
          {"total_same_order", moments.total_same_order()},
          {"total_cross", moments.total_cross()}};
}

inline json to_json(const MomentReport& report) {
  json orders = json::array();
  for (std::size_t m = 0; m < report.order_expectations.size(); ++m)
    orders.push_back({{"order", m}, {"expected", complex_json(report.order_expectations[m])}});
  return {{"kind", to_string(report.kind)},
          {"initial", report.initial + 1},
          {"target", report.target + 1},
          {"sigmas", report.sigmas},
          {"max_order", report.max_order},
          {"picture", "interaction"},
          {"nominal_amplitude", complex_json(report.nominal_amplitude)},
          {"nominal_probability", report.nominal_probability},
          {"expected_amplitude", complex_json(report.expected_amplitude)},
          {"variance_re", report.variance.real},
          {"variance_im", report.variance.imag},
          {"expected_probability", report.expected_probability},
          {"order_expectations", orders},
          {"interference", to_json(report.interference)},
          {"tail_estimate", report.tail_estimate},
          {"tail_share", report.tail_share},
          {"worst_case",
           {{"sigma_linear", report.sigma_linear},
            {"confidence", report.confidence},
            {"value", report.worst_case}}},
          {"warnings", report.warnings}};
}

/// Rows m', columns m; entry (m', m) = 2 E[Re{U^m (U^m')^*}] for m' < m and
/// E[|U^m|^2] on the diagonal.
inline void write_interference_csv(std::ostream& out, const InterferenceMoments& moments, const ArtifactMeta& meta) {
  std::vector<std::string> columns{"m_prime"};
  const auto orders = moments.cross.rows();
  for (Eigen::Index m = 0; m < orders; ++m)
    columns.push_back("m" + std::to_string(m));
  CsvWriter csv(out, meta, columns);
  for (Eigen::Index r = 0; r < orders; ++r) {
    csv.cell(static_cast<int>(r));
    for (Eigen::Index c = 0; c < orders; ++c)
      csv.cell(r == c ? moments.same_order[static_cast<std::size_t>(r)] : moments.cross(r, c));
    csv.end_row();
  }
}

// Monte Carlo -----------------------------------------------------------------

inline json to_json(const ScalarSummary& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"mean_error", s.mean_error}, {"variance_error", s.variance_error}};
}

inline json to_json(const SampleStatistics& stats) {
  return {{"kind", to_string(stats.kind)},
          {"count", stats.count},
          {"seed", stats.seed},
          {"initial", stats.initial + 1},
          {"target", stats.target + 1},
          {"picture", "interaction"},
          {"probability", to_json(stats.probability)},
          {"amplitude_re", to_json(stats.amplitude_real)},
          {"amplitude_im", to_json(stats.amplitude_imag)},
          {"mean_amplitude", complex_json(stats.mean_amplitude())}};
}

inline void write_samples_csv(std::ostream& out, const SampleStatistics& stats, const std::vector<std::string>& labels,
                              const ArtifactMeta& meta) {
  std::vector<std::string> columns{"sample"};
  columns.insert(columns.end(), labels.begin(), labels.end());
  columns.insert(columns.end(), {"u_re", "u_im", "probability"});
  CsvWriter csv(out, meta, columns);
  for (std::size_t n = 0; n < stats.samples.size(); ++n) {
    csv.cell(n);
    for (double v : stats.samples[n].parameters)
      csv.cell(v);
    csv.cell(stats.samples[n].amplitude.real()).cell(stats.samples[n].amplitude.imag()).cell(stats.samples[n].probability);
    csv.end_row();
  }
}

// Worst case ------------------------------------------------------------------

inline json to_json(const WorstCaseReport& report) {
  return {{"initial", report.initial + 1},
          {"target", report.target + 1},
          {"parameters", pairs_json(report.pairs)},
          {"J", report.value},
          {"gradient", vector_json(report.gradient)},
          {"imaginary_residue", report.imaginary_residue},
          {"sigma_J", report.sigma_J},
          {"confidence", report.confidence},
          {"K", report.pairs.size()},
          {"chi_square", report.quantile},
          {"delta_theta_wc", vector_json(report.deviation.delta)},
          {"delta_J_wc", report.deviation.magnitude},
          {"degenerate", report.deviation.degenerate},
          {"J_wc_linear", report.ellipsoid_value},
          {"J_wc_propagated", report.perturbed_value},
          {"J_wc_distributional", report.distributional_value}};
}

// Optimizer -------------------------------------------------------------------

inline json to_json(const ControlField& field) {
  json modes = json::array();
  for (const auto& m : field.modes)
    modes.push_back({{"omega", m.omega}, {"amplitude", m.amplitude}, {"phase", m.phase}});
  return {{"modes", modes}, {"duration", field.duration}, {"carrier", to_string(field.carrier)}};
}

inline json to_json(const OptimizationResult& result) {
  return {{"best_fitness", result.best.fitness},
          {"genes", result.best.genes},
          {"field", to_json(result.field)},
          {"generations", result.history.empty() ? 0 : result.history.back().generation},
          {"evaluations", result.evaluations}};
}

/// run, generation, best, mean, std
inline void write_history_csv(std::ostream& out, const std::vector<std::vector<GenerationRecord>>& runs,
                              const ArtifactMeta& meta) {
  CsvWriter csv(out, meta, {"run", "generation", "best", "mean", "std"});
  for (std::size_t run = 0; run < runs.size(); ++run)
    for (const auto& h : runs[run]) {
      csv.cell(run).cell(h.generation).cell(h.best).cell(h.mean).cell(h.std);
      csv.end_row();
    }
}

} // namespace qpath
