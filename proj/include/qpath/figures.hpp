#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "field.hpp"
#include "moments.hpp"
#include "monte_carlo.hpp"
#include "pathways.hpp"
#include "propagator.hpp"
#include "rcga.hpp"
#include "system.hpp"

namespace qpath {

/// One sigma of a sigma-resolved series over a fixed pathway table.
struct SigmaPoint {
  double sigma = 0.0;
  MomentReport report;
};

/// Analyses of one table at uniform (relative or absolute) sigmas.
inline std::vector<SigmaPoint> sigma_series(const PathwayTable& table, const std::vector<double>& sigmas,
                                            bool relative, const MomentOptions& options = {}) {
  std::vector<SigmaPoint> out;
  for (double sigma : sigmas) {
    UncertaintyModel model;
    model.kind = table.kind;
    model.pairs = table.pairs;
    model.means = table.parameter_values;
    for (double mean : table.parameter_values)
      model.sigmas.push_back(relative ? sigma * std::abs(mean) : sigma);
    out.push_back({sigma, analyze_moments(table, model, options)});
  }
  return out;
}

/// Orders m whose nominal |U^m_ji| exceeds `threshold` times |U_ji|.
inline int significant_order_count(const PathwayTable& table, double threshold = 1e-2) {
  const double scale = std::abs(table.reconstruction());
  int count = 0;
  for (int m = 0; m <= table.max_order(); ++m)
    if (std::abs(pathway_order_sum(table, m)) > threshold * scale)
      ++count;
  return count;
}

struct AmplitudeSweepPoint {
  double amplitude = 0.0;
  /// Best nominal P_ji over all restarts, and the field achieving it.
  double best_nominal = 0.0;
  ControlField best_field;
  /// E[P_ji] of best_field at the robustness sigma.
  double expected = 0.0;
  /// Highest E[P_ji] at the robustness sigma over the per-restart best fields.
  double best_expected = 0.0;
  int significant_orders = 0;
  std::vector<double> restart_nominal;
  std::vector<double> restart_expected;
};

struct AmplitudeSweepSettings {
  std::vector<double> amplitudes{0.05, 0.075, 0.1, 0.125, 0.15};
  int restarts = 10;
  /// Relative sigma of every amplitude in the robustness score.
  double sigma = 0.2;
  int max_order = 21;
  /// Propagation used by the pathway extraction of each optimized field.
  PropagationSettings encoding{500, StepMethod::magnus4};
  /// Score every restart's field by E[P]; otherwise only the best nominal one.
  bool score_restarts = true;
};

/// Optimizes the field at each fixed amplitude (restarts with seeds
/// ga.seed + r) and scores every run's best field by nominal P and E[P].
inline std::vector<AmplitudeSweepPoint> amplitude_sweep(FieldObjective objective, const GAConfig& ga,
                                                        const AmplitudeSweepSettings& settings) {
  if (settings.restarts < 1)
    throw InvalidArgument("amplitude sweep needs at least one restart");
  std::vector<AmplitudeSweepPoint> out;
  for (double amplitude : settings.amplitudes) {
    AmplitudeSweepPoint point;
    point.amplitude = amplitude;
    objective.amplitudes.assign(objective.modes(), amplitude);
    auto score = [&](const ControlField& field) {
      const auto table = extract_pathways(PathwayKind::amplitude, objective.system, field, settings.max_order,
                                          settings.encoding, objective.initial, objective.target);
      return std::pair{sigma_series(table, {settings.sigma}, true).front().report.expected_probability,
                       significant_order_count(table)};
    };
    for (int r = 0; r < settings.restarts; ++r) {
      GAConfig run = ga;
      run.seed = ga.seed + static_cast<std::uint64_t>(r);
      const auto result = optimize(objective, run);
      point.restart_nominal.push_back(result.best.fitness);
      if (settings.score_restarts)
        point.restart_expected.push_back(score(result.field).first);
      if (r == 0 || result.best.fitness > point.best_nominal) {
        point.best_nominal = result.best.fitness;
        point.best_field = result.field;
      }
    }
    std::tie(point.expected, point.significant_orders) = score(point.best_field);
    point.best_expected = point.restart_expected.empty()
                              ? point.expected
                              : *std::max_element(point.restart_expected.begin(), point.restart_expected.end());
    out.push_back(std::move(point));
  }
  return out;
}

/// Nominal and noise-averaged population of the target level at every step
/// boundary.
struct TrajectorySeries {
  std::vector<double> times;
  std::vector<double> field;
  std::vector<double> nominal;
  std::vector<double> noisy_mean;
};

inline TrajectorySeries trajectory_series(const QuantumSystem& system, const ControlField& field,
                                          const UncertaintyModel& model, int initial, int target,
                                          const PropagationSettings& settings, std::size_t samples,
                                          std::uint64_t seed) {
  TrajectorySeries out;
  out.nominal = population_trajectory(system, field, settings, initial, target);
  const std::size_t points = out.nominal.size();
  for (std::size_t n = 0; n < points; ++n) {
    const double t = field.duration * static_cast<double>(n) / static_cast<double>(points - 1);
    out.times.push_back(t);
    out.field.push_back(field_value(field, t));
  }
  std::vector<std::vector<double>> runs(samples);
  parallel_for(samples, [&](std::size_t s) {
    const auto values = sample_parameter_vector(model, seed, s);
    const auto [sys, fld] = detail::perturbed_configuration(system, field, model, values);
    runs[s] = population_trajectory(sys, fld, settings, initial, target);
  });
  out.noisy_mean.assign(points, 0.0);
  for (const auto& run : runs)
    for (std::size_t n = 0; n < points; ++n)
      out.noisy_mean[n] += run[n] / static_cast<double>(samples);
  return out;
}

} // namespace qpath
