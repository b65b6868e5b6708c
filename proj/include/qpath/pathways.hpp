#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "encoding.hpp"
#include "errors.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "propagator.hpp"
#include "system.hpp"

namespace qpath {

struct PathwayEntry {
  PathwayIndex index;
  std::int64_t gamma = 0;
  /// U_ji(T, alpha), interaction picture.
  complex raw{};
  /// c_alpha = raw / prod_k x_k^{alpha_k}.
  complex normalized{};

  int order() const { return index.order(); }
};

/// Decoded pathway amplitudes of one transition i -> j.
///
/// All complex amplitudes are interaction-picture values
/// U_I,ji = e^{i E_j T} U_ji, so |U_I,ji| = |U_ji| and per-order sums match the
/// interaction-picture Dyson terms.
struct PathwayTable {
  PathwayKind kind = PathwayKind::amplitude;
  int initial = 0;
  int target = 0;
  double duration = 0.0;
  std::vector<std::string> parameter_labels;
  /// Nominal parameter values used for normalization (A_k or mu_pq).
  std::vector<double> parameter_values;
  /// Encoded dipole pairs (dipole kind only).
  std::vector<DipolePair> pairs;
  EncodingScheme scheme;
  /// Order-0 (free evolution) content, decoded at gamma = 0.
  complex free_term{};
  /// U_I,ji(T) of the unencoded dynamics (the s = 0 sample).
  complex nominal{};
  /// Every in-scope pathway, order 1..M, sorted by order then exponents.
  std::vector<PathwayEntry> entries;
  /// sum over the grid of |coefficient|^2, and the part not assigned to any
  /// in-scope pathway (aliases and orders above M).
  double total_energy = 0.0;
  double residual_energy = 0.0;

  std::size_t parameter_count() const { return parameter_values.size(); }
  int max_order() const { return scheme.max_order; }
  double residual_norm() const { return std::sqrt(residual_energy); }

  /// free_term + sum of all raw pathway amplitudes.
  complex reconstruction() const {
    complex sum = free_term;
    for (const auto& entry : entries)
      sum += entry.raw;
    return sum;
  }
};

/// Options of the decode step.
struct DecodeOptions {
  /// Maximum residual energy as a fraction of the total spectral energy.
  double residual_threshold = 1e-3;
};

/// sum of raw amplitudes of order m (m = 0 is the free term).
inline complex pathway_order_sum(const PathwayTable& table, int order) {
  if (order == 0)
    return table.free_term;
  complex sum{};
  for (const auto& entry : table.entries)
    if (entry.order() == order)
      sum += entry.raw;
  return sum;
}

/// prod_k values_k^{alpha_k}
inline double parameter_monomial(const std::vector<double>& values, const std::vector<int>& alpha) {
  double product = 1.0;
  for (std::size_t k = 0; k < alpha.size(); ++k)
    for (int e = 0; e < alpha[k]; ++e)
      product *= values[k];
  return product;
}

namespace detail {

/// Forward DFT coefficients c_g = (1/N) sum_n u_n e^{-i 2 pi g n / N}, i.e. the
/// weight of e^{+i g s} in u(s) sampled at s_n = 2 pi n / N.
inline std::vector<complex> fourier_coefficients(const std::vector<complex>& samples) {
  Eigen::FFT<double> fft;
  std::vector<complex> spectrum;
  fft.fwd(spectrum, samples);
  const double scale = 1.0 / static_cast<double>(samples.size());
  for (auto& value : spectrum)
    value *= scale;
  return spectrum;
}

/// Encoded propagations on the uniform s-grid: sample n is U_ji(T, s_n) for
/// the system/field returned by make(s_n).
template <typename MakeEncoded>
std::vector<complex> encoded_samples(std::int64_t grid_size, int initial, int target,
                                     const PropagationSettings& settings, MakeEncoded&& make) {
  std::vector<complex> samples(static_cast<std::size_t>(grid_size));
  parallel_for(samples.size(), [&](std::size_t n) {
    const double s = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(grid_size);
    const auto [system, field] = make(s);
    samples[n] = propagate_state(system, field, settings, initial)(target);
  });
  return samples;
}

inline void decode_into(PathwayTable& table, const std::vector<complex>& samples, complex phase,
                        const DecodeOptions& options) {
  const auto spectrum = fourier_coefficients(samples);
  const auto& scheme = table.scheme;
  table.nominal = phase * samples.front();
  table.total_energy = 0.0;
  table.residual_energy = 0.0;
  table.entries.clear();
  for (std::int64_t g = 0; g < scheme.grid_size; ++g) {
    const complex coefficient = phase * spectrum[static_cast<std::size_t>(g)];
    const double energy = std::norm(coefficient);
    table.total_energy += energy;
    if (g == 0) {
      table.free_term = coefficient;
      continue;
    }
    const auto index = g <= scheme.max_in_scope_gamma() ? gamma_to_alpha(g, scheme) : std::nullopt;
    if (!index) {
      table.residual_energy += energy;
      continue;
    }
    PathwayEntry entry;
    entry.index = *index;
    entry.gamma = g;
    entry.raw = coefficient;
    entry.normalized = coefficient / parameter_monomial(table.parameter_values, index->exponents);
    table.entries.push_back(std::move(entry));
  }
  std::sort(table.entries.begin(), table.entries.end(), [](const PathwayEntry& a, const PathwayEntry& b) {
    if (a.order() != b.order())
      return a.order() < b.order();
    return pathway_compare(a.index.exponents, b.index.exponents) < 0;
  });
  if (table.residual_energy > options.residual_threshold * table.total_energy)
    throw NumericalError("pathway decode residual " + std::to_string(table.residual_energy) + " exceeds " +
                         std::to_string(options.residual_threshold) + " of total spectral energy " +
                         std::to_string(table.total_energy) + "; increase max order or grid size");
}

inline void check_transition(int dimension, int initial, int target) {
  if (initial < 0 || initial >= dimension || target < 0 || target >= dimension)
    throw InvalidArgument("transition indices out of range");
}

} // namespace detail

/// Amplitude pathways of the transition initial -> target via the encoding
/// A_k -> A_k e^{i gamma_k s}: propagate on the s-grid, Fourier-decode the
/// (target, initial) entry, assign frequency gamma to pathway alpha.
inline PathwayTable extract_amplitude_pathways(const QuantumSystem& system, const ControlField& field,
                                               const EncodingScheme& scheme, const PropagationSettings& settings,
                                               int initial, int target, const DecodeOptions& options = {}) {
  system.validate();
  field.validate();
  scheme.validate();
  detail::check_transition(system.dimension(), initial, target);
  if (scheme.kind != PathwayKind::amplitude)
    throw InvalidArgument("extract_amplitude_pathways needs an amplitude encoding scheme");
  if (scheme.parameter_count() != field.size())
    throw InvalidArgument("encoding scheme has " + std::to_string(scheme.parameter_count()) +
                          " parameters but the field has " + std::to_string(field.size()) + " modes");
  PathwayTable table;
  table.kind = PathwayKind::amplitude;
  table.initial = initial;
  table.target = target;
  table.duration = field.duration;
  table.scheme = scheme;
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (field.modes[k].amplitude == 0.0)
      throw InvalidArgument("mode " + std::to_string(k + 1) + " has zero amplitude; pathways cannot be normalized");
    table.parameter_labels.push_back("A" + std::to_string(k + 1));
    table.parameter_values.push_back(field.modes[k].amplitude);
  }
  const EncodedSystem encoded_system = to_complex(system);
  const EncodedField base_field = to_complex(field);
  const auto samples = detail::encoded_samples(scheme.grid_size, initial, target, settings, [&](double s) {
    EncodedField encoded = base_field;
    for (std::size_t k = 0; k < encoded.modes.size(); ++k)
      encoded.modes[k].amplitude *= std::exp(I * (static_cast<double>(scheme.frequencies[k]) * s));
    return std::pair{encoded_system, encoded};
  });
  detail::decode_into(table, samples, interaction_phase(system.energies, target, field.duration), options);
  return table;
}

/// Dipole (multiphoton) pathways via mu_pq -> mu_pq e^{i gamma_pq s}, encoded
/// symmetrically over the nonzero pairs p < q only.
inline PathwayTable extract_dipole_pathways(const QuantumSystem& system, const ControlField& field,
                                            const EncodingScheme& scheme, const PropagationSettings& settings,
                                            int initial, int target, const DecodeOptions& options = {}) {
  system.validate();
  field.validate();
  scheme.validate();
  detail::check_transition(system.dimension(), initial, target);
  if (scheme.kind != PathwayKind::dipole)
    throw InvalidArgument("extract_dipole_pathways needs a dipole encoding scheme");
  const auto pairs = nonzero_dipole_pairs(system);
  if (scheme.parameter_count() != pairs.size())
    throw InvalidArgument("encoding scheme has " + std::to_string(scheme.parameter_count()) +
                          " parameters but the system has " + std::to_string(pairs.size()) +
                          " nonzero dipole pairs");
  PathwayTable table;
  table.kind = PathwayKind::dipole;
  table.initial = initial;
  table.target = target;
  table.duration = field.duration;
  table.scheme = scheme;
  table.pairs = pairs;
  for (const auto& pair : pairs) {
    table.parameter_labels.push_back(pair.label());
    table.parameter_values.push_back(system.dipole(pair.p, pair.q));
  }
  const EncodedSystem base_system = to_complex(system);
  const EncodedField encoded_field = to_complex(field);
  const auto samples = detail::encoded_samples(scheme.grid_size, initial, target, settings, [&](double s) {
    EncodedSystem encoded = base_system;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const complex factor = std::exp(I * (static_cast<double>(scheme.frequencies[k]) * s));
      encoded.dipole(pairs[k].p, pairs[k].q) *= factor;
      encoded.dipole(pairs[k].q, pairs[k].p) *= factor;
    }
    return std::pair{encoded, encoded_field};
  });
  detail::decode_into(table, samples, interaction_phase(system.energies, target, field.duration), options);
  return table;
}

/// Convenience: scheme sized for the field / system, then extraction.
inline PathwayTable extract_pathways(PathwayKind kind, const QuantumSystem& system, const ControlField& field,
                                     int max_order, const PropagationSettings& settings, int initial, int target,
                                     std::int64_t base = 1, std::int64_t grid_override = 0,
                                     const DecodeOptions& options = {}) {
  const std::size_t count = kind == PathwayKind::amplitude ? field.size() : nonzero_dipole_pairs(system).size();
  auto scheme = assign_encoding_frequencies(static_cast<int>(count), max_order, base, kind);
  if (grid_override > 0)
    scheme.grid_size = grid_override;
  return kind == PathwayKind::amplitude
             ? extract_amplitude_pathways(system, field, scheme, settings, initial, target, options)
             : extract_dipole_pathways(system, field, scheme, settings, initial, target, options);
}

} // namespace qpath
