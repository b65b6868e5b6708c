#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "moments.hpp"
#include "parallel.hpp"
#include "propagator.hpp"
#include "system.hpp"

namespace qpath {

/// Sub-seed of sample `index`: splitmix64 finalizer over seed and index.
/// Every sample owns an mt19937_64 seeded with it, so draws do not depend on
/// worker count or scheduling.
inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Parameter vector of sample `index`: one normal draw per parameter, in
/// parameter order. Negative draws are kept.
inline std::vector<double> sample_parameter_vector(const UncertaintyModel& model, std::uint64_t seed,
                                                   std::uint64_t index) {
  std::mt19937_64 engine(sample_seed(seed, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(model.parameter_count());
  for (std::size_t k = 0; k < values.size(); ++k)
    values[k] = model.means[k] + model.sigmas[k] * normal(engine);
  return values;
}

inline std::vector<std::vector<double>> sample_parameters(const UncertaintyModel& model, std::uint64_t seed,
                                                          std::size_t count) {
  model.validate();
  if (count < 1)
    throw InvalidArgument("sample count must be at least 1");
  std::vector<std::vector<double>> out(count);
  for (std::size_t n = 0; n < count; ++n)
    out[n] = sample_parameter_vector(model, seed, n);
  return out;
}

/// Mean, Bessel-corrected variance and their standard errors of a sample,
/// reduced in index order.
struct ScalarSummary {
  double mean = 0.0;
  double variance = 0.0;
  double mean_error = 0.0;
  double variance_error = 0.0;
};

inline ScalarSummary summarize(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 2)
    throw InvalidArgument("summary needs at least two samples");
  ScalarSummary out;
  for (double v : values)
    out.mean += v;
  out.mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d = (v - out.mean) * (v - out.mean);
    m2 += d;
    m4 += d * d;
  }
  out.variance = m2 / (n - 1.0);
  m4 /= n;
  out.mean_error = std::sqrt(out.variance / n);
  const double s4 = out.variance * out.variance;
  out.variance_error = std::sqrt(std::max(m4 - (n - 3.0) / (n - 1.0) * s4, 0.0) / n);
  return out;
}

/// Per-sample outcome; amplitudes are interaction-picture U_I,ji.
struct SampleRecord {
  std::vector<double> parameters;
  complex amplitude{};
  double probability = 0.0;
};

struct SampleStatistics {
  PathwayKind kind = PathwayKind::amplitude;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  int initial = 0;
  int target = 0;
  ScalarSummary probability;
  ScalarSummary amplitude_real;
  ScalarSummary amplitude_imag;
  std::vector<SampleRecord> samples;

  complex mean_amplitude() const { return {amplitude_real.mean, amplitude_imag.mean}; }
};

namespace detail {

/// Perturbed (system, field) of one parameter draw.
inline std::pair<QuantumSystem, ControlField> perturbed_configuration(const QuantumSystem& system,
                                                                      const ControlField& field,
                                                                      const UncertaintyModel& model,
                                                                      const std::vector<double>& values) {
  if (model.kind == PathwayKind::amplitude) {
    if (values.size() != field.size())
      throw InvalidArgument("amplitude uncertainty model has " + std::to_string(values.size()) +
                            " parameters but the field has " + std::to_string(field.size()) + " modes");
    return {system, with_amplitudes(field, values)};
  }
  return {with_dipole_values(system, model.pairs, values), field};
}

inline std::string describe_draw(std::size_t index, const std::vector<double>& values) {
  std::string out = "sample " + std::to_string(index) + " [";
  for (std::size_t k = 0; k < values.size(); ++k)
    out += (k ? ", " : "") + std::to_string(values[k]);
  return out + "]";
}

} // namespace detail

struct SamplingOptions {
  /// Keep per-sample records (for CSV dumps).
  bool keep_samples = false;
};

/// Monte Carlo estimate of P_ji and of the interaction-picture amplitude under
/// the uncertainty model.
inline SampleStatistics estimate_statistics(const QuantumSystem& system, const ControlField& field,
                                            const UncertaintyModel& model, int initial, int target,
                                            std::size_t count, std::uint64_t seed,
                                            const PropagationSettings& settings,
                                            const SamplingOptions& options = {}) {
  system.validate();
  field.validate();
  model.validate();
  if (count < 2)
    throw InvalidArgument("Monte Carlo needs at least two samples");
  if (initial < 0 || initial >= system.dimension() || target < 0 || target >= system.dimension())
    throw InvalidArgument("transition indices out of range");
  const complex phase = interaction_phase(system.energies, target, field.duration);
  std::vector<SampleRecord> records(count);
  parallel_for(count, [&](std::size_t n) {
    auto values = sample_parameter_vector(model, seed, n);
    const auto [sys, fld] = detail::perturbed_configuration(system, field, model, values);
    try {
      const ComplexVector psi = propagate_state(sys, fld, settings, initial);
      records[n].amplitude = phase * psi(target);
    } catch (const Error& e) {
      throw NumericalError(detail::describe_draw(n, values) + ": " + e.what());
    }
    records[n].probability = std::norm(records[n].amplitude);
    records[n].parameters = std::move(values);
  });
  std::vector<double> p(count), re(count), im(count);
  for (std::size_t n = 0; n < count; ++n) {
    p[n] = records[n].probability;
    re[n] = records[n].amplitude.real();
    im[n] = records[n].amplitude.imag();
  }
  SampleStatistics out;
  out.kind = model.kind;
  out.count = count;
  out.seed = seed;
  out.initial = initial;
  out.target = target;
  out.probability = summarize(p);
  out.amplitude_real = summarize(re);
  out.amplitude_imag = summarize(im);
  if (options.keep_samples)
    out.samples = std::move(records);
  return out;
}

/// Sample means of the interaction-picture Dyson terms U^m_ji, m = 0..M, with
/// standard errors of their real and imaginary parts.
struct OrderStatistics {
  std::size_t count = 0;
  std::vector<complex> mean;
  std::vector<complex> error;
};

inline OrderStatistics estimate_order_statistics(const QuantumSystem& system, const ControlField& field,
                                                 const UncertaintyModel& model, int initial, int target,
                                                 int max_order, std::size_t count, std::uint64_t seed,
                                                 const PropagationSettings& settings) {
  model.validate();
  if (count < 2)
    throw InvalidArgument("Monte Carlo needs at least two samples");
  const complex phase = interaction_phase(system.energies, target, field.duration);
  const auto orders = static_cast<std::size_t>(max_order) + 1;
  std::vector<std::vector<complex>> terms(count);
  parallel_for(count, [&](std::size_t n) {
    const auto values = sample_parameter_vector(model, seed, n);
    const auto [sys, fld] = detail::perturbed_configuration(system, field, model, values);
    const auto dyson = dyson_decompose(sys, fld, max_order, settings);
    terms[n].resize(orders);
    for (std::size_t m = 0; m < orders; ++m)
      terms[n][m] = phase * dyson.orders[m](target, initial);
  });
  OrderStatistics out;
  out.count = count;
  for (std::size_t m = 0; m < orders; ++m) {
    std::vector<double> re(count), im(count);
    for (std::size_t n = 0; n < count; ++n) {
      re[n] = terms[n][m].real();
      im[n] = terms[n][m].imag();
    }
    const auto sr = summarize(re);
    const auto si = summarize(im);
    out.mean.emplace_back(sr.mean, si.mean);
    out.error.emplace_back(sr.mean_error, si.mean_error);
  }
  return out;
}

} // namespace qpath
