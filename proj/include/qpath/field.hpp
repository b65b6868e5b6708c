#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "system.hpp"

namespace qpath {

/// Waveform of each spectral mode. `cosine` gives A cos(w t + phi); `sine`
/// gives A sin(w t + phi), the convention the RCGA reference fields were
/// optimized under (see `table2_field`).
enum class Carrier { cosine, sine };

inline const char* to_string(Carrier carrier) { return carrier == Carrier::cosine ? "cosine" : "sine"; }

inline double carrier_value(Carrier carrier, double argument) {
  return carrier == Carrier::cosine ? std::cos(argument) : std::sin(argument);
}

template <typename Scalar>
struct BasicMode {
  double omega = 1.0;
  Scalar amplitude{};
  double phase = 0.0;

  friend bool operator==(const BasicMode&, const BasicMode&) = default;
};

/// eps(t) = sum_k A_k carrier(w_k t + phi_k) on [0, T].
///
/// Amplitudes are signed: a negative A_k is a pi phase flip, which Monte Carlo
/// draws rely on. The encoder uses `Scalar = std::complex<double>`.
template <typename Scalar>
struct BasicControlField {
  std::vector<BasicMode<Scalar>> modes;
  double duration = 1.0;
  Carrier carrier = Carrier::cosine;

  std::size_t size() const { return modes.size(); }

  void validate() const {
    if (modes.empty())
      throw InvalidArgument("control field needs at least one mode");
    if (!(duration > 0.0) || !std::isfinite(duration))
      throw InvalidArgument("field duration must be positive and finite");
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (!(modes[k].omega > 0.0) || !std::isfinite(modes[k].omega))
        throw InvalidArgument("mode " + std::to_string(k + 1) + ": frequency must be positive");
      if (!std::isfinite(std::abs(modes[k].amplitude)) || !std::isfinite(modes[k].phase))
        throw InvalidArgument("mode " + std::to_string(k + 1) + ": non-finite parameter");
    }
  }

  std::vector<Scalar> amplitudes() const {
    std::vector<Scalar> out;
    out.reserve(modes.size());
    for (const auto& mode : modes)
      out.push_back(mode.amplitude);
    return out;
  }

  friend bool operator==(const BasicControlField&, const BasicControlField&) = default;
};

using Mode = BasicMode<double>;
using ControlField = BasicControlField<double>;
using EncodedField = BasicControlField<complex>;

template <typename Scalar>
Scalar field_value(const BasicControlField<Scalar>& field, double t) {
  Scalar value{};
  for (const auto& mode : field.modes)
    value += mode.amplitude * carrier_value(field.carrier, mode.omega * t + mode.phase);
  return value;
}

/// Copy with every amplitude replaced.
inline ControlField with_amplitudes(ControlField field, const std::vector<double>& amplitudes) {
  if (amplitudes.size() != field.modes.size())
    throw InvalidArgument("amplitude count does not match mode count");
  for (std::size_t k = 0; k < amplitudes.size(); ++k)
    field.modes[k].amplitude = amplitudes[k];
  return field;
}

template <typename Scalar>
BasicControlField<complex> to_complex(const BasicControlField<Scalar>& field) {
  BasicControlField<complex> out;
  out.duration = field.duration;
  out.carrier = field.carrier;
  for (const auto& mode : field.modes)
    out.modes.push_back({mode.omega, complex(mode.amplitude), mode.phase});
  return out;
}

template <typename Scalar>
EncodedSystem to_complex(const BasicQuantumSystem<Scalar>& system) {
  return EncodedSystem{system.energies, system.dipole.template cast<complex>()};
}

inline constexpr int table2_field_count = 8;

/// Frequencies and phases of the eight RCGA-optimized reference fields
/// (eps1..eps8), three modes each, A_k = 0.1, T = 10.
///
/// The phases only reproduce the reported transition probabilities
/// (P41 ~ 0.92-0.98) with the sine carrier; under the cosine carrier the same
/// numbers give 0.77-0.89.
inline ControlField table2_field(int index, double amplitude = 0.1) {
  static constexpr std::array<std::array<double, 3>, 8> omegas{{{1.0311, 2.4347, 1.0540},
                                                                {1.7671, 1.0048, 1.0019},
                                                                {1.0076, 1.0105, 1.7279},
                                                                {1.0004, 1.0996, 1.0411},
                                                                {1.0067, 1.8850, 1.0426},
                                                                {3.7307, 1.0442, 1.0209},
                                                                {3.0631, 1.0239, 1.0512},
                                                                {1.0009, 1.0112, 1.8064}}};
  static constexpr std::array<std::array<double, 3>, 8> phases{{{3.6380, 3.3807, 3.4839},
                                                                {4.7794, 4.2516, 4.2667},
                                                                {1.1894, 1.1694, 1.8371},
                                                                {2.3030, 3.3381, 3.5704},
                                                                {0.6550, 0.6656, 0.4101},
                                                                {0.0449, 0.4724, 0.6493},
                                                                {0.2068, 0.5943, 0.4091},
                                                                {0.8815, 0.8174, 1.3002}}};
  if (index < 1 || index > table2_field_count)
    throw InvalidArgument("reference field index must be in 1..8, got " + std::to_string(index));
  ControlField field;
  field.duration = 10.0;
  field.carrier = Carrier::sine;
  for (int k = 0; k < 3; ++k)
    field.modes.push_back({omegas[index - 1][k], amplitude, phases[index - 1][k]});
  return field;
}

} // namespace qpath
