#pragma once

#include <qpath/field.hpp>
#include <qpath/propagator.hpp>
#include <qpath/system.hpp>

namespace testing_support {

/// Three-level ladder used where the benchmark system would be slow.
inline qpath::QuantumSystem ladder() {
  qpath::QuantumSystem system;
  system.energies = qpath::RealVector{{0.0, 1.0, 2.2}};
  system.dipole = qpath::RealMatrix::Zero(3, 3);
  system.dipole(0, 1) = system.dipole(1, 0) = 1.0;
  system.dipole(1, 2) = system.dipole(2, 1) = 0.8;
  return system;
}

inline qpath::ControlField two_mode_field() {
  qpath::ControlField field;
  field.duration = 4.0;
  field.carrier = qpath::Carrier::sine;
  field.modes = {{1.0, 0.3, 0.4}, {1.2, 0.25, 1.1}};
  return field;
}

/// Classical RK4 on dpsi/dt = -i (H0 - mu eps(t)) psi, fixed step.
inline qpath::ComplexMatrix rk4_propagator(const qpath::QuantumSystem& system, const qpath::ControlField& field,
                                           int steps) {
  using namespace qpath;
  const auto n = system.energies.size();
  const double dt = field.duration / steps;
  auto rhs = [&](double t, const ComplexMatrix& u) -> ComplexMatrix {
    ComplexMatrix h = -field_value(field, t) * system.dipole.cast<complex>();
    for (Eigen::Index p = 0; p < n; ++p)
      h(p, p) += system.energies[p];
    return -I * (h * u);
  };
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const ComplexMatrix k1 = rhs(t, u);
    const ComplexMatrix k2 = rhs(t + dt / 2, u + dt / 2 * k1);
    const ComplexMatrix k3 = rhs(t + dt / 2, u + dt / 2 * k2);
    const ComplexMatrix k4 = rhs(t + dt, u + dt * k3);
    u += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

} // namespace testing_support
