#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace qpath {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr complex I{0.0, 1.0};

/// Unordered pair of levels (p < q, zero-based) addressing one independent
/// dipole element.
struct DipolePair {
  int p = 0;
  int q = 0;

  friend bool operator==(const DipolePair&, const DipolePair&) = default;

  /// One-based label, e.g. "mu12".
  std::string label() const { return "mu" + std::to_string(p + 1) + std::to_string(q + 1); }
};

/// H(t) = diag(E) - mu * eps(t) with hbar = 1.
///
/// `Scalar` is `double` for physical systems. The encoder instantiates it with
/// `std::complex<double>` to carry Fourier-encoded couplings mu_pq e^{i gamma s};
/// such a coupling is complex symmetric but not Hermitian.
template <typename Scalar>
struct BasicQuantumSystem {
  using CouplingMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  RealVector energies;
  CouplingMatrix dipole;

  int dimension() const { return static_cast<int>(energies.size()); }

  void validate() const {
    const auto n = energies.size();
    if (n < 2)
      throw InvalidArgument("quantum system needs at least two levels");
    if (dipole.rows() != n || dipole.cols() != n)
      throw InvalidArgument("dipole matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    for (Eigen::Index p = 0; p < n; ++p) {
      if (!std::isfinite(energies[p]))
        throw InvalidArgument("energies must be finite");
      if (dipole(p, p) != Scalar(0))
        throw InvalidArgument("dipole diagonal must be zero (level " + std::to_string(p + 1) + ")");
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (dipole(p, q) != dipole(q, p))
          throw InvalidArgument("dipole matrix must be symmetric (mu" + std::to_string(p + 1) +
                                std::to_string(q + 1) + " != mu" + std::to_string(q + 1) +
                                std::to_string(p + 1) + ")");
        if (!std::isfinite(std::abs(dipole(p, q))))
          throw InvalidArgument("dipole entries must be finite");
      }
    }
  }
};

using QuantumSystem = BasicQuantumSystem<double>;
using EncodedSystem = BasicQuantumSystem<complex>;

/// Every independent element p < q, in row-major order: (1,2), (1,3), ..., (N-1,N).
inline std::vector<DipolePair> all_dipole_pairs(int dimension) {
  std::vector<DipolePair> pairs;
  for (int p = 0; p < dimension; ++p)
    for (int q = p + 1; q < dimension; ++q)
      pairs.push_back({p, q});
  return pairs;
}

/// Independent elements with mu_pq != 0, same ordering as all_dipole_pairs.
inline std::vector<DipolePair> nonzero_dipole_pairs(const QuantumSystem& system) {
  std::vector<DipolePair> pairs;
  for (const auto& pair : all_dipole_pairs(system.dimension()))
    if (system.dipole(pair.p, pair.q) != 0.0)
      pairs.push_back(pair);
  return pairs;
}

/// Copy of `system` with the listed independent elements replaced (symmetrically).
inline QuantumSystem with_dipole_values(QuantumSystem system, const std::vector<DipolePair>& pairs,
                                        const std::vector<double>& values) {
  if (pairs.size() != values.size())
    throw InvalidArgument("dipole pair/value count mismatch");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    system.dipole(pairs[k].p, pairs[k].q) = values[k];
    system.dipole(pairs[k].q, pairs[k].p) = values[k];
  }
  return system;
}

/// Four-level benchmark: H0 = diag(0, 1, 1.5, 2), mu12 = 2, mu13 = 1, mu24 = 2.
inline QuantumSystem four_level_system() {
  QuantumSystem system;
  system.energies = RealVector{{0.0, 1.0, 1.5, 2.0}};
  system.dipole = RealMatrix::Zero(4, 4);
  system.dipole(0, 1) = system.dipole(1, 0) = 2.0;
  system.dipole(0, 2) = system.dipole(2, 0) = 1.0;
  system.dipole(1, 3) = system.dipole(3, 1) = 2.0;
  return system;
}

} // namespace qpath
