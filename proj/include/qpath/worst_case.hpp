#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "field.hpp"
#include "moments.hpp"
#include "propagator.hpp"
#include "system.hpp"

namespace qpath {

/// U(T) and dU(T)/dtheta_k for the dipole parameterization
/// theta_k = mu_pq, X_k = |p><q| + |q><p|.
struct DipoleSensitivity {
  std::vector<DipolePair> pairs;
  ComplexMatrix propagator;
  std::vector<ComplexMatrix> derivatives;
};

/// Co-propagates [U; V_1; ...; V_K] with V_k' = G V_k + (dG/dtheta_k) U on every
/// exponential factor of the stepping scheme, so the V_k are the exact
/// derivatives of the discrete propagator.
inline DipoleSensitivity dipole_sensitivity(const QuantumSystem& system, const ControlField& field,
                                            const PropagationSettings& settings,
                                            std::vector<DipolePair> pairs = {}) {
  detail::validate_inputs(system, field, settings);
  const int n = system.dimension();
  if (pairs.empty())
    pairs = all_dipole_pairs(n);
  const int k_count = static_cast<int>(pairs.size());
  const int rows = n * (1 + k_count);
  using Dyn = detail::SquareMatrix<Eigen::Dynamic>;
  using Blk = detail::Block<Eigen::Dynamic, Eigen::Dynamic>;
  const ComplexMatrix coupling = system.dipole.cast<complex>();
  Blk x = Blk::Zero(rows, n);
  x.topRows(n).setIdentity();
  Blk term = x;
  Blk acc = x;
  Dyn g = Dyn::Zero(rows, rows);
  const auto complex_field = to_complex(field);
  detail::visit_stages(complex_field, settings, [&](const detail::Stage& stage) {
    const detail::SquareMatrix<Eigen::Dynamic> block =
        detail::stage_generator<Eigen::Dynamic>(system.energies, coupling, stage);
    for (int b = 0; b <= k_count; ++b)
      g.block(b * n, b * n, n, n) = block;
    for (int k = 0; k < k_count; ++k) {
      const auto [p, q] = pairs[static_cast<std::size_t>(k)];
      auto d = g.block((k + 1) * n, 0, n, n);
      d(p, q) = I * stage.coupling;
      d(q, p) = I * stage.coupling;
    }
    detail::apply_exponential<Eigen::Dynamic, Eigen::Dynamic>(g, x, term, acc);
  });
  detail::require_finite(x, "dipole_sensitivity");
  DipoleSensitivity out;
  out.pairs = std::move(pairs);
  out.propagator = x.topRows(n);
  for (int k = 0; k < k_count; ++k)
    out.derivatives.push_back(x.middleRows((k + 1) * n, n));
  return out;
}

struct DipoleGradient {
  std::vector<DipolePair> pairs;
  double value = 0.0;
  RealVector gradient;
  /// Largest |Im| discarded from i Tr([rho_i, O] W_k).
  double imaginary_residue = 0.0;
};

/// Gradient of J = P_ji with respect to all dipole pairs p < q (or the given
/// pairs): dJ/dtheta_k = i Tr([rho_i, O] W_k), O = U^dag |j><j| U,
/// W_k = -i U^dag dU/dtheta_k.
inline DipoleGradient gradient_dipole(const QuantumSystem& system, const ControlField& field, int initial, int target,
                                      const PropagationSettings& settings, std::vector<DipolePair> pairs = {},
                                      double residue_tolerance = 1e-8) {
  const int n = system.dimension();
  if (initial < 0 || initial >= n || target < 0 || target >= n)
    throw InvalidArgument("transition indices out of range");
  const auto sens = dipole_sensitivity(system, field, settings, std::move(pairs));
  const ComplexMatrix& u = sens.propagator;
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  rho(initial, initial) = 1.0;
  ComplexMatrix projector = ComplexMatrix::Zero(n, n);
  projector(target, target) = 1.0;
  const ComplexMatrix observable = u.adjoint() * projector * u;
  const ComplexMatrix commutator = rho * observable - observable * rho;
  DipoleGradient out;
  out.pairs = sens.pairs;
  out.value = std::norm(u(target, initial));
  out.gradient = RealVector::Zero(static_cast<Eigen::Index>(sens.pairs.size()));
  for (std::size_t k = 0; k < sens.pairs.size(); ++k) {
    const ComplexMatrix w = -I * (u.adjoint() * sens.derivatives[k]);
    const complex component = I * (commutator * w).trace();
    out.gradient(static_cast<Eigen::Index>(k)) = component.real();
    out.imaginary_residue = std::max(out.imaginary_residue, std::abs(component.imag()));
  }
  if (out.imaginary_residue > residue_tolerance)
    throw NumericalError("gradient has imaginary residue " + std::to_string(out.imaginary_residue));
  return out;
}

/// chi^2_K quantile at probability c: 2 P^{-1}(K/2, c).
inline double chi_square_quantile(int dof, double confidence) {
  if (dof < 1)
    throw InvalidArgument("chi-square quantile needs at least one degree of freedom");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidArgument("confidence must lie in (0, 1)");
  return 2.0 * boost::math::gamma_p_inv(0.5 * dof, confidence);
}

struct ParameterCovariance {
  RealMatrix matrix;

  int dimension() const { return static_cast<int>(matrix.rows()); }

  void validate() const {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols())
      throw InvalidArgument("covariance must be a nonempty square matrix");
    if (!matrix.allFinite())
      throw InvalidArgument("covariance has non-finite entries");
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, matrix.cwiseAbs().maxCoeff()))
      throw InvalidArgument("covariance must be symmetric");
    const Eigen::SelfAdjointEigenSolver<RealMatrix> solver(matrix, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-12)
      throw InvalidArgument("covariance must be positive semidefinite");
  }

  static ParameterCovariance diagonal(const std::vector<double>& sigmas) {
    RealVector variances(static_cast<Eigen::Index>(sigmas.size()));
    for (std::size_t k = 0; k < sigmas.size(); ++k)
      variances(static_cast<Eigen::Index>(k)) = sigmas[k] * sigmas[k];
    return {variances.asDiagonal()};
  }

  /// Symmetric square root Q with Q Q = Sigma.
  RealMatrix square_root() const {
    const Eigen::SelfAdjointEigenSolver<RealMatrix> solver(matrix);
    const RealVector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
  }
};

/// {dtheta : dtheta^T Sigma^-1 dtheta <= chi^2_K(c)}
struct ConfidenceEllipsoid {
  ParameterCovariance covariance;
  double confidence = 0.95;
  double quantile = 0.0;

  static ConfidenceEllipsoid make(ParameterCovariance covariance, double confidence) {
    covariance.validate();
    ConfidenceEllipsoid out{std::move(covariance), confidence, 0.0};
    out.quantile = chi_square_quantile(out.covariance.dimension(), confidence);
    return out;
  }

  /// dtheta^T Sigma^-1 dtheta; infinite if dtheta leaves the range of a
  /// singular Sigma.
  double mahalanobis_squared(const RealVector& delta) const {
    if (delta.size() != covariance.matrix.rows())
      throw InvalidArgument("deviation length does not match the covariance");
    const Eigen::LDLT<RealMatrix> ldlt(covariance.matrix);
    const RealVector solved = ldlt.solve(delta);
    if ((covariance.matrix * solved - delta).norm() > 1e-9 * std::max(1.0, delta.norm()))
      return std::numeric_limits<double>::infinity();
    return delta.dot(solved);
  }

  bool contains(const RealVector& delta, double tolerance = 1e-10) const {
    return mahalanobis_squared(delta) <= quantile * (1.0 + tolerance);
  }
};

/// sqrt(grad^T Sigma grad) = sqrt(Tr[Sigma grad grad^T])
inline double linearized_sigma_J(const RealVector& gradient, const ParameterCovariance& covariance) {
  if (gradient.size() != covariance.matrix.rows())
    throw InvalidArgument("gradient length does not match the covariance");
  const double quadratic = gradient.dot(covariance.matrix * gradient);
  if (quadratic < -1e-12)
    throw NumericalError("negative quadratic form grad^T Sigma grad");
  return std::sqrt(std::max(quadratic, 0.0));
}

struct WorstCaseDeviation {
  RealVector delta;
  double magnitude = 0.0;
  bool degenerate = false;
};

/// Maximizer of |grad^T dtheta| over the ellipsoid, J-decreasing sign. With
/// dtheta = sqrt(chi^2) Q x and ||x|| <= 1 the objective is a Rayleigh quotient
/// in x, maximized by x = Q grad / ||Q grad||.
inline WorstCaseDeviation worst_case_deviation(const RealVector& gradient, const ConfidenceEllipsoid& ellipsoid) {
  if (gradient.size() != ellipsoid.covariance.matrix.rows())
    throw InvalidArgument("gradient length does not match the covariance");
  WorstCaseDeviation out;
  out.delta = RealVector::Zero(gradient.size());
  const RealMatrix q = ellipsoid.covariance.square_root();
  const RealVector qg = q * gradient;
  const double norm = qg.norm();
  if (!(norm > 1e-300)) {
    out.degenerate = true;
    return out;
  }
  const double radius = std::sqrt(ellipsoid.quantile);
  out.delta = -radius * (q * qg) / norm;
  out.magnitude = radius * norm;
  return out;
}

struct WorstCaseReport {
  int initial = 0;
  int target = 0;
  std::vector<DipolePair> pairs;
  double value = 0.0;
  RealVector gradient;
  double sigma_J = 0.0;
  double confidence = 0.95;
  double quantile = 0.0;
  WorstCaseDeviation deviation;
  /// J + grad^T dtheta_wc (first order)
  double ellipsoid_value = 0.0;
  /// J(theta + dtheta_wc) by propagation
  double perturbed_value = 0.0;
  /// J - sqrt(2) sigma_J erfinv(c)
  double distributional_value = 0.0;
  double imaginary_residue = 0.0;
};

inline WorstCaseReport analyze_worst_case(const QuantumSystem& system, const ControlField& field, int initial,
                                          int target, const ParameterCovariance& covariance, double confidence,
                                          const PropagationSettings& settings, std::vector<DipolePair> pairs = {}) {
  const auto grad = gradient_dipole(system, field, initial, target, settings, std::move(pairs));
  const auto ellipsoid = ConfidenceEllipsoid::make(covariance, confidence);
  if (ellipsoid.covariance.dimension() != grad.gradient.size())
    throw InvalidArgument("covariance is " + std::to_string(ellipsoid.covariance.dimension()) +
                          "-dimensional but there are " + std::to_string(grad.gradient.size()) + " dipole parameters");
  WorstCaseReport out;
  out.initial = initial;
  out.target = target;
  out.pairs = grad.pairs;
  out.value = grad.value;
  out.gradient = grad.gradient;
  out.imaginary_residue = grad.imaginary_residue;
  out.sigma_J = linearized_sigma_J(grad.gradient, ellipsoid.covariance);
  out.confidence = confidence;
  out.quantile = ellipsoid.quantile;
  out.deviation = worst_case_deviation(grad.gradient, ellipsoid);
  out.ellipsoid_value = out.value + grad.gradient.dot(out.deviation.delta);
  std::vector<double> perturbed(grad.pairs.size());
  for (std::size_t k = 0; k < grad.pairs.size(); ++k)
    perturbed[k] = system.dipole(grad.pairs[k].p, grad.pairs[k].q) + out.deviation.delta(static_cast<Eigen::Index>(k));
  out.perturbed_value = transition_probability(
      propagate(with_dipole_values(system, grad.pairs, perturbed), field, settings), initial, target);
  out.distributional_value = distributional_worst_case(out.value, out.sigma_J, confidence);
  return out;
}

} // namespace qpath
