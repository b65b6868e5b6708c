#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "field.hpp"
#include "system.hpp"

namespace qpath {

/// Piecewise-constant-generator exponential steppers.
///
/// `midpoint` samples the field once per step (second order).
/// `magnus4` is the fourth-order commutator-free Magnus scheme: two
/// exponentials per step built from the two Gauss-Legendre field samples.
/// Both keep the step map exactly exponential, so a Hermitian generator gives
/// a unitary step and the encoded (complex) generators reuse the same code.
enum class StepMethod { midpoint, magnus4 };

inline const char* to_string(StepMethod method) {
  return method == StepMethod::midpoint ? "midpoint" : "magnus4";
}

struct PropagationSettings {
  int steps = 2000;
  StepMethod method = StepMethod::magnus4;

  void validate() const {
    if (steps < 1)
      throw InvalidArgument("propagation needs at least one step");
  }

  friend bool operator==(const PropagationSettings&, const PropagationSettings&) = default;
};

/// Per-order propagators U^0(T)..U^M(T) in the Schroedinger picture.
struct DysonDecomposition {
  std::vector<ComplexMatrix> orders;

  int max_order() const { return static_cast<int>(orders.size()) - 1; }

  ComplexMatrix sum() const {
    ComplexMatrix total = ComplexMatrix::Zero(orders.front().rows(), orders.front().cols());
    for (const auto& order : orders)
      total += order;
    return total;
  }
};

namespace detail {

template <int D>
using SquareMatrix = Eigen::Matrix<complex, D, D>;

template <int D, int Cols>
using Block = Eigen::Matrix<complex, D, Cols>;

/// Calls fn with a compile-time dimension for small systems, Eigen::Dynamic otherwise.
template <typename Fn>
decltype(auto) with_dimension(int n, Fn&& fn) {
  switch (n) {
  case 2:
    return fn(std::integral_constant<int, 2>{});
  case 3:
    return fn(std::integral_constant<int, 3>{});
  case 4:
    return fn(std::integral_constant<int, 4>{});
  case 5:
    return fn(std::integral_constant<int, 5>{});
  case 6:
    return fn(std::integral_constant<int, 6>{});
  default:
    return fn(std::integral_constant<int, Eigen::Dynamic>{});
  }
}

/// One exponential factor exp(-i (h0 H0 - c C)), with H0 = diag(E) and C the
/// coupling matrix.
struct Stage {
  double h0 = 0.0;
  complex coupling{};
};

/// Visits the exponential factors of every step in application order.
template <typename Scalar, typename Visitor>
void visit_stages(const BasicControlField<Scalar>& field, const PropagationSettings& settings,
                  Visitor&& visit) {
  const double h = field.duration / settings.steps;
  const double offset = std::sqrt(3.0) / 6.0;
  const double w_small = 0.25 - offset;
  const double w_large = 0.25 + offset;
  for (int n = 0; n < settings.steps; ++n) {
    const double t = n * h;
    if (settings.method == StepMethod::midpoint) {
      visit(Stage{h, h * complex(field_value(field, t + 0.5 * h))});
    } else {
      const complex early = field_value(field, t + (0.5 - offset) * h);
      const complex late = field_value(field, t + (0.5 + offset) * h);
      visit(Stage{0.5 * h, h * (w_large * early + w_small * late)});
      visit(Stage{0.5 * h, h * (w_small * early + w_large * late)});
    }
  }
}

template <typename Matrix>
double norm1(const Matrix& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

/// Number of Taylor terms so that theta^q / q! < 1e-17.
inline int taylor_order(double theta) {
  double term = 1.0;
  int q = 0;
  while (term > 1e-17 && q < 60) {
    ++q;
    term *= theta / q;
  }
  return q;
}

/// Splits exp(G) into `substeps` factors with ||G|| / substeps <= 1/2.
inline int substep_count(double theta) {
  return theta > 0.5 ? static_cast<int>(std::ceil(theta / 0.5)) : 1;
}

template <int D>
SquareMatrix<D> stage_generator(const RealVector& energies, const SquareMatrix<D>& coupling,
                                const Stage& stage) {
  SquareMatrix<D> g = (I * stage.coupling) * coupling;
  for (Eigen::Index p = 0; p < g.rows(); ++p)
    g(p, p) -= I * stage.h0 * energies[p];
  return g;
}

/// x <- exp(G) x by scaled Taylor series.
template <int D, int Cols>
void apply_exponential(const SquareMatrix<D>& g, Block<D, Cols>& x, Block<D, Cols>& term,
                       Block<D, Cols>& acc) {
  const double theta = norm1(g);
  const int substeps = substep_count(theta);
  const int q = taylor_order(theta / substeps);
  const SquareMatrix<D> scaled = substeps == 1 ? g : SquareMatrix<D>(g / double(substeps));
  for (int s = 0; s < substeps; ++s) {
    term = x;
    acc = x;
    for (int k = 1; k <= q; ++k) {
      term = (scaled * term) / double(k);
      acc += term;
    }
    x = acc;
  }
}

template <int D, typename Scalar>
SquareMatrix<D> fixed_coupling(const BasicQuantumSystem<Scalar>& system) {
  return system.dipole.template cast<complex>();
}

template <typename Matrix>
void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw NumericalError(std::string(what) + ": non-finite propagator entries (integration blow-up)");
}

template <int D, int Cols, typename Scalar, typename FieldScalar>
Block<D, Cols> propagate_block(const BasicQuantumSystem<Scalar>& system,
                               const BasicControlField<FieldScalar>& field,
                               const PropagationSettings& settings, Block<D, Cols> x) {
  const SquareMatrix<D> coupling = fixed_coupling<D>(system);
  Block<D, Cols> term = x;
  Block<D, Cols> acc = x;
  visit_stages(field, settings, [&](const Stage& stage) {
    const SquareMatrix<D> g = stage_generator<D>(system.energies, coupling, stage);
    apply_exponential<D, Cols>(g, x, term, acc);
  });
  return x;
}

template <typename Scalar, typename FieldScalar>
void validate_inputs(const BasicQuantumSystem<Scalar>& system, const BasicControlField<FieldScalar>& field,
                     const PropagationSettings& settings) {
  system.validate();
  field.validate();
  settings.validate();
}

} // namespace detail

/// U(T) for dU/dt = -i (H0 - C eps(t)) U, U(0) = I, with complex couplings
/// and/or complex amplitudes allowed. The result is in general not unitary.
template <typename Scalar, typename FieldScalar>
ComplexMatrix propagate_generalized(const BasicQuantumSystem<Scalar>& system,
                                    const BasicControlField<FieldScalar>& field,
                                    const PropagationSettings& settings) {
  detail::validate_inputs(system, field, settings);
  const int n = system.dimension();
  ComplexMatrix u = detail::with_dimension(n, [&](auto dim) -> ComplexMatrix {
    constexpr int D = decltype(dim)::value;
    using B = detail::Block<D, D>;
    return detail::propagate_block<D, D>(system, field, settings, B(B::Identity(n, n)));
  });
  detail::require_finite(u, "propagate");
  return u;
}

/// Schroedinger-picture propagator U(T) of a real system under a real field.
/// Same arithmetic path as propagate_generalized, so an encoding at s = 0
/// reproduces it exactly.
inline ComplexMatrix propagate(const QuantumSystem& system, const ControlField& field,
                               const PropagationSettings& settings) {
  return propagate_generalized(to_complex(system), to_complex(field), settings);
}

/// Column `initial` of U(T), i.e. U(T)|i>. Cheaper than the full propagator
/// when only one initial state matters.
template <typename Scalar, typename FieldScalar>
ComplexVector propagate_state(const BasicQuantumSystem<Scalar>& system,
                              const BasicControlField<FieldScalar>& field,
                              const PropagationSettings& settings, int initial) {
  detail::validate_inputs(system, field, settings);
  const int n = system.dimension();
  if (initial < 0 || initial >= n)
    throw InvalidArgument("initial state index out of range");
  ComplexVector psi = detail::with_dimension(n, [&](auto dim) -> ComplexVector {
    constexpr int D = decltype(dim)::value;
    using B = detail::Block<D, 1>;
    B start = B::Zero(n, 1);
    start(initial) = 1.0;
    return detail::propagate_block<D, 1>(system, field, settings, start);
  });
  detail::require_finite(psi, "propagate_state");
  return psi;
}

/// Population trajectory |<j|U(t_n)|i>|^2 at every step boundary t_n = n T / steps.
inline std::vector<double> population_trajectory(const QuantumSystem& system, const ControlField& field,
                                                 const PropagationSettings& settings, int initial,
                                                 int target) {
  detail::validate_inputs(system, field, settings);
  const int n = system.dimension();
  if (initial < 0 || initial >= n || target < 0 || target >= n)
    throw InvalidArgument("state index out of range");
  const ComplexMatrix coupling = system.dipole.cast<complex>();
  ComplexVector psi = ComplexVector::Zero(n);
  psi(initial) = 1.0;
  ComplexVector term = psi, acc = psi;
  std::vector<double> trajectory{std::norm(psi(target))};
  const int stages_per_step = settings.method == StepMethod::magnus4 ? 2 : 1;
  int stage_count = 0;
  detail::visit_stages(to_complex(field), settings, [&](const detail::Stage& stage) {
    const ComplexMatrix g = detail::stage_generator<Eigen::Dynamic>(system.energies, coupling, stage);
    detail::apply_exponential<Eigen::Dynamic, 1>(g, psi, term, acc);
    if (++stage_count % stages_per_step == 0)
      trajectory.push_back(std::norm(psi(target)));
  });
  return trajectory;
}

/// U_I(T) = e^{i H0 T} U(T). Element-wise moduli are unchanged.
inline ComplexMatrix to_interaction_picture(const RealVector& energies, const ComplexMatrix& u, double duration) {
  ComplexMatrix out = u;
  for (Eigen::Index j = 0; j < out.rows(); ++j)
    out.row(j) *= std::exp(I * energies[j] * duration);
  return out;
}

/// Phase e^{i E_j T} that maps a Schroedinger-picture element U_ji onto the
/// interaction-picture element.
inline complex interaction_phase(const RealVector& energies, int target, double duration) {
  return std::exp(I * energies[target] * duration);
}

/// Free evolution diag(e^{-i E_n T}).
inline ComplexMatrix free_propagator(const RealVector& energies, double duration) {
  ComplexMatrix u = ComplexMatrix::Zero(energies.size(), energies.size());
  for (Eigen::Index p = 0; p < energies.size(); ++p)
    u(p, p) = std::exp(-I * energies[p] * duration);
  return u;
}

/// Order-by-order Dyson terms by co-propagating the hierarchy
/// dU^m/dt = -i H0 U^m + i mu eps(t) U^{m-1}, U^0(0) = I, U^{m>0}(0) = 0,
/// with the same exponential steps as `propagate` (each step's exponential is
/// expanded exactly in powers of the coupling). Sum over all orders is the
/// discrete propagator itself.
inline DysonDecomposition dyson_decompose(const QuantumSystem& system, const ControlField& field, int max_order,
                                          const PropagationSettings& settings) {
  if (max_order < 0)
    throw InvalidArgument("maximum Dyson order must be non-negative");
  detail::validate_inputs(system, field, settings);
  const int n = system.dimension();
  const auto complex_field = to_complex(field);
  return detail::with_dimension(n, [&](auto dim) -> DysonDecomposition {
    constexpr int D = decltype(dim)::value;
    using M = detail::SquareMatrix<D>;
    const M coupling = system.dipole.cast<complex>();
    const std::size_t count = static_cast<std::size_t>(max_order) + 1;
    std::vector<M> x(count, M::Zero(n, n)), term(count, M::Zero(n, n)), acc(count, M::Zero(n, n));
    x[0] = M::Identity(n, n);
    Eigen::Matrix<complex, D, 1> diag(n);
    detail::visit_stages(complex_field, settings, [&](const detail::Stage& stage) {
      for (int p = 0; p < n; ++p)
        diag(p) = -I * stage.h0 * system.energies[p];
      const M b = (I * stage.coupling) * coupling;
      const double theta = diag.cwiseAbs().maxCoeff() + detail::norm1(b);
      const int substeps = detail::substep_count(theta);
      const int q = detail::taylor_order(theta / substeps);
      const double scale = 1.0 / substeps;
      for (int s = 0; s < substeps; ++s) {
        for (std::size_t m = 0; m < count; ++m)
          term[m] = acc[m] = x[m];
        for (int k = 1; k <= q; ++k) {
          const double factor = scale / k;
          for (std::size_t m = count; m-- > 0;) {
            M next = diag.asDiagonal() * term[m];
            if (m > 0)
              next += b * term[m - 1];
            term[m] = next * factor;
            acc[m] += term[m];
          }
        }
        for (std::size_t m = 0; m < count; ++m)
          x[m] = acc[m];
      }
    });
    DysonDecomposition out;
    for (auto& order : x) {
      detail::require_finite(order, "dyson_decompose");
      out.orders.emplace_back(order);
    }
    return out;
  });
}

/// P_ji = |U_ji|^2 (zero-based indices: `initial` = i, `target` = j).
inline double transition_probability(const ComplexMatrix& u, int initial, int target) {
  if (initial < 0 || target < 0 || initial >= u.cols() || target >= u.rows())
    throw InvalidArgument("state index out of range");
  return std::norm(u(target, initial));
}

/// max |(U^dagger U - I)_pq|.
inline double unitarity_error(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

/// Largest entry-wise change of U(T) when the step count is doubled.
inline double step_doubling_change(const QuantumSystem& system, const ControlField& field,
                                   const PropagationSettings& settings) {
  PropagationSettings doubled = settings;
  doubled.steps *= 2;
  return (propagate(system, field, settings) - propagate(system, field, doubled)).cwiseAbs().maxCoeff();
}

} // namespace qpath
