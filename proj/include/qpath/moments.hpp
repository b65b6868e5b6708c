#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "encoding.hpp"
#include "errors.hpp"
#include "field.hpp"
#include "pathways.hpp"
#include "system.hpp"

namespace qpath {

/// E[x^power] for x ~ Normal(mean, sigma^2):
/// sum over even i of C(power, i) (i-1)!! sigma^i mean^(power-i).
inline double gaussian_raw_moment(double mean, double sigma, int power) {
  if (power < 0)
    throw InvalidArgument("raw moment power must be nonnegative");
  if (sigma < 0.0 || !std::isfinite(sigma) || !std::isfinite(mean))
    throw InvalidArgument("raw moment needs finite mean and sigma >= 0");
  double sum = 0.0;
  double binomial = 1.0;      // C(power, i)
  double double_factorial = 1.0; // (i-1)!!
  for (int i = 0; i <= power; i += 2) {
    sum += binomial * double_factorial * std::pow(sigma, i) * std::pow(mean, power - i);
    binomial *= static_cast<double>(power - i) * static_cast<double>(power - i - 1) /
                (static_cast<double>(i + 1) * static_cast<double>(i + 2));
    double_factorial *= static_cast<double>(i + 1);
  }
  return sum;
}

/// Independent Gaussian uncertainty on the pathway parameters.
struct UncertaintyModel {
  PathwayKind kind = PathwayKind::amplitude;
  std::vector<double> means;
  /// Absolute standard deviations.
  std::vector<double> sigmas;
  /// Dipole kind: the uncertain pairs, in encoding order.
  std::vector<DipolePair> pairs;

  std::size_t parameter_count() const { return means.size(); }

  void validate() const {
    if (means.empty())
      throw InvalidArgument("uncertainty model has no parameters");
    if (means.size() != sigmas.size())
      throw InvalidArgument("uncertainty model: means and sigmas differ in length");
    for (std::size_t k = 0; k < means.size(); ++k)
      if (!std::isfinite(means[k]) || !std::isfinite(sigmas[k]) || sigmas[k] < 0.0)
        throw InvalidArgument("uncertainty model: parameter " + std::to_string(k + 1) +
                              " needs a finite mean and sigma >= 0");
    if (kind == PathwayKind::dipole && pairs.size() != means.size())
      throw InvalidArgument("dipole uncertainty model needs one pair per parameter");
  }
};

/// Amplitude uncertainty with mean A_k and sigma_k = scale * |A_k| (relative)
/// or sigma_k = scale (absolute).
inline UncertaintyModel amplitude_uncertainty(const ControlField& field, double scale, bool relative) {
  UncertaintyModel model;
  model.kind = PathwayKind::amplitude;
  for (const auto& mode : field.modes) {
    model.means.push_back(mode.amplitude);
    model.sigmas.push_back(relative ? scale * std::abs(mode.amplitude) : scale);
  }
  model.validate();
  return model;
}

/// Dipole uncertainty over the nonzero pairs p < q.
inline UncertaintyModel dipole_uncertainty(const QuantumSystem& system, double scale, bool relative) {
  UncertaintyModel model;
  model.kind = PathwayKind::dipole;
  model.pairs = nonzero_dipole_pairs(system);
  for (const auto& pair : model.pairs) {
    const double mu = system.dipole(pair.p, pair.q);
    model.means.push_back(mu);
    model.sigmas.push_back(relative ? scale * std::abs(mu) : scale);
  }
  model.validate();
  return model;
}

/// E[x_k^p] for every parameter k and 0 <= p <= max_power; immutable once built.
class RawMomentTable {
public:
  RawMomentTable(const UncertaintyModel& model, int max_power)
      : count_(model.parameter_count()), stride_(static_cast<std::size_t>(max_power) + 1),
        values_(count_ * stride_) {
    model.validate();
    for (std::size_t k = 0; k < count_; ++k)
      for (std::size_t p = 0; p < stride_; ++p)
        values_[k * stride_ + p] = gaussian_raw_moment(model.means[k], model.sigmas[k], static_cast<int>(p));
  }

  int max_power() const { return static_cast<int>(stride_) - 1; }

  double operator()(std::size_t parameter, int power) const {
    if (parameter >= count_ || power < 0 || power > max_power())
      throw InvalidArgument("raw moment lookup out of range");
    return values_[parameter * stride_ + static_cast<std::size_t>(power)];
  }

  /// prod_k E[x_k^{alpha_k}]
  double product(const std::vector<int>& alpha) const {
    double out = 1.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      out *= (*this)(k, alpha[k]);
    return out;
  }

  /// prod_k E[x_k^{alpha_k + beta_k}]
  double product(const std::vector<int>& alpha, const std::vector<int>& beta) const {
    double out = 1.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      out *= (*this)(k, alpha[k] + beta[k]);
    return out;
  }

private:
  std::size_t count_;
  std::size_t stride_;
  std::vector<double> values_;
};

namespace detail {

inline void check_model(const PathwayTable& table, const UncertaintyModel& model) {
  model.validate();
  if (model.kind != table.kind)
    throw InvalidArgument(std::string("uncertainty model kind ") + to_string(model.kind) +
                          " does not match pathway table kind " + to_string(table.kind));
  if (model.parameter_count() != table.parameter_count())
    throw InvalidArgument("uncertainty model has " + std::to_string(model.parameter_count()) +
                          " parameters, pathway table has " + std::to_string(table.parameter_count()));
  if (model.kind == PathwayKind::dipole && model.pairs != table.pairs)
    throw InvalidArgument("dipole uncertainty pairs differ from the pathway table's encoded pairs");
}

} // namespace detail

/// Visit every unordered pair of distinct entries exactly once as
/// (lesser, greater) under pathway_compare.
template <typename Visitor>
void for_each_ordered_pair(const std::vector<PathwayEntry>& entries, Visitor&& visit) {
  for (std::size_t a = 0; a < entries.size(); ++a)
    for (std::size_t b = a + 1; b < entries.size(); ++b) {
      if (pathway_compare(entries[a].index.exponents, entries[b].index.exponents) < 0)
        visit(entries[a], entries[b]);
      else
        visit(entries[b], entries[a]);
    }
}

/// c_alpha prod_k E[x_k^{alpha_k}]
inline complex expected_pathway(const PathwayEntry& entry, const RawMomentTable& moments) {
  return entry.normalized * moments.product(entry.index.exponents);
}

inline complex expected_pathway(const PathwayEntry& entry, const UncertaintyModel& model) {
  int top = 0;
  for (int a : entry.index.exponents)
    top = std::max(top, a);
  return expected_pathway(entry, RawMomentTable(model, top));
}

/// E[U_ji] = free term + sum of expected pathways.
inline complex expected_transition_amplitude(const PathwayTable& table, const UncertaintyModel& model) {
  detail::check_model(table, model);
  const RawMomentTable moments(model, table.max_order());
  complex sum = table.free_term;
  for (const auto& entry : table.entries)
    sum += expected_pathway(entry, moments);
  return sum;
}

/// E[U^m] for m = 0..M.
inline std::vector<complex> expected_order_terms(const PathwayTable& table, const UncertaintyModel& model) {
  detail::check_model(table, model);
  const RawMomentTable moments(model, table.max_order());
  std::vector<complex> out(static_cast<std::size_t>(table.max_order()) + 1);
  out[0] = table.free_term;
  for (const auto& entry : table.entries)
    out[static_cast<std::size_t>(entry.order())] += expected_pathway(entry, moments);
  return out;
}

/// E[P] = E[|free + sum_alpha c_alpha x^alpha|^2] with each unordered pair once.
inline double expected_transition_probability(const PathwayTable& table, const UncertaintyModel& model) {
  detail::check_model(table, model);
  const RawMomentTable moments(model, 2 * table.max_order());
  double sum = std::norm(table.free_term);
  for (const auto& entry : table.entries) {
    sum += 2.0 * std::real(std::conj(table.free_term) * expected_pathway(entry, moments));
    sum += std::norm(entry.normalized) * moments.product(entry.index.exponents, entry.index.exponents);
  }
  for_each_ordered_pair(table.entries, [&](const PathwayEntry& lesser, const PathwayEntry& greater) {
    sum += 2.0 * std::real(lesser.normalized * std::conj(greater.normalized)) *
           moments.product(lesser.index.exponents, greater.index.exponents);
  });
  return sum;
}

/// Order-resolved decomposition of E[P]: same_order[m] = E[|U^m|^2] and
/// cross(m', m) = 2 E[Re{U^m (U^{m'})^*}] for m' < m (zero elsewhere).
struct InterferenceMoments {
  std::vector<double> same_order;
  RealMatrix cross;

  double total_cross() const {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < cross.rows(); ++r)
      for (Eigen::Index c = r + 1; c < cross.cols(); ++c)
        sum += cross(r, c);
    return sum;
  }

  double total_same_order() const {
    double sum = 0.0;
    for (double v : same_order)
      sum += v;
    return sum;
  }

  double total() const { return total_same_order() + total_cross(); }
};

inline InterferenceMoments interference_moments(const PathwayTable& table, const UncertaintyModel& model) {
  detail::check_model(table, model);
  const RawMomentTable moments(model, 2 * table.max_order());
  const auto orders = static_cast<Eigen::Index>(table.max_order()) + 1;
  InterferenceMoments out;
  out.same_order.assign(static_cast<std::size_t>(orders), 0.0);
  out.cross = RealMatrix::Zero(orders, orders);
  auto add = [&](int m1, int m2, double value) {
    if (m1 == m2)
      out.same_order[static_cast<std::size_t>(m1)] += value;
    else
      out.cross(std::min(m1, m2), std::max(m1, m2)) += value;
  };
  out.same_order[0] = std::norm(table.free_term);
  for (const auto& entry : table.entries) {
    add(0, entry.order(), 2.0 * std::real(std::conj(table.free_term) * expected_pathway(entry, moments)));
    add(entry.order(), entry.order(),
        std::norm(entry.normalized) * moments.product(entry.index.exponents, entry.index.exponents));
  }
  for_each_ordered_pair(table.entries, [&](const PathwayEntry& lesser, const PathwayEntry& greater) {
    add(lesser.order(), greater.order(),
        2.0 * std::real(lesser.normalized * std::conj(greater.normalized)) *
            moments.product(lesser.index.exponents, greater.index.exponents));
  });
  return out;
}

struct AmplitudeVariance {
  double real = 0.0;
  double imag = 0.0;
};

namespace detail {

/// var(Re), var(Im) of sum over the selected entries.
template <typename Select>
AmplitudeVariance amplitude_variance(const std::vector<PathwayEntry>& entries, const RawMomentTable& moments,
                                     Select&& select) {
  AmplitudeVariance out;
  double scale = 0.0;
  std::vector<double> first(entries.size());
  for (std::size_t n = 0; n < entries.size(); ++n)
    first[n] = moments.product(entries[n].index.exponents);
  for (std::size_t n = 0; n < entries.size(); ++n) {
    if (!select(entries[n]))
      continue;
    const auto& alpha = entries[n].index.exponents;
    const double second = moments.product(alpha, alpha);
    const complex c = entries[n].normalized;
    out.real += c.real() * c.real() * (second - first[n] * first[n]);
    out.imag += c.imag() * c.imag() * (second - first[n] * first[n]);
    scale += std::norm(c) * second;
  }
  for (std::size_t a = 0; a < entries.size(); ++a) {
    if (!select(entries[a]))
      continue;
    for (std::size_t b = a + 1; b < entries.size(); ++b) {
      if (!select(entries[b]))
        continue;
      const double covariance =
          moments.product(entries[a].index.exponents, entries[b].index.exponents) - first[a] * first[b];
      const complex ca = entries[a].normalized;
      const complex cb = entries[b].normalized;
      out.real += 2.0 * ca.real() * cb.real() * covariance;
      out.imag += 2.0 * ca.imag() * cb.imag() * covariance;
    }
  }
  const double tolerance = 1e-12 + 1e-12 * scale;
  if (out.real < -tolerance || out.imag < -tolerance)
    throw NumericalError("negative amplitude variance (" + std::to_string(out.real) + ", " +
                         std::to_string(out.imag) + "); pathway table or moment ordering is inconsistent");
  return out;
}

} // namespace detail

/// var(Re U_ji), var(Im U_ji); the free term is deterministic and drops out.
inline AmplitudeVariance variance_transition_amplitude(const PathwayTable& table, const UncertaintyModel& model) {
  detail::check_model(table, model);
  const RawMomentTable moments(model, 2 * table.max_order());
  return detail::amplitude_variance(table.entries, moments, [](const PathwayEntry&) { return true; });
}

/// Per-order var(Re U^m), var(Im U^m), m = 0..M.
inline std::vector<AmplitudeVariance> order_variances(const PathwayTable& table, const UncertaintyModel& model) {
  detail::check_model(table, model);
  const RawMomentTable moments(model, 2 * table.max_order());
  std::vector<AmplitudeVariance> out(static_cast<std::size_t>(table.max_order()) + 1);
  for (int m = 1; m <= table.max_order(); ++m) {
    std::vector<PathwayEntry> subset;
    for (const auto& entry : table.entries)
      if (entry.order() == m)
        subset.push_back(entry);
    out[static_cast<std::size_t>(m)] =
        detail::amplitude_variance(subset, moments, [](const PathwayEntry&) { return true; });
  }
  return out;
}

/// J - sqrt(2) sigma_J erfinv(c): lower end of the central c-interval of a Gaussian J.
inline double distributional_worst_case(double value, double sigma, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidArgument("confidence must lie in (0, 1)");
  if (sigma < 0.0)
    throw InvalidArgument("sigma_J must be nonnegative");
  return value - std::sqrt(2.0) * sigma * boost::math::erf_inv(confidence);
}

/// dP/dx_k at the table's nominal parameters, from the pathway polynomial:
/// 2 Re{U^* sum_alpha alpha_k c_alpha x^(alpha - e_k)}.
inline RealVector probability_gradient(const PathwayTable& table) {
  const auto count = table.parameter_count();
  RealVector gradient = RealVector::Zero(static_cast<Eigen::Index>(count));
  const complex u = table.reconstruction();
  for (std::size_t k = 0; k < count; ++k) {
    complex derivative{};
    for (const auto& entry : table.entries) {
      const int power = entry.index.exponents[k];
      if (power == 0)
        continue;
      auto reduced = entry.index.exponents;
      --reduced[k];
      derivative += static_cast<double>(power) * entry.normalized * parameter_monomial(table.parameter_values, reduced);
    }
    gradient(static_cast<Eigen::Index>(k)) = 2.0 * std::real(std::conj(u) * derivative);
  }
  return gradient;
}

struct MomentOptions {
  double confidence = 0.95;
  /// E[P] outside [-band, 1 + band] triggers a truncation warning.
  double probability_band = 0.05;
  /// Warn when the estimated order-(M+1) share of E[P] exceeds this.
  double tail_fraction = 1e-2;
};

struct MomentReport {
  int initial = 0;
  int target = 0;
  PathwayKind kind = PathwayKind::amplitude;
  std::vector<double> sigmas;
  int max_order = 0;
  complex nominal_amplitude{};
  double nominal_probability = 0.0;
  complex expected_amplitude{};
  AmplitudeVariance variance;
  double expected_probability = 0.0;
  std::vector<complex> order_expectations;
  InterferenceMoments interference;
  /// Estimated |E[U^(M+1)]| and its first-order share of E[P].
  double tail_estimate = 0.0;
  double tail_share = 0.0;
  /// Linearized spread of P from the pathway gradient and the model sigmas.
  double sigma_linear = 0.0;
  double confidence = 0.95;
  double worst_case = 0.0;
  std::vector<std::string> warnings;
};

inline MomentReport analyze_moments(const PathwayTable& table, const UncertaintyModel& model,
                                    const MomentOptions& options = {}) {
  detail::check_model(table, model);
  MomentReport report;
  report.initial = table.initial;
  report.target = table.target;
  report.kind = table.kind;
  report.sigmas = model.sigmas;
  report.max_order = table.max_order();
  report.nominal_amplitude = table.reconstruction();
  report.nominal_probability = std::norm(report.nominal_amplitude);
  report.order_expectations = expected_order_terms(table, model);
  for (const auto& term : report.order_expectations)
    report.expected_amplitude += term;
  report.variance = variance_transition_amplitude(table, model);
  report.interference = interference_moments(table, model);
  report.expected_probability = report.interference.total();

  const auto& terms = report.order_expectations;
  const std::size_t last = terms.size() - 1;
  report.tail_estimate = std::abs(terms[last]);
  if (last >= 1)
    report.tail_estimate = std::max(report.tail_estimate, std::abs(terms[last - 1]));
  if (last >= 2 && std::abs(terms[last - 2]) > 0.0) {
    // Geometric extrapolation of the (even/odd) subsequence ending at order M.
    const double ratio = std::abs(terms[last]) / std::abs(terms[last - 2]);
    if (ratio < 1.0)
      report.tail_estimate = std::max(std::abs(terms[last]) * std::sqrt(ratio), std::abs(terms[last - 1]));
  }
  report.tail_share = 2.0 * std::abs(report.expected_amplitude) * report.tail_estimate /
                      std::max(std::abs(report.expected_probability), 1e-300);

  const RealVector gradient = probability_gradient(table);
  double quadratic = 0.0;
  for (Eigen::Index k = 0; k < gradient.size(); ++k)
    quadratic += model.sigmas[static_cast<std::size_t>(k)] * model.sigmas[static_cast<std::size_t>(k)] *
                 gradient(k) * gradient(k);
  report.sigma_linear = std::sqrt(quadratic);
  report.confidence = options.confidence;
  report.worst_case = distributional_worst_case(report.nominal_probability, report.sigma_linear, options.confidence);

  if (report.expected_probability < -options.probability_band ||
      report.expected_probability > 1.0 + options.probability_band)
    report.warnings.push_back("E[P] = " + std::to_string(report.expected_probability) +
                              " outside [0, 1]; truncation order M = " + std::to_string(table.max_order()) +
                              " is too small for this uncertainty");
  if (report.tail_share > options.tail_fraction)
    report.warnings.push_back("estimated order-" + std::to_string(table.max_order() + 1) + " contribution is " +
                              std::to_string(report.tail_share) + " of E[P]; consider a larger M");
  return report;
}

} // namespace qpath
