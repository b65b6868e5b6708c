#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qpath {

/// Which parameters a pathway is a monomial in.
enum class PathwayKind { amplitude, dipole };

inline const char* to_string(PathwayKind kind) { return kind == PathwayKind::amplitude ? "amplitude" : "dipole"; }

/// Exponent vector alpha of a pathway monomial prod_k x_k^{alpha_k}.
/// For the amplitude kind x_k = A_k; for the dipole kind x_k = mu_pq over the
/// encoded pairs.
struct PathwayIndex {
  PathwayKind kind = PathwayKind::amplitude;
  std::vector<int> exponents;

  int order() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

  /// Hyphen-joined exponents, e.g. "0-1-1".
  std::string label() const {
    std::string out;
    for (std::size_t k = 0; k < exponents.size(); ++k) {
      if (k)
        out += '-';
      out += std::to_string(exponents[k]);
    }
    return out;
  }

  friend bool operator==(const PathwayIndex&, const PathwayIndex&) = default;
};

/// Order on exponent vectors: compare at the first index where they differ.
/// Any strict total order works for the "each pair once" double sums; this
/// is the lexicographic one.
inline std::strong_ordering pathway_compare(const std::vector<int>& lhs, const std::vector<int>& rhs) {
  if (lhs.size() != rhs.size())
    throw InvalidArgument("pathway_compare: exponent vectors differ in length");
  for (std::size_t k = 0; k < lhs.size(); ++k)
    if (lhs[k] != rhs[k])
      return lhs[k] <=> rhs[k];
  return std::strong_ordering::equal;
}

/// Integer encoding frequencies gamma_k = (M+1)^{k-1} gamma_1 and the s-grid.
///
/// Every pathway of order <= M then sits at a distinct frequency
/// sum_k alpha_k gamma_k <= M gamma_K, so a grid of more than M gamma_K samples
/// decodes them without aliasing.
struct EncodingScheme {
  PathwayKind kind = PathwayKind::amplitude;
  std::int64_t base = 1;
  std::vector<std::int64_t> frequencies;
  int max_order = 0;
  std::int64_t grid_size = 0;

  std::size_t parameter_count() const { return frequencies.size(); }

  std::int64_t max_in_scope_gamma() const { return max_order * frequencies.back(); }

  void validate() const {
    if (frequencies.empty())
      throw InvalidArgument("encoding scheme has no parameters");
    if (max_order < 1)
      throw InvalidArgument("encoding scheme needs max_order >= 1");
    if (base < 1)
      throw InvalidArgument("base encoding frequency must be a positive integer");
    std::int64_t expected = base;
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
      if (frequencies[k] != expected)
        throw InvalidArgument("encoding frequencies must be (M+1)^(k-1) * gamma_1");
      if (k + 1 < frequencies.size())
        expected *= (max_order + 1);
    }
    if (grid_size <= max_in_scope_gamma())
      throw InvalidArgument("s-grid of " + std::to_string(grid_size) + " samples aliases frequencies up to " +
                            std::to_string(max_in_scope_gamma()));
  }

  friend bool operator==(const EncodingScheme&, const EncodingScheme&) = default;
};

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out) || out > (std::int64_t{1} << 52))
    throw InvalidArgument("encoding frequency range overflows");
  return out;
}

} // namespace detail

/// Smallest power of two strictly greater than `value`.
inline std::int64_t next_power_of_two_above(std::int64_t value) {
  std::int64_t n = 1;
  while (n <= value)
    n = detail::checked_mul(n, 2);
  return n;
}

inline EncodingScheme assign_encoding_frequencies(int parameter_count, int max_order, std::int64_t base = 1,
                                                  PathwayKind kind = PathwayKind::amplitude) {
  if (parameter_count < 1)
    throw InvalidArgument("encoding needs at least one parameter");
  if (max_order < 1)
    throw InvalidArgument("encoding needs max_order >= 1");
  if (base < 1)
    throw InvalidArgument("base encoding frequency must be a positive integer");
  EncodingScheme scheme;
  scheme.kind = kind;
  scheme.base = base;
  scheme.max_order = max_order;
  std::int64_t gamma = base;
  for (int k = 0; k < parameter_count; ++k) {
    scheme.frequencies.push_back(gamma);
    if (k + 1 < parameter_count)
      gamma = detail::checked_mul(gamma, max_order + 1);
  }
  scheme.grid_size = next_power_of_two_above(detail::checked_mul(max_order, scheme.frequencies.back()));
  return scheme;
}

/// gamma = sum_k alpha_k gamma_k; injective for 0 <= alpha_k <= M.
inline std::int64_t alpha_to_gamma(const std::vector<int>& alpha, const EncodingScheme& scheme) {
  if (alpha.size() != scheme.parameter_count())
    throw InvalidArgument("exponent vector length does not match the encoding scheme");
  std::int64_t gamma = 0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] < 0 || alpha[k] > scheme.max_order)
      throw InvalidArgument("exponent " + std::to_string(alpha[k]) + " outside [0, " +
                            std::to_string(scheme.max_order) + "]");
    gamma += alpha[k] * scheme.frequencies[k];
  }
  return gamma;
}

/// Base-(M+1) digits of gamma / gamma_1. Returns nullopt when gamma cannot be
/// an in-scope pathway (not a multiple of gamma_1, or digit sum above M), i.e.
/// decoded content there is alias or truncation residual.
inline std::optional<PathwayIndex> gamma_to_alpha(std::int64_t gamma, const EncodingScheme& scheme) {
  if (gamma < 0 || gamma > scheme.max_in_scope_gamma())
    throw InvalidArgument("gamma " + std::to_string(gamma) + " outside [0, " +
                          std::to_string(scheme.max_in_scope_gamma()) + "]");
  if (gamma % scheme.base != 0)
    return std::nullopt;
  std::int64_t rest = gamma / scheme.base;
  const std::int64_t radix = scheme.max_order + 1;
  PathwayIndex index{scheme.kind, std::vector<int>(scheme.parameter_count(), 0)};
  for (auto& digit : index.exponents) {
    digit = static_cast<int>(rest % radix);
    rest /= radix;
  }
  if (rest != 0 || index.order() > scheme.max_order)
    return std::nullopt;
  return index;
}

} // namespace qpath
