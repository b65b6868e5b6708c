#include <gtest/gtest.h>

#include <random>

#include <qpath/moments.hpp>

#include "common.hpp"

using namespace qpath;

namespace {

const PropagationSettings fast{200, StepMethod::magnus4};

const PathwayTable& ladder_table() {
  static const PathwayTable table = extract_pathways(PathwayKind::amplitude, testing_support::ladder(),
                                                     testing_support::two_mode_field(), 16, fast, 0, 2);
  return table;
}

/// Hand-built table: U = c0 + c1 x + c2 x^2 for one parameter.
PathwayTable polynomial_table(complex c0, complex c1, complex c2) {
  PathwayTable table;
  table.kind = PathwayKind::amplitude;
  table.scheme = assign_encoding_frequencies(1, 2);
  table.parameter_labels = {"A1"};
  table.parameter_values = {1.0};
  table.free_term = c0;
  table.entries = {{{PathwayKind::amplitude, {1}}, 1, c1, c1}, {{PathwayKind::amplitude, {2}}, 2, c2, c2}};
  table.nominal = c0 + c1 + c2;
  return table;
}

} // namespace

TEST(Moments, GaussianRawMoments) {
  EXPECT_DOUBLE_EQ(gaussian_raw_moment(0.1, 0.03, 0), 1.0);
  EXPECT_DOUBLE_EQ(gaussian_raw_moment(0.1, 0.03, 1), 0.1);
  EXPECT_NEAR(gaussian_raw_moment(0.1, 0.03, 2), 0.0109, 1e-15);
  // E[x^3] = mu^3 + 3 mu sigma^2
  EXPECT_NEAR(gaussian_raw_moment(0.1, 0.03, 3), 0.001 + 3 * 0.1 * 0.0009, 1e-16);
  EXPECT_NEAR(gaussian_raw_moment(0.0, 2.0, 6), 15.0 * 64.0, 1e-9);
  EXPECT_DOUBLE_EQ(gaussian_raw_moment(0.3, 0.0, 5), std::pow(0.3, 5));
  EXPECT_NEAR(gaussian_raw_moment(0.0, 0.1, 4), 0.0003, 1e-18);
  EXPECT_THROW(gaussian_raw_moment(0.1, -1.0, 2), InvalidArgument);
}

TEST(Moments, RawMomentAgreesWithSampling) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(1.0, 0.3);
  const int n = 400000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = std::pow(normal(rng), 4);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, gaussian_raw_moment(1.0, 0.3, 4), 4 * se);
}

TEST(Moments, OneParameterPolynomialClosedForm) {
  const complex c0{0.1, -0.2}, c1{0.5, 0.3}, c2{-0.4, 0.7};
  const auto table = polynomial_table(c0, c1, c2);
  UncertaintyModel model{PathwayKind::amplitude, {1.0}, {0.2}, {}};
  const double m1 = 1.0, m2 = 1.04, m3 = 1.12, m4 = 1.0 + 6 * 0.04 + 3 * 0.0016;
  const complex mean = c0 + c1 * m1 + c2 * m2;
  EXPECT_LT(std::abs(expected_transition_amplitude(table, model) - mean), 1e-14);
  // E|U|^2 expanded term by term.
  const double ep = std::norm(c0) + std::norm(c1) * m2 + std::norm(c2) * m4 + 2 * std::real(c0 * std::conj(c1)) * m1 +
                    2 * std::real(c0 * std::conj(c2)) * m2 + 2 * std::real(c1 * std::conj(c2)) * m3;
  EXPECT_NEAR(expected_transition_probability(table, model), ep, 1e-14);
  // var(Re U) from E[(Re U)^2] with Re U = a + b x + c x^2.
  const double a = c0.real(), b = c1.real(), c = c2.real();
  const double e2 = a * a + b * b * m2 + c * c * m4 + 2 * a * b * m1 + 2 * a * c * m2 + 2 * b * c * m3;
  const auto var = variance_transition_amplitude(table, model);
  EXPECT_NEAR(var.real, e2 - mean.real() * mean.real(), 1e-14);
  EXPECT_NEAR(var.real + var.imag + std::norm(mean), ep, 1e-14);
}

TEST(Moments, ZeroSigmaReducesToNominal) {
  const auto& table = ladder_table();
  const auto model = amplitude_uncertainty(testing_support::two_mode_field(), 0.0, true);
  EXPECT_LT(std::abs(expected_transition_amplitude(table, model) - table.reconstruction()), 1e-13);
  EXPECT_NEAR(expected_transition_probability(table, model), std::norm(table.reconstruction()), 1e-13);
  const auto var = variance_transition_amplitude(table, model);
  EXPECT_NEAR(var.real, 0.0, 1e-12);
  EXPECT_NEAR(var.imag, 0.0, 1e-12);
}

TEST(Moments, ProbabilityIdentityAndInterferenceTotal) {
  const auto& table = ladder_table();
  const auto model = amplitude_uncertainty(testing_support::two_mode_field(), 0.2, true);
  const double ep = expected_transition_probability(table, model);
  const complex eu = expected_transition_amplitude(table, model);
  const auto var = variance_transition_amplitude(table, model);
  EXPECT_NEAR(ep, std::norm(eu) + var.real + var.imag, 1e-12);
  EXPECT_NEAR(interference_moments(table, model).total(), ep, 1e-12);
}

TEST(Moments, EachPairVisitedOnce) {
  const auto& table = ladder_table();
  std::size_t count = 0;
  for_each_ordered_pair(table.entries, [&](const PathwayEntry& lesser, const PathwayEntry& greater) {
    EXPECT_EQ(pathway_compare(lesser.index.exponents, greater.index.exponents), std::strong_ordering::less);
    ++count;
  });
  const std::size_t n = table.entries.size();
  EXPECT_EQ(count, n * (n - 1) / 2);
}

TEST(Moments, OrderTermsAddUpToExpectedAmplitude) {
  const auto& table = ladder_table();
  const auto model = amplitude_uncertainty(testing_support::two_mode_field(), 0.15, true);
  const auto terms = expected_order_terms(table, model);
  ASSERT_EQ(terms.size(), 17u);
  complex sum = 0.0;
  for (const auto& t : terms)
    sum += t;
  EXPECT_LT(std::abs(sum - expected_transition_amplitude(table, model)), 1e-13);
}

TEST(Moments, ProbabilityGradientMatchesDifferences) {
  const auto& table = ladder_table();
  const auto gradient = probability_gradient(table);
  const double h = 1e-6;
  for (std::size_t k = 0; k < 2; ++k) {
    auto shifted = [&](double delta) {
      UncertaintyModel model = amplitude_uncertainty(testing_support::two_mode_field(), 0.0, false);
      model.means[k] += delta;
      return expected_transition_probability(table, model);
    };
    EXPECT_NEAR(gradient[k], (shifted(h) - shifted(-h)) / (2 * h), 1e-7);
  }
}

TEST(Moments, DistributionalWorstCase) {
  // sqrt(2) erfinv(c) is the two-sided normal quantile
  EXPECT_NEAR(distributional_worst_case(0.9, 0.01, 0.95), 0.9 - 1.959963984540054 * 0.01, 1e-12);
  EXPECT_NEAR(distributional_worst_case(0.9, 0.01, 0.5), 0.9 - 0.6744897501960817 * 0.01, 1e-12);
  EXPECT_EQ(distributional_worst_case(0.9, 0.0, 0.99), 0.9);
  EXPECT_THROW(distributional_worst_case(0.9, 0.01, 1.0), InvalidArgument);
}

TEST(Moments, ReportFieldsAndTail) {
  const auto& table = ladder_table();
  const auto model = amplitude_uncertainty(testing_support::two_mode_field(), 0.1, true);
  const auto report = analyze_moments(table, model);
  EXPECT_EQ(report.max_order, 16);
  EXPECT_NEAR(report.nominal_probability, std::norm(table.reconstruction()), 1e-15);
  EXPECT_LT(report.tail_share, 1e-6);
  EXPECT_EQ(report.order_expectations.size(), 17u);
  EXPECT_NEAR(report.expected_probability,
              std::norm(report.expected_amplitude) + report.variance.real + report.variance.imag, 1e-12);
}

TEST(Moments, ModelValidation) {
  const auto& table = ladder_table();
  UncertaintyModel bad{PathwayKind::amplitude, {0.3}, {0.1}, {}};
  EXPECT_THROW(expected_transition_probability(table, bad), InvalidArgument);
  UncertaintyModel negative = amplitude_uncertainty(testing_support::two_mode_field(), 0.1, false);
  negative.sigmas[0] = -0.1;
  EXPECT_THROW(expected_transition_probability(table, negative), InvalidArgument);
  UncertaintyModel dipole = dipole_uncertainty(testing_support::ladder(), 0.05, false);
  EXPECT_THROW(expected_transition_probability(table, dipole), InvalidArgument);
}
