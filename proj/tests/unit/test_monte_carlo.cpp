#include <gtest/gtest.h>

#include <cstdlib>

#include <qpath/moments.hpp>
#include <qpath/monte_carlo.hpp>
#include <qpath/pathways.hpp>

#include "common.hpp"

using namespace qpath;

namespace {

const PropagationSettings fast{100, StepMethod::magnus4};

} // namespace

TEST(MonteCarlo, SummaryMatchesHandComputation) {
  const auto s = summarize({1.0, 2.0, 4.0, 7.0});
  EXPECT_DOUBLE_EQ(s.mean, 3.5);
  EXPECT_DOUBLE_EQ(s.variance, 7.0);
  EXPECT_NEAR(s.mean_error, std::sqrt(7.0 / 4.0), 1e-15);
  // m4 = (2.5^4 + 1.5^4 + 0.5^4 + 3.5^4) / 4
  const double m4 = (39.0625 + 5.0625 + 0.0625 + 150.0625) / 4.0;
  EXPECT_NEAR(s.variance_error, std::sqrt((m4 - (1.0 / 3.0) * 49.0) / 4.0), 1e-14);
}

TEST(MonteCarlo, SeedsAreDeterministicAndDistinct) {
  const auto model = amplitude_uncertainty(table2_field(1), 0.2, true);
  const auto a = sample_parameters(model, 42, 50);
  const auto b = sample_parameters(model, 42, 50);
  const auto c = sample_parameters(model, 43, 50);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(sample_parameter_vector(model, 42, 17), a[17]);
  EXPECT_NE(sample_seed(1, 0), sample_seed(1, 1));
}

TEST(MonteCarlo, DrawsFollowTheModel) {
  UncertaintyModel model{PathwayKind::amplitude, {0.1, -2.0}, {0.03, 0.5}, {}};
  const auto draws = sample_parameters(model, 9, 40000);
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> column;
    for (const auto& d : draws)
      column.push_back(d[k]);
    const auto s = summarize(column);
    EXPECT_NEAR(s.mean, model.means[k], 4 * s.mean_error);
    EXPECT_NEAR(s.variance, model.sigmas[k] * model.sigmas[k], 4 * s.variance_error);
  }
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
  const auto system = testing_support::ladder();
  const auto field = testing_support::two_mode_field();
  const auto model = amplitude_uncertainty(field, 0.2, true);
  setenv("QPATH_WORKERS", "1", 1);
  const auto one = estimate_statistics(system, field, model, 0, 2, 300, 7, fast, {true});
  setenv("QPATH_WORKERS", "4", 1);
  const auto four = estimate_statistics(system, field, model, 0, 2, 300, 7, fast, {true});
  unsetenv("QPATH_WORKERS");
  EXPECT_EQ(one.probability.mean, four.probability.mean);
  EXPECT_EQ(one.amplitude_real.variance, four.amplitude_real.variance);
  ASSERT_EQ(one.samples.size(), 300u);
  for (std::size_t n = 0; n < 300; ++n)
    EXPECT_EQ(one.samples[n].amplitude, four.samples[n].amplitude);
}

TEST(MonteCarlo, AgreesWithAnalyticMoments) {
  const auto system = testing_support::ladder();
  const auto field = testing_support::two_mode_field();
  const auto model = amplitude_uncertainty(field, 0.25, true);
  const auto table = extract_pathways(PathwayKind::amplitude, system, field, 16, fast, 0, 2);
  const auto stats = estimate_statistics(system, field, model, 0, 2, 20000, 3, fast);
  const auto var = variance_transition_amplitude(table, model);
  const complex mean = expected_transition_amplitude(table, model);
  EXPECT_NEAR(stats.probability.mean, expected_transition_probability(table, model), 4 * stats.probability.mean_error);
  EXPECT_NEAR(stats.amplitude_real.mean, mean.real(), 4 * stats.amplitude_real.mean_error);
  EXPECT_NEAR(stats.amplitude_imag.mean, mean.imag(), 4 * stats.amplitude_imag.mean_error);
  EXPECT_NEAR(stats.amplitude_real.variance, var.real, 4 * stats.amplitude_real.variance_error);
  EXPECT_NEAR(stats.amplitude_imag.variance, var.imag, 4 * stats.amplitude_imag.variance_error);
}

TEST(MonteCarlo, OrderStatisticsMatchExpectedOrderTerms) {
  const auto system = testing_support::ladder();
  const auto field = testing_support::two_mode_field();
  const auto model = amplitude_uncertainty(field, 0.3, true);
  const auto table = extract_pathways(PathwayKind::amplitude, system, field, 16, fast, 0, 2);
  const auto expected = expected_order_terms(table, model);
  const auto sampled = estimate_order_statistics(system, field, model, 0, 2, 6, 5000, 11, fast);
  for (std::size_t m = 1; m <= 6; ++m) {
    EXPECT_NEAR(sampled.mean[m].real(), expected[m].real(), 4 * sampled.error[m].real() + 1e-12) << m;
    EXPECT_NEAR(sampled.mean[m].imag(), expected[m].imag(), 4 * sampled.error[m].imag() + 1e-12) << m;
  }
}

TEST(MonteCarlo, DipoleSamplingPerturbsSymmetrically) {
  const auto system = four_level_system();
  const auto model = dipole_uncertainty(system, 0.05, false);
  const auto values = sample_parameter_vector(model, 1, 0);
  const auto [sys, fld] = detail::perturbed_configuration(system, table2_field(1), model, values);
  EXPECT_NO_THROW(sys.validate());
  EXPECT_EQ(sys.dipole(1, 3), values[2]);
  EXPECT_EQ(sys.dipole(0, 3), 0.0);
}

TEST(MonteCarlo, RejectsTooFewSamples) {
  const auto field = testing_support::two_mode_field();
  const auto model = amplitude_uncertainty(field, 0.2, true);
  EXPECT_THROW(estimate_statistics(testing_support::ladder(), field, model, 0, 2, 1, 1, fast), InvalidArgument);
  EXPECT_THROW(estimate_statistics(testing_support::ladder(), field, model, 0, 5, 10, 1, fast), InvalidArgument);
}
