// Acceptance checks for the benchmark four-level system. One verdict line per
// criterion:
//
//   qpath_acceptance            run every criterion, write acceptance_report.txt
//   qpath_acceptance --only 3   run one criterion
//
// Exit status: 0 when every selected criterion passes, 77 when the only
// failures are documented deviations (see known_deviations), 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <qpath/figures.hpp>
#include <qpath/worst_case.hpp>

using namespace qpath;

namespace {

// Tolerances -------------------------------------------------------------------

constexpr double table4_probability_tolerance = 0.02;
constexpr double table4_variance_relative = 0.25;
constexpr double table4_runtime_seconds = 300.0;
constexpr double table3_relative = 0.05;
constexpr double oracle_standard_errors = 3.0;
constexpr std::size_t oracle_samples = 100000;
constexpr std::uint64_t oracle_seed = 1;
constexpr double dipole_sigma = 0.05;
constexpr double unitarity_tolerance = 1e-10;
constexpr double reconstruction_tolerance = 1e-2;
constexpr double scaling_tolerance = 1e-6;
constexpr double identity_tolerance = 1e-8;
constexpr double gradient_tolerance = 1e-6;
constexpr double boundary_tolerance = 1e-10;
constexpr double sampling_tolerance = 1e-6;
constexpr std::size_t boundary_samples = 1000000;
constexpr double sweep_sigma = 0.2;
constexpr int sweep_restarts = 10;

const std::vector<double> table4_sigmas{0.06, 0.12, 0.18, 0.24, 0.30};
const std::vector<double> table4_probability{0.9571, 0.9392, 0.9115, 0.8766, 0.8374};
const std::vector<std::pair<double, double>> table4_variance{
    {8.295e-4, 6.968e-5}, {0.003163, 0.0005661}, {0.006558, 0.002185}, {0.01038, 0.005571}, {0.01397, 0.01072}};

struct Table3Row {
  std::vector<int> printed_alpha;
  std::int64_t gamma;
  complex amplitude;
};

const std::vector<Table3Row> table3_rows{
    {{0, 0, 2}, 2, {0.1816, -0.2149}},     {{0, 1, 1}, 23, {0.7366, -0.8381}},    {{0, 2, 0}, 44, {0.7462, -0.8164}},
    {{1, 0, 1}, 485, {-0.04693, -0.07756}}, {{1, 1, 0}, 506, {-0.09012, -0.1555}}, {{0, 0, 4}, 4, {-0.01389, 0.02558}},
    {{0, 1, 3}, 25, {-0.1101, 0.2025}},     {{0, 2, 2}, 46, {-0.3281, 0.6014}},    {{0, 3, 1}, 67, {-0.4356, 0.7946}},
    {{0, 4, 0}, 88, {-0.21739, 0.3941}},    {{1, 0, 3}, 487, {0.01617, 0.01658}},  {{1, 1, 2}, 508, {0.09452, 0.09914}},
    {{1, 2, 1}, 529, {0.1841, 0.1979}},     {{1, 3, 0}, 550, {0.1194, 0.1318}}};
const complex table3_order2{0.2346, -2.3926};
const complex table3_order4{0.3342, 2.0936};

/// Criteria that fail for reasons analysed in the decisions ledger.
const std::map<int, std::string> known_deviations{
    {1, "var(Re U) at sigma 0.30 sits 26% above the printed value; analytic moments agree with sampling"},
    {2, "the 14 printed pathway amplitudes do not add up to the printed order sums"}};

// Shared state -----------------------------------------------------------------

const PropagationSettings reference_settings{2000, StepMethod::magnus4};
const PropagationSettings sampling_settings{500, StepMethod::magnus4};
const PropagationSettings optimizer_settings{100, StepMethod::magnus4};
constexpr int max_order = 21;

struct Context {
  std::ostringstream log;
  std::optional<PathwayTable> eps1;
  double eps1_seconds = 0.0;

  const PathwayTable& table() {
    if (!eps1) {
      const auto start = std::chrono::steady_clock::now();
      eps1 = extract_pathways(PathwayKind::amplitude, four_level_system(), table2_field(1), max_order,
                              reference_settings, 0, 3);
      eps1_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return *eps1;
  }
};

struct Verdict {
  bool pass = false;
  std::string summary;
};

template <typename... Args>
std::string format(const char* pattern, Args... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

std::string format_complex(complex z) { return format("%.5f%+.5fi", z.real(), z.imag()); }

UncertaintyModel relative_amplitude_model(double sigma) {
  return amplitude_uncertainty(table2_field(1), sigma, true);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Criteria ---------------------------------------------------------------------

Verdict table4_regression(Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const auto& table = ctx.table();
  bool pass = true;
  double worst_p = 0.0, worst_var = 0.0;
  ctx.log << "  sigma   E[P]     paper    var(Re)      paper      rel    var(Im)      paper      rel\n";
  for (std::size_t s = 0; s < table4_sigmas.size(); ++s) {
    const auto report = analyze_moments(table, relative_amplitude_model(table4_sigmas[s]));
    const double dp = std::abs(report.expected_probability - table4_probability[s]);
    const double re = std::abs(report.variance.real - table4_variance[s].first) / table4_variance[s].first;
    const double im = std::abs(report.variance.imag - table4_variance[s].second) / table4_variance[s].second;
    worst_p = std::max(worst_p, dp);
    worst_var = std::max({worst_var, re, im});
    pass = pass && dp <= table4_probability_tolerance && re <= table4_variance_relative &&
           im <= table4_variance_relative;
    ctx.log << format("  %.2f  %.4f  %.4f  %.4e  %.4e  %5.1f%%  %.4e  %.4e  %5.1f%%\n", table4_sigmas[s],
                      report.expected_probability, table4_probability[s], report.variance.real,
                      table4_variance[s].first, 100 * re, report.variance.imag, table4_variance[s].second, 100 * im);
  }
  const double runtime = seconds_since(start);
  pass = pass && runtime < table4_runtime_seconds;
  return {pass, format("max |dE[P]| %.4f (tol %.2f), max variance deviation %.1f%% (tol %.0f%%), sweep %.1f s", worst_p,
                       table4_probability_tolerance, 100 * worst_var, 100 * table4_variance_relative, runtime)};
}

Verdict table3_regression(Context& ctx) {
  const auto& table = ctx.table();
  bool gamma_ok = true;
  std::vector<complex> ours;
  for (const auto& row : table3_rows) {
    const std::vector<int> alpha(row.printed_alpha.rbegin(), row.printed_alpha.rend());
    gamma_ok = gamma_ok && alpha_to_gamma(alpha, table.scheme) == row.gamma;
    complex value{};
    for (const auto& e : table.entries)
      if (e.index.exponents == alpha)
        value = e.raw;
    ours.push_back(value);
  }
  gamma_ok = gamma_ok && table.scheme.frequencies == std::vector<std::int64_t>{1, 22, 484};

  // Global reconciliation: optional conjugation, then the least-squares phase.
  struct Fit {
    bool conjugate;
    complex phase;
    double worst;
  };
  std::optional<Fit> best;
  for (bool conjugate : {false, true}) {
    complex overlap{};
    for (std::size_t n = 0; n < ours.size(); ++n)
      overlap += table3_rows[n].amplitude * std::conj(conjugate ? std::conj(ours[n]) : ours[n]);
    const complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : complex{1.0};
    double worst = 0.0;
    for (std::size_t n = 0; n < ours.size(); ++n) {
      const complex mapped = phase * (conjugate ? std::conj(ours[n]) : ours[n]);
      worst = std::max(worst, std::abs(mapped - table3_rows[n].amplitude) / std::abs(table3_rows[n].amplitude));
    }
    if (!best || worst < best->worst)
      best = Fit{conjugate, phase, worst};
  }
  double worst_modulus = 0.0;
  ctx.log << "  alpha(printed)  gamma  ours                 paper                |ours|/|paper|\n";
  for (std::size_t n = 0; n < ours.size(); ++n) {
    const auto& row = table3_rows[n];
    const double ratio = std::abs(ours[n]) / std::abs(row.amplitude);
    worst_modulus = std::max(worst_modulus, std::abs(ratio - 1.0));
    ctx.log << format("  [%d,%d,%d]  %5lld  %-20s %-20s %.3f\n", row.printed_alpha[0], row.printed_alpha[1],
                      row.printed_alpha[2], static_cast<long long>(row.gamma), format_complex(ours[n]).c_str(),
                      format_complex(row.amplitude).c_str(), ratio);
  }
  complex paper_order2{}, paper_order4{};
  for (const auto& row : table3_rows)
    (row.printed_alpha[0] + row.printed_alpha[1] + row.printed_alpha[2] == 2 ? paper_order2 : paper_order4) +=
        row.amplitude;
  ctx.log << "  sum of the printed m=2 rows " << format_complex(paper_order2) << " vs printed U^2 "
          << format_complex(table3_order2) << "\n";
  ctx.log << "  sum of the printed m=4 rows " << format_complex(paper_order4) << " vs printed U^4 "
          << format_complex(table3_order4) << "\n";
  const complex m2 = pathway_order_sum(table, 2);
  const complex m4 = pathway_order_sum(table, 4);
  const double e2 = std::abs(m2 - table3_order2) / std::abs(table3_order2);
  const double e4 = std::abs(m4 - table3_order4) / std::abs(table3_order4);
  ctx.log << "  U^2 " << format_complex(m2) << format(" (%.1f%%), U^4 ", 100 * e2) << format_complex(m4)
          << format(" (%.1f%%)\n", 100 * e4);
  ctx.log << "  best global map: " << (best->conjugate ? "conjugate, " : "") << "phase "
          << format("%.4f rad", std::arg(best->phase)) << "\n";
  const bool entries_ok = best->worst <= table3_relative;
  const bool sums_ok = e2 <= table3_relative && e4 <= table3_relative;
  return {gamma_ok && entries_ok && sums_ok,
          format("gamma column %s; order sums %.1f%% / %.1f%% (tol 5%%); 14 entries: worst %.0f%% after best global "
                 "map, worst modulus %.0f%%",
                 gamma_ok ? "exact" : "MISMATCH", 100 * e2, 100 * e4, 100 * best->worst, 100 * worst_modulus)};
}

struct OracleCheck {
  bool pass = true;
  double worst = 0.0;

  void compare(std::ostringstream& log, const char* label, double analytic, const ScalarSummary& summary,
               double sampled, double error) {
    const double z = std::abs(analytic - sampled) / error;
    worst = std::max(worst, z);
    pass = pass && z <= oracle_standard_errors;
    log << format("    %-8s analytic %.6e  sampled %.6e +- %.2e  (%.2f SE)\n", label, analytic, sampled, error, z);
    (void)summary;
  }

  void compare_all(std::ostringstream& log, const MomentReport& report, const SampleStatistics& stats) {
    compare(log, "E[P]", report.expected_probability, stats.probability, stats.probability.mean,
            stats.probability.mean_error);
    compare(log, "var(Re)", report.variance.real, stats.amplitude_real, stats.amplitude_real.variance,
            stats.amplitude_real.variance_error);
    compare(log, "var(Im)", report.variance.imag, stats.amplitude_imag, stats.amplitude_imag.variance,
            stats.amplitude_imag.variance_error);
  }
};

Verdict oracle_equivalence(Context& ctx) {
  const auto system = four_level_system();
  const auto field = table2_field(1);
  OracleCheck check;
  const auto start = std::chrono::steady_clock::now();
  for (double sigma : table4_sigmas) {
    const auto model = relative_amplitude_model(sigma);
    const auto report = analyze_moments(ctx.table(), model);
    const auto stats = estimate_statistics(system, field, model, 0, 3, oracle_samples, oracle_seed, sampling_settings);
    ctx.log << format("  amplitude sigma %.2f\n", sigma);
    check.compare_all(ctx.log, report, stats);
  }
  const auto dipole_table =
      extract_pathways(PathwayKind::dipole, system, field, max_order, reference_settings, 0, 3);
  const auto dipole_model = dipole_uncertainty(system, dipole_sigma, false);
  const auto dipole_report = analyze_moments(dipole_table, dipole_model);
  const auto dipole_stats =
      estimate_statistics(system, field, dipole_model, 0, 3, oracle_samples, oracle_seed, sampling_settings);
  ctx.log << format("  dipole sigma %.2f on mu12, mu13, mu24\n", dipole_sigma);
  check.compare_all(ctx.log, dipole_report, dipole_stats);
  return {check.pass, format("n = %zu, seed %llu: worst deviation %.2f SE over 18 comparisons (tol %.0f SE), %.0f s",
                             oracle_samples, static_cast<unsigned long long>(oracle_seed), check.worst,
                             oracle_standard_errors, seconds_since(start))};
}

void enumerate_alphas(int k, int m, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == k) {
    out.push_back(prefix);
    return;
  }
  int used = 0;
  for (int a : prefix)
    used += a;
  for (int a = 0; a + used <= m; ++a) {
    prefix.push_back(a);
    enumerate_alphas(k, m, prefix, out);
    prefix.pop_back();
  }
}

Verdict structural_invariants(Context& ctx) {
  const auto system = four_level_system();
  const auto field = table2_field(1);
  const auto& table = ctx.table();

  const double unitarity = unitarity_error(propagate(system, field, reference_settings));
  const double reconstruction = std::abs(table.reconstruction() - table.nominal) / std::abs(table.nominal);

  bool round_trip = true;
  std::size_t checked = 0;
  for (int k = 1; k <= 3; ++k)
    for (int m = 1; m <= 4; ++m) {
      const auto scheme = assign_encoding_frequencies(k, m);
      std::vector<std::vector<int>> all;
      std::vector<int> prefix;
      enumerate_alphas(k, m, prefix, all);
      std::set<std::int64_t> seen;
      for (const auto& alpha : all) {
        const auto gamma = alpha_to_gamma(alpha, scheme);
        const auto back = gamma_to_alpha(gamma, scheme);
        round_trip = round_trip && seen.insert(gamma).second && back && back->exponents == alpha;
        ++checked;
      }
      std::size_t decodable = 0;
      for (std::int64_t g = 0; g <= scheme.max_in_scope_gamma(); ++g)
        if (const auto alpha = gamma_to_alpha(g, scheme)) {
          ++decodable;
          round_trip = round_trip && alpha_to_gamma(alpha->exponents, scheme) == g;
        }
      round_trip = round_trip && decodable == all.size();
    }

  // c_alpha must not depend on the amplitudes they were extracted at.
  constexpr double lambda = 0.5;
  ControlField scaled = field;
  for (auto& mode : scaled.modes)
    mode.amplitude *= lambda;
  const auto scaled_table =
      extract_pathways(PathwayKind::amplitude, system, scaled, max_order, reference_settings, 0, 3);
  double scaling = 0.0;
  std::size_t compared = 0;
  for (std::size_t n = 0; n < table.entries.size(); ++n) {
    const auto& a = table.entries[n];
    const auto& b = scaled_table.entries[n];
    // Entries below the round-off floor of the decode carry no information.
    if (std::abs(a.raw) < 1e-8 || std::abs(b.raw) < 1e-8)
      continue;
    scaling = std::max(scaling, std::abs(a.normalized - b.normalized) / std::abs(a.normalized));
    ++compared;
  }

  double identity = 0.0;
  for (double sigma : {0.0, 0.06, 0.12, 0.18, 0.24, 0.30}) {
    const auto report = analyze_moments(table, relative_amplitude_model(sigma));
    identity = std::max(identity, std::abs(report.expected_probability - std::norm(report.expected_amplitude) -
                                           report.variance.real - report.variance.imag));
  }

  ctx.log << format("  unitarity max|U^dag U - I| = %.2e (tol %.0e)\n", unitarity, unitarity_tolerance);
  ctx.log << format("  reconstruction |sum c - U|/|U| = %.2e at M = %d (tol %.0e)\n", reconstruction, max_order,
                    reconstruction_tolerance);
  ctx.log << format("  gamma<->alpha round trip over %zu vectors (M <= 4, K <= 3): %s\n", checked,
                    round_trip ? "exact" : "BROKEN");
  ctx.log << format("  lambda = %.1f scaling: max relative change of c_alpha %.2e over %zu entries (tol %.0e)\n",
                    lambda, scaling, compared, scaling_tolerance);
  ctx.log << format("  moment identity residual %.2e (tol %.0e)\n", identity, identity_tolerance);
  const bool pass = unitarity < unitarity_tolerance && reconstruction <= reconstruction_tolerance && round_trip &&
                    scaling <= scaling_tolerance && identity <= identity_tolerance;
  return {pass, format("unitarity %.1e, reconstruction %.1e, round trip %s, scaling %.1e, identity %.1e", unitarity,
                       reconstruction, round_trip ? "ok" : "broken", scaling, identity)};
}

Verdict gradient_check(Context& ctx) {
  const auto system = four_level_system();
  const auto field = table2_field(1);
  const auto pairs = all_dipole_pairs(4);
  const auto grad = gradient_dipole(system, field, 0, 3, reference_settings);
  auto probability = [&](std::size_t k, double delta) {
    const double mu = system.dipole(pairs[k].p, pairs[k].q);
    return transition_probability(
        propagate(with_dipole_values(system, {pairs[k]}, {mu + delta}), field, reference_settings), 0, 3);
  };
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double fd = (probability(k, h) - probability(k, -h)) / (2 * h);
    const double relative = std::abs(grad.gradient[k] - fd) / std::abs(fd);
    worst = std::max(worst, relative);
    ctx.log << format("  d P41 / d %s  analytic %+.10f  central difference %+.10f  rel %.2e\n",
                      pairs[k].label().c_str(), grad.gradient[k], fd, relative);
  }
  return {worst < gradient_tolerance,
          format("worst relative error %.2e over 6 dipole parameters (tol %.0e, h = %.0e)", worst, gradient_tolerance, h)};
}

Verdict worst_case_checks(Context& ctx) {
  const auto system = four_level_system();
  const auto field = table2_field(1);
  double attainment = 0.0;
  double excess = -1.0;
  const auto all = gradient_dipole(system, field, 0, 3, reference_settings);

  // K = 6: independent sigma = 0.05 on every element.
  {
    const auto ellipsoid =
        ConfidenceEllipsoid::make(ParameterCovariance::diagonal(std::vector<double>(6, dipole_sigma)), 0.95);
    const auto wc = worst_case_deviation(all.gradient, ellipsoid);
    attainment = std::max(attainment, std::abs(ellipsoid.mahalanobis_squared(wc.delta) - ellipsoid.quantile));
    ctx.log << format("  K = 6: chi2 %.4f, |dJ|_wc %.6f, attainment error %.1e\n", ellipsoid.quantile, wc.magnitude,
                      std::abs(ellipsoid.mahalanobis_squared(wc.delta) - ellipsoid.quantile));
  }
  // K = 1..3 over the nonzero elements, correlated covariance.
  const auto nonzero = nonzero_dipole_pairs(system);
  const auto grad3 = gradient_dipole(system, field, 0, 3, reference_settings, nonzero);
  const RealMatrix full{{0.0025, 0.0006, -0.0004}, {0.0006, 0.0016, 0.0002}, {-0.0004, 0.0002, 0.0030}};
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  for (int k = 1; k <= 3; ++k) {
    const RealMatrix sigma = full.topLeftCorner(k, k);
    const RealVector gradient = grad3.gradient.head(k);
    const auto ellipsoid = ConfidenceEllipsoid::make({sigma}, 0.95);
    const auto wc = worst_case_deviation(gradient, ellipsoid);
    const double reached = std::abs(ellipsoid.mahalanobis_squared(wc.delta) - ellipsoid.quantile);
    attainment = std::max(attainment, reached);
    const RealMatrix q = ellipsoid.covariance.square_root();
    const double radius = std::sqrt(ellipsoid.quantile);
    double best = 0.0;
    for (std::size_t n = 0; n < boundary_samples; ++n) {
      RealVector x(k);
      for (int d = 0; d < k; ++d)
        x[d] = normal(rng);
      x.normalize();
      best = std::max(best, std::abs(gradient.dot(radius * (q * x))));
    }
    excess = std::max(excess, best - wc.magnitude);
    ctx.log << format("  K = %d: chi2 %.4f, |dJ|_wc %.8f, best of %zu boundary samples %.8f, attainment error %.1e\n",
                      k, ellipsoid.quantile, wc.magnitude, boundary_samples, best, reached);
  }
  return {attainment <= boundary_tolerance && excess <= sampling_tolerance,
          format("attainment error %.1e (tol %.0e); sampled boundary exceeds |dJ|_wc by at most %.1e (tol %.0e)",
                 attainment, boundary_tolerance, excess, sampling_tolerance)};
}

Verdict robustness_tradeoff(Context& ctx) {
  FieldObjective objective;
  objective.system = four_level_system();
  objective.amplitudes = {0.1, 0.1, 0.1};
  objective.duration = 10.0;
  objective.carrier = Carrier::sine;
  objective.initial = 0;
  objective.target = 3;
  objective.settings = optimizer_settings;
  AmplitudeSweepSettings settings;
  settings.restarts = sweep_restarts;
  settings.sigma = sweep_sigma;
  settings.max_order = max_order;
  settings.encoding = sampling_settings;
  settings.score_restarts = false;
  const auto start = std::chrono::steady_clock::now();
  const auto points = amplitude_sweep(objective, GAConfig{}, settings);
  bool nondecreasing = true;
  std::size_t peak = 0;
  for (std::size_t n = 0; n < points.size(); ++n) {
    if (n > 0)
      nondecreasing = nondecreasing && points[n].best_nominal >= points[n - 1].best_nominal;
    if (points[n].expected > points[peak].expected)
      peak = n;
    ctx.log << format("  A = %.3f  best nominal P41 %.5f  E[P41] at sigma %.1f %.5f  significant orders %d\n",
                      points[n].amplitude, points[n].best_nominal, sweep_sigma, points[n].expected,
                      points[n].significant_orders);
  }
  const bool interior = peak > 0 && peak + 1 < points.size();
  return {nondecreasing && interior,
          format("nominal best %s in amplitude; E[P] peaks at A = %.3f (%s); %d GA runs per amplitude, %.0f s",
                 nondecreasing ? "nondecreasing" : "NOT monotone", points[peak].amplitude,
                 interior ? "interior" : "endpoint", sweep_restarts, seconds_since(start))};
}

Verdict interference_trend(Context& ctx) {
  const auto& table = ctx.table();
  std::vector<double> sigmas;
  for (int s = 0; s <= 10; ++s)
    sigmas.push_back(0.03 * s);
  const auto series = sigma_series(table, sigmas, true);
  bool decreasing = true;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const double total = series[n].report.interference.total_cross();
    if (n > 0)
      decreasing = decreasing && total < series[n - 1].report.interference.total_cross();
    ctx.log << format("  sigma %.2f  total cross-order interference %+.5f\n", series[n].sigma, total);
  }
  return {decreasing, format("total cross interference %+.3f at sigma 0 -> %+.3f at 0.30, %s", series.front().report.interference.total_cross(),
                             series.back().report.interference.total_cross(),
                             decreasing ? "strictly decreasing" : "NOT monotone")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict(Context&)> run;
};

const std::vector<Criterion> criteria{
    {1, "Table IV regression", table4_regression},
    {2, "Table III regression", table3_regression},
    {3, "Oracle equivalence (Monte Carlo)", oracle_equivalence},
    {4, "Structural invariants", structural_invariants},
    {5, "Gradient check", gradient_check},
    {6, "Worst case", worst_case_checks},
    {7, "Robustness-optimality trade-off", robustness_tradeoff},
    {8, "Interference trend", interference_trend},
};

} // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string report_path;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc)
      selected.insert(std::atoi(argv[++a]));
    else if (arg == "--report" && a + 1 < argc)
      report_path = argv[++a];
    else {
      std::cerr << "usage: qpath_acceptance [--only N]... [--report FILE]\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& c : criteria)
      selected.insert(c.id);
    if (report_path.empty())
      report_path = "acceptance_report.txt";
  }

  Context ctx;
  int failed = 0, deviations = 0, passed = 0;
  std::ostringstream verdicts;
  for (const auto& criterion : criteria) {
    if (!selected.count(criterion.id))
      continue;
    ctx.log << "criterion " << criterion.id << ": " << criterion.name << "\n";
    Verdict verdict;
    try {
      verdict = criterion.run(ctx);
    } catch (const std::exception& e) {
      verdict = {false, std::string("error: ") + e.what()};
    }
    std::string status = "PASS";
    if (verdict.pass) {
      ++passed;
    } else if (known_deviations.count(criterion.id)) {
      status = "FAIL (documented deviation)";
      ++deviations;
    } else {
      status = "FAIL";
      ++failed;
    }
    const std::string line = format("[%s] criterion %d %s: ", status.c_str(), criterion.id, criterion.name) +
                             verdict.summary;
    std::cout << line << std::endl;
    verdicts << line << "\n";
    if (!verdict.pass && known_deviations.count(criterion.id))
      ctx.log << "  documented deviation: " << known_deviations.at(criterion.id) << "\n";
  }
  const std::string summary =
      format("%d passed, %d failed with documented deviations, %d failed", passed, deviations, failed);
  std::cout << summary << "\n\n" << ctx.log.str();
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << verdicts.str() << summary << "\n\n" << ctx.log.str();
  }
  if (failed > 0)
    return 1;
  return deviations > 0 ? 77 : 0;
}
