// Amplitude-uncertainty sweep for one preset field: one pathway extraction,
// then the analytic moments at each sigma.
//
//   table4_sweep [preset-index=1] [steps=2000]

#include <cstdio>
#include <cstdlib>

#include <qpath/figures.hpp>

int main(int argc, char** argv) {
  const int preset = argc > 1 ? std::atoi(argv[1]) : 1;
  const int steps = argc > 2 ? std::atoi(argv[2]) : 2000;
  try {
    const auto system = qpath::four_level_system();
    const auto field = qpath::table2_field(preset);
    const qpath::PropagationSettings settings{steps, qpath::StepMethod::magnus4};
    const auto table =
        qpath::extract_pathways(qpath::PathwayKind::amplitude, system, field, 21, settings, 0, 3);
    std::printf("eps%d  pathways=%zu  P41=%.4f\n", preset, table.entries.size(),
                std::norm(table.reconstruction()));
    std::printf("%6s %8s %12s %12s %12s\n", "sigma", "E[P41]", "var(Re U)", "var(Im U)", "interference");
    for (const auto& point : qpath::sigma_series(table, {0.0, 0.06, 0.12, 0.18, 0.24, 0.30}, true)) {
      const auto& r = point.report;
      std::printf("%6.2f %8.4f %12.4e %12.4e %12.4f\n", point.sigma, r.expected_probability, r.variance.real,
                  r.variance.imag, r.interference.total_cross());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
