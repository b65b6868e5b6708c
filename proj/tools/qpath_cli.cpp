#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <qpath/commands.hpp>

namespace {

constexpr const char* csv_columns = R"(CSV artifacts (lines starting with '#' carry version and config hash):
  pathways.csv         kind, alpha, gamma, order, raw_re, raw_im, norm_re, norm_im
  moments.csv          sigma, expected_probability, variance_re, variance_im, expected_re,
                       expected_im, total_interference, worst_case, warnings
  interference_<k>.csv m_prime, m, value (diagonal = same-order term)
  sample.csv           sigma, count, mean_probability, se_probability, variance_re,
                       se_variance_re, variance_im, se_variance_im
  samples_<k>.csv      sample, <parameters...>, u_re, u_im, probability
  history.csv          run, generation, best, mean, std
  figure_<name>.csv    one series per --figure (see README)
Set QPATH_WORKERS to override the worker thread count.)";

qpath::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw qpath::ConfigError("", "cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return qpath::json::parse(text);
  } catch (const qpath::json::parse_error& e) {
    throw qpath::ConfigError("", "JSON parse error at " +
                                     qpath::detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum pathway robustness analysis"};
  app.footer(csv_columns);
  std::string config_path;
  std::string command;
  std::string out_dir = ".";
  std::string figure = "interference";
  std::string preset;
  std::uint64_t seed = 0;
  std::vector<double> sigmas;
  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--command", command, "simulate|pathways|moments|worstcase|sample|optimize|report")->required();
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for Monte Carlo and the optimizer");
  auto* sigma_opt = app.add_option("--sigma", sigmas, "Uniform sigma sweep, e.g. 0.06,0.12")->delimiter(',');
  app.add_option("--figure", figure, "report figure name");
  app.add_option("--preset", preset, "Field preset eps1..eps8");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << qpath::error_json(qpath::UsageError(e.what())).dump() << "\n";
    return 2;
  }

  try {
    qpath::json root = config_path.empty() ? qpath::json::object() : read_json_file(config_path);
    if (!root.is_object())
      throw qpath::ConfigError("", "config root must be an object");
    if (!preset.empty())
      root["field"] = preset;
    if (*seed_opt) {
      root["mc"]["seed"] = seed;
      root["optimizer"]["seed"] = seed;
    }
    if (*sigma_opt) {
      if (root.contains("uncertainty"))
        root["uncertainty"].erase("sigma");
      root["uncertainty"]["sweep"] = sigmas;
    }
    const auto config = qpath::config_from_json(root);
    qpath::RunOptions options;
    options.out_dir = out_dir;
    options.figure = figure;
    const auto result = qpath::run_command(command, config, options);
    qpath::json files = qpath::json::array();
    for (const auto& path : result.files)
      files.push_back(path.string());
    std::cout << qpath::json{{"command", command}, {"files", files}, {"summary", result.summary}}.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << qpath::error_json(e).dump() << "\n";
    return qpath::exit_code_for(e);
  }
}
