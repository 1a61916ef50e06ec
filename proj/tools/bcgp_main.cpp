#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bcgp/io.hpp"

namespace {

struct CommonFlags {
  std::string data;
  std::string config;
  std::string out;
  std::string function;
  std::uint64_t seed = 0;
  double level = 0.95;
  int chains = 1;
  bool no_nugget = false;

  CLI::Option* data_opt = nullptr;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* function_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* level_opt = nullptr;
  CLI::Option* chains_opt = nullptr;
  CLI::Option* no_nugget_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  f.data_opt = cmd->add_option("--data", f.data, "Training data CSV (columns x1..xd,y)");
  f.config_opt = cmd->add_option("--config", f.config, "Flat key=value config file");
  f.out_opt = cmd->add_option("--out", f.out, "Output directory (default bcgp_out)");
  f.function_opt =
      cmd->add_option("--function", f.function, "Built-in test function: bjx|wingweight");
  f.seed_opt = cmd->add_option("--seed", f.seed, "RNG seed (default 0)");
  f.level_opt = cmd->add_option("--level", f.level, "Predictive interval level (default 0.95)");
  f.chains_opt = cmd->add_option("--chains", f.chains, "Independent chains to run (default 1)");
  f.no_nugget_opt =
      cmd->add_flag("--no-nugget", f.no_nugget, "Drop the white-noise error process");
}

/// Config file first, then any command-line flags on top (command line wins).
bcgp::RunConfig assemble(const CommonFlags& f) {
  bcgp::RunConfig cfg;
  if (f.config_opt->count() > 0) cfg = bcgp::parse_config_file(f.config);
  if (f.data_opt->count() > 0) cfg.set("data", f.data);
  if (f.function_opt->count() > 0) cfg.set("function", f.function);
  if (f.out_opt->count() > 0) cfg.set("out", f.out);
  if (f.seed_opt->count() > 0) cfg.set("seed", std::to_string(f.seed));
  if (f.level_opt->count() > 0) cfg.set("level", CLI::detail::to_string(f.level));
  if (f.chains_opt->count() > 0) cfg.set("chains", std::to_string(f.chains));
  if (f.no_nugget_opt->count() > 0 && f.no_nugget) cfg.set("include_nugget", "false");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bayesian composite Gaussian process emulator: global+local GP with a latent "
      "log-GP variance process, fitted by Metropolis-within-Gibbs"};
  app.require_subcommand(1);

  CommonFlags fit_flags, predict_flags, decompose_flags, bench_flags;

  CLI::App* fit = app.add_subcommand("fit", "Run the MCMC and write posterior draws");
  add_common(fit, fit_flags);

  CLI::App* predict =
      app.add_subcommand("predict", "Predict at new inputs using a fitted run");
  add_common(predict, predict_flags);
  std::string predict_test, predict_run;
  int predict_grid = 0;
  predict->add_option("--run", predict_run, "Directory of a previous fit (default --out)");
  CLI::Option* predict_test_opt =
      predict->add_option("--test-data", predict_test, "CSV of prediction inputs (x1..xd)");
  CLI::Option* predict_grid_opt =
      predict->add_option("--grid", predict_grid, "Equispaced prediction grid size (d=1)");

  CLI::App* decompose = app.add_subcommand(
      "decompose", "Write the global/local/error decomposition at new inputs");
  add_common(decompose, decompose_flags);
  std::string decompose_test, decompose_run;
  int decompose_grid = 0;
  decompose->add_option("--run", decompose_run, "Directory of a previous fit (default --out)");
  CLI::Option* decompose_test_opt =
      decompose->add_option("--test-data", decompose_test, "CSV of prediction inputs");
  CLI::Option* decompose_grid_opt =
      decompose->add_option("--grid", decompose_grid, "Equispaced prediction grid size (d=1)");

  CLI::App* bench = app.add_subcommand(
      "benchmark", "Design -> fit -> predict -> score for a built-in benchmark");
  std::string bench_name;
  bench->add_option("name", bench_name, "bjx or wingweight")->required();
  add_common(bench, bench_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      const auto files = bcgp::run_fit(assemble(fit_flags));
      std::cout << "wrote " << files.draws_files.front().string() << " ("
                << files.draws_files.size() << " chain(s)) and "
                << files.manifest_file.string() << "\n";
    } else if (predict->parsed()) {
      bcgp::RunConfig cfg = assemble(predict_flags);
      if (predict_test_opt->count() > 0) cfg.set("test_data", predict_test);
      if (predict_grid_opt->count() > 0) cfg.set("grid_n", std::to_string(predict_grid));
      const std::string run_dir = predict_run.empty() ? cfg.out_dir : predict_run;
      std::cout << "wrote " << bcgp::run_predict(cfg, run_dir).string() << "\n";
    } else if (decompose->parsed()) {
      bcgp::RunConfig cfg = assemble(decompose_flags);
      if (decompose_test_opt->count() > 0) cfg.set("test_data", decompose_test);
      if (decompose_grid_opt->count() > 0) cfg.set("grid_n", std::to_string(decompose_grid));
      const std::string run_dir = decompose_run.empty() ? cfg.out_dir : decompose_run;
      std::cout << "wrote " << bcgp::run_decompose(cfg, run_dir).string() << "\n";
    } else if (bench->parsed()) {
      bcgp::RunConfig cfg = assemble(bench_flags);
      if (bench_flags.out_opt->count() == 0) cfg.set("out", "bcgp_benchmark_" + bench_name);
      const auto table = bcgp::run_benchmark(bench_name, cfg);
      std::cout << "wrote " << table.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
