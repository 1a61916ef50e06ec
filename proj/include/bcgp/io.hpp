#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bcgp/mcmc.hpp"
#include "bcgp/model.hpp"
#include "bcgp/predict.hpp"

namespace bcgp {

/// Everything a run needs, assembled from a config file plus command-line
/// overrides (command line wins). Unknown keys are a hard error.
struct RunConfig {
  // training data: a CSV with columns x1..xd,y, or a built-in function
  std::string data_csv;
  std::string function_name;
  std::string design = "auto";  // auto | grid | lhs (built-in functions only)
  int design_n = 0;             // 0 = per-function default
  // prediction inputs: a CSV with columns x1..xd, or an equispaced grid (d=1)
  std::string test_csv;
  int grid_n = 0;
  double level = 0.95;
  // run control
  std::string out_dir = "bcgp_out";
  std::uint64_t seed = 0;
  int chains = 1;

  HyperParams hyper;
  ChainConfig chain;

  /// Set one key; throws on unrecognized keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Key=value echo of every recognized option, in canonical order.
  std::map<std::string, std::string> echo() const;
};

/// Parse a flat key=value config file ('#' comments, blank lines allowed).
RunConfig parse_config_file(const std::string& path);

struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

/// Read a training CSV (header x1..xd,y). Malformed input raises an error
/// with row/column diagnostics.
Dataset read_data_csv(const std::string& path);

/// Read prediction inputs (header x1..xd).
Eigen::MatrixXd read_inputs_csv(const std::string& path);

/// FNV-1a hash of the canonical serialization of config echo + training data;
/// embedded in every output file so artifacts cannot be mixed up.
std::uint64_t manifest_hash(const RunConfig& cfg, const Dataset& data);

struct FitResultFiles {
  std::filesystem::path run_dir;
  std::vector<std::filesystem::path> draws_files;  // one per chain
  std::filesystem::path acceptance_file;
  std::filesystem::path widths_file;
  std::filesystem::path manifest_file;
};

/// Resolve the training data named by the config (CSV or built-in design).
Dataset resolve_training_data(const RunConfig& cfg);

/// Build the internal training set (bounds from the function registry when
/// the data is synthetic, from the data range otherwise).
TrainingSet make_training_set(const RunConfig& cfg, const Dataset& data);

/// Fit: run the chain(s) and write draws, acceptance report, final proposal
/// widths and the run manifest under cfg.out_dir.
FitResultFiles run_fit(const RunConfig& cfg);

/// Load a fitted run back: production draws plus the effective config and
/// training data recorded in the manifest.
struct LoadedRun {
  RunConfig config;
  Dataset data;
  std::vector<ModelState> states;
  std::uint64_t hash = 0;
};
LoadedRun load_run(const std::string& run_dir);

/// Predict at new inputs using a fitted run. When `data_csv` is set in cfg it
/// must hash-match the manifest. Writes predictions.csv (one row per test
/// point: inputs, RB mean, draw-average mean, interval, components).
std::filesystem::path run_predict(const RunConfig& cfg, const std::string& run_dir);

/// Component-focused output: inputs, global, local, error, total.
std::filesystem::path run_decompose(const RunConfig& cfg, const std::string& run_dir);

/// Full design -> fit -> predict -> score pipeline for a named benchmark
/// ("bjx" or "wingweight"), including the kriging baselines. Writes an RMSPE
/// table, per-point predictions and (for wingweight) grouped-boxplot
/// summaries of the global component for every input.
std::filesystem::path run_benchmark(const std::string& name, RunConfig cfg);

}  // namespace bcgp
