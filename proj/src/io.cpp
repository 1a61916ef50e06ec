#include "bcgp/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "bcgp/kriging.hpp"
#include "bcgp/testbed.hpp"

namespace bcgp {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": cannot parse '" + token + "' as a number");
  }
}

long parse_long(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": cannot parse '" + token + "' as an integer");
  }
}

bool parse_bool(const std::string& token, const std::string& where) {
  if (token == "true" || token == "1") return true;
  if (token == "false" || token == "0") return false;
  throw std::runtime_error(where + ": cannot parse '" + token + "' as true/false");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(trim(token));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr std::uint64_t kPredictStream = 1000003;

}  // namespace

// ------------------------------------------------------------------ config

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string where = "config key '" + key + "'";
  if (key == "data") data_csv = value;
  else if (key == "function") function_name = value;
  else if (key == "design") {
    if (value != "auto" && value != "grid" && value != "lhs")
      throw std::runtime_error(where + ": expected auto|grid|lhs");
    design = value;
  } else if (key == "design_n") design_n = static_cast<int>(parse_long(value, where));
  else if (key == "test_data") test_csv = value;
  else if (key == "grid_n") grid_n = static_cast<int>(parse_long(value, where));
  else if (key == "level") level = parse_double(value, where);
  else if (key == "out") out_dir = value;
  else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "chains") chains = static_cast<int>(parse_long(value, where));
  else if (key == "include_nugget") hyper.include_nugget = parse_bool(value, where);
  else if (key == "alpha_omega") hyper.alpha_omega = parse_double(value, where);
  else if (key == "beta_omega") hyper.beta_omega = parse_double(value, where);
  else if (key == "l_omega") hyper.l_omega = parse_double(value, where);
  else if (key == "u_omega") hyper.u_omega = parse_double(value, where);
  else if (key == "alpha_g") hyper.alpha_g = parse_double(value, where);
  else if (key == "beta_g") hyper.beta_g = parse_double(value, where);
  else if (key == "alpha_l") hyper.alpha_l = parse_double(value, where);
  else if (key == "beta_l") hyper.beta_l = parse_double(value, where);
  else if (key == "a_eps") hyper.a_eps = parse_double(value, where);
  else if (key == "b_eps") hyper.b_eps = parse_double(value, where);
  else if (key == "beta_v") hyper.beta_v = parse_double(value, where);
  else if (key == "tau2_v") hyper.tau2_v = parse_double(value, where);
  else if (key == "a_sigma2v") hyper.a_sigma2v = parse_double(value, where);
  else if (key == "b_sigma2v") hyper.b_sigma2v = parse_double(value, where);
  else if (key == "alpha_rhov") hyper.alpha_rhov = parse_double(value, where);
  else if (key == "beta_rhov") hyper.beta_rhov = parse_double(value, where);
  else if (key == "k_g") hyper.k_g = parse_double(value, where);
  else if (key == "k_l") hyper.k_l = parse_double(value, where);
  else if (key == "k_v") hyper.k_v = parse_double(value, where);
  else if (key == "n_adapt") chain.n_adapt = static_cast<int>(parse_long(value, where));
  else if (key == "num_updates") chain.num_updates = static_cast<int>(parse_long(value, where));
  else if (key == "n_burn") chain.n_burn = static_cast<int>(parse_long(value, where));
  else if (key == "n_mcmc") chain.n_mcmc = static_cast<int>(parse_long(value, where));
  else if (key == "target_lo") chain.target_lo = parse_double(value, where);
  else if (key == "target_hi") chain.target_hi = parse_double(value, where);
  else if (key == "target_c") chain.target_c = parse_double(value, where);
  else if (key == "tau2_proposal") chain.tau2_proposal = parse_double(value, where);
  else if (key == "n_prop") chain.n_prop = static_cast<int>(parse_long(value, where));
  else if (key == "m") chain.m = static_cast<int>(parse_long(value, where));
  else if (key == "small_n_threshold")
    chain.small_n_threshold = static_cast<int>(parse_long(value, where));
  else if (key == "prior_only") chain.prior_only = parse_bool(value, where);
  else
    throw std::runtime_error("unrecognized config key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e;
  e["data"] = data_csv;
  e["function"] = function_name;
  e["design"] = design;
  e["design_n"] = std::to_string(design_n);
  e["test_data"] = test_csv;
  e["grid_n"] = std::to_string(grid_n);
  e["level"] = fmt(level);
  e["out"] = out_dir;
  e["seed"] = std::to_string(seed);
  e["chains"] = std::to_string(chains);
  e["include_nugget"] = hyper.include_nugget ? "true" : "false";
  e["alpha_omega"] = fmt(hyper.alpha_omega);
  e["beta_omega"] = fmt(hyper.beta_omega);
  e["l_omega"] = fmt(hyper.l_omega);
  e["u_omega"] = fmt(hyper.u_omega);
  e["alpha_g"] = fmt(hyper.alpha_g);
  e["beta_g"] = fmt(hyper.beta_g);
  e["alpha_l"] = fmt(hyper.alpha_l);
  e["beta_l"] = fmt(hyper.beta_l);
  e["a_eps"] = fmt(hyper.a_eps);
  e["b_eps"] = fmt(hyper.b_eps);
  e["beta_v"] = fmt(hyper.beta_v);
  e["tau2_v"] = fmt(hyper.tau2_v);
  e["a_sigma2v"] = fmt(hyper.a_sigma2v);
  e["b_sigma2v"] = fmt(hyper.b_sigma2v);
  e["alpha_rhov"] = fmt(hyper.alpha_rhov);
  e["beta_rhov"] = fmt(hyper.beta_rhov);
  e["k_g"] = fmt(hyper.k_g);
  e["k_l"] = fmt(hyper.k_l);
  e["k_v"] = fmt(hyper.k_v);
  e["n_adapt"] = std::to_string(chain.n_adapt);
  e["num_updates"] = std::to_string(chain.num_updates);
  e["n_burn"] = std::to_string(chain.n_burn);
  e["n_mcmc"] = std::to_string(chain.n_mcmc);
  e["target_lo"] = fmt(chain.target_lo);
  e["target_hi"] = fmt(chain.target_hi);
  e["target_c"] = fmt(chain.target_c);
  e["tau2_proposal"] = fmt(chain.tau2_proposal);
  e["n_prop"] = std::to_string(chain.n_prop);
  e["m"] = std::to_string(chain.m);
  e["small_n_threshold"] = std::to_string(chain.small_n_threshold);
  e["prior_only"] = chain.prior_only ? "true" : "false";
  return e;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": expected key=value");
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

// -------------------------------------------------------------------- CSV

namespace {

std::vector<std::vector<double>> read_csv_rows(const std::string& path,
                                               std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto tokens = split_csv_line(stripped);
    if (!have_header) {
      header = tokens;
      have_header = true;
      continue;
    }
    if (tokens.size() != header.size())
      throw std::runtime_error(path + " row " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " columns, found " +
                               std::to_string(tokens.size()));
    std::vector<double> row(tokens.size());
    for (std::size_t c = 0; c < tokens.size(); ++c)
      row[c] = parse_double(tokens[c], path + " row " + std::to_string(line_no) + " column " +
                                           std::to_string(c + 1));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error(path + ": missing header row");
  return rows;
}

void check_x_columns(const std::vector<std::string>& header, std::size_t count,
                     const std::string& path) {
  for (std::size_t j = 0; j < count; ++j) {
    const std::string expected = "x" + std::to_string(j + 1);
    if (header[j] != expected)
      throw std::runtime_error(path + ": expected column '" + expected + "', found '" +
                               header[j] + "'");
  }
}

}  // namespace

Dataset read_data_csv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_csv_rows(path, header);
  if (header.empty() || header.back() != "y")
    throw std::runtime_error(path + ": missing response column 'y' (must be last)");
  if (header.size() < 2) throw std::runtime_error(path + ": no input columns");
  check_x_columns(header, header.size() - 1, path);
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), d);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j)
      out.x(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    out.y[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return out;
}

Eigen::MatrixXd read_inputs_csv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_csv_rows(path, header);
  if (header.empty()) throw std::runtime_error(path + ": no columns");
  // A trailing y column is tolerated and ignored.
  std::size_t d = header.size();
  if (header.back() == "y") --d;
  if (d == 0) throw std::runtime_error(path + ": no input columns");
  check_x_columns(header, d, path);
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

// ---------------------------------------------------------------- manifest

std::uint64_t manifest_hash(const RunConfig& cfg, const Dataset& data) {
  // Presentation-only keys do not change what was fitted and stay out of
  // the hash; prediction-time options are re-supplied per request.
  static const std::set<std::string> excluded = {"out", "test_data", "grid_n", "level"};
  std::string canon;
  for (const auto& [k, v] : cfg.echo())
    if (!excluded.count(k)) canon += k + "=" + v + "\n";
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) canon += fmt(data.x(i, j)) + ",";
    canon += fmt(data.y[i]) + "\n";
  }
  return fnv1a(canon);
}

Dataset resolve_training_data(const RunConfig& cfg) {
  if (!cfg.data_csv.empty()) return read_data_csv(cfg.data_csv);
  if (cfg.function_name.empty())
    throw std::runtime_error("no training data: set 'data' or 'function'");
  const TestFunction& fn = test_function(cfg.function_name);
  const int n = cfg.design_n > 0 ? cfg.design_n : (fn.dim == 1 ? 17 : 50);
  std::string design = cfg.design;
  if (design == "auto") design = fn.dim == 1 ? "grid" : "lhs";

  Dataset out;
  if (design == "grid") {
    if (fn.dim != 1) throw std::runtime_error("design=grid requires a 1-d function");
    out.x.resize(n, 1);
    for (int i = 0; i < n; ++i)
      out.x(i, 0) = fn.lo[0] + (fn.hi[0] - fn.lo[0]) * i / static_cast<double>(n - 1);
  } else {
    const Eigen::MatrixXd unit = lhs_maximin(n, fn.dim, cfg.seed);
    out.x.resize(n, fn.dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < fn.dim; ++j)
        out.x(i, j) = fn.lo[j] + (fn.hi[j] - fn.lo[j]) * unit(i, j);
  }
  out.y = fn.evaluate_all(out.x);
  return out;
}

TrainingSet make_training_set(const RunConfig& cfg, const Dataset& data) {
  if (!cfg.function_name.empty()) {
    const TestFunction& fn = test_function(cfg.function_name);
    return TrainingSet::create(data.x, data.y, fn.lo, fn.hi);
  }
  return TrainingSet::create(data.x, data.y);
}

// ------------------------------------------------------------------- files

namespace {

void write_draws_file(const std::filesystem::path& path, const std::vector<ModelState>& states,
                      Eigen::Index d, Eigen::Index n, std::uint64_t hash) {
  std::ofstream out(path);
  out << "# bcgp draws v1\n";
  out << "# manifest_hash=" << fmt_hash(hash) << "\n";
  out << "# latent variance stored on the log scale: w_i = log sigma2(x_i)\n";
  out << "beta0,omega";
  for (Eigen::Index j = 1; j <= d; ++j) out << ",rho_g_" << j;
  for (Eigen::Index j = 1; j <= d; ++j) out << ",rho_l_" << j;
  out << ",sigma2_eps,mu_v,sigma2_v";
  for (Eigen::Index j = 1; j <= d; ++j) out << ",rho_v_" << j;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",w_" << i;
  out << "\n";
  for (const ModelState& s : states) {
    out << fmt(s.beta0) << ',' << fmt(s.omega);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << fmt(s.rho_g[j]);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << fmt(s.rho_l[j]);
    out << ',' << fmt(s.sigma2_eps) << ',' << fmt(s.mu_v) << ',' << fmt(s.sigma2_v);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << fmt(s.rho_v[j]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << fmt(s.w[i]);
    out << "\n";
  }
}

void write_acceptance_file(const std::filesystem::path& path, const ChainOutput& chain,
                           std::uint64_t hash) {
  std::ofstream out(path);
  out << "# manifest_hash=" << fmt_hash(hash) << "\n";
  out << "phase,parameter,proposals,accepts,rate\n";
  auto dump = [&](const char* phase, const std::vector<AcceptanceRecord>& recs) {
    for (const auto& r : recs)
      out << phase << ',' << r.name << ',' << r.proposals << ',' << r.accepts << ','
          << fmt(r.rate()) << "\n";
  };
  dump("calibration", chain.calibration_acceptance);
  dump("burnin", chain.burnin_acceptance);
  dump("production", chain.production_acceptance);
}

void write_widths_file(const std::filesystem::path& path, const ProposalWidths& w,
                       std::uint64_t hash) {
  std::ofstream out(path);
  out << "# manifest_hash=" << fmt_hash(hash) << "\n";
  out << "parameter,width\n";
  out << "omega," << fmt(w.omega) << "\n";
  for (Eigen::Index j = 0; j < w.rho_g.size(); ++j)
    out << "rho_g[" << j << "]," << fmt(w.rho_g[j]) << "\n";
  for (Eigen::Index j = 0; j < w.rho_l.size(); ++j)
    out << "rho_l[" << j << "]," << fmt(w.rho_l[j]) << "\n";
  out << "sigma2_eps," << fmt(w.sigma2_eps) << "\n";
  for (Eigen::Index j = 0; j < w.rho_v.size(); ++j)
    out << "rho_v[" << j << "]," << fmt(w.rho_v[j]) << "\n";
}

void write_manifest(const std::filesystem::path& path, const RunConfig& cfg,
                    const Dataset& data, const TrainingSet& ts, std::uint64_t hash) {
  json j;
  j["format"] = "bcgp-run-v1";
  j["hash"] = fmt_hash(hash);
  j["seed"] = cfg.seed;
  j["n"] = data.x.rows();
  j["d"] = data.x.cols();
  j["phases"] = {{"n_adapt", cfg.chain.n_adapt},
                 {"num_updates", cfg.chain.num_updates},
                 {"n_burn", cfg.chain.n_burn},
                 {"n_mcmc", cfg.chain.n_mcmc}};
  j["config"] = cfg.echo();
  json rows = json::array();
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) row.push_back(data.x(i, c));
    rows.push_back(row);
  }
  j["data"]["x"] = rows;
  j["data"]["y"] = std::vector<double>(data.y.data(), data.y.data() + data.y.size());
  const auto& tr = ts.transform();
  j["data"]["input_lo"] =
      std::vector<double>(tr.input_lo.data(), tr.input_lo.data() + tr.input_lo.size());
  j["data"]["input_hi"] =
      std::vector<double>(tr.input_hi.data(), tr.input_hi.data() + tr.input_hi.size());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_predictions_file(const std::filesystem::path& path,
                            const std::vector<PredictionResult>& results, Eigen::Index d,
                            std::uint64_t hash, double level, bool decompose_only) {
  std::ofstream out(path);
  out << "# bcgp predictions v1\n";
  out << "# manifest_hash=" << fmt_hash(hash) << "\n";
  out << "# level=" << fmt(level) << "\n";
  for (Eigen::Index j = 1; j <= d; ++j) out << "x" << j << ',';
  if (decompose_only)
    out << "global,local,error,total\n";
  else
    out << "rb_mean,draw_mean,lo,hi,global,local,error\n";
  for (const auto& r : results) {
    for (Eigen::Index j = 0; j < d; ++j) out << fmt(r.x_star[j]) << ',';
    if (decompose_only)
      out << fmt(r.comp_global) << ',' << fmt(r.comp_local) << ',' << fmt(r.comp_error) << ','
          << fmt(r.rb_mean) << "\n";
    else
      out << fmt(r.rb_mean) << ',' << fmt(r.draw_mean) << ',' << fmt(r.lo) << ',' << fmt(r.hi)
          << ',' << fmt(r.comp_global) << ',' << fmt(r.comp_local) << ',' << fmt(r.comp_error)
          << "\n";
  }
}

}  // namespace

FitResultFiles run_fit(const RunConfig& cfg) {
  if (cfg.chains < 1) throw std::runtime_error("chains must be >= 1");
  const Dataset data = resolve_training_data(cfg);
  const TrainingSet ts = make_training_set(cfg, data);
  const std::uint64_t hash = manifest_hash(cfg, data);

  std::vector<ChainConfig> chain_cfgs(static_cast<std::size_t>(cfg.chains), cfg.chain);
  for (int k = 0; k < cfg.chains; ++k)
    chain_cfgs[static_cast<std::size_t>(k)].seed =
        (k == 0) ? cfg.seed : Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(k));

  std::vector<ChainOutput> outputs(static_cast<std::size_t>(cfg.chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.chains));
  std::vector<std::thread> workers;
  for (int k = 0; k < cfg.chains; ++k) {
    workers.emplace_back([&, k] {
      try {
        outputs[static_cast<std::size_t>(k)] =
            run_chain(ts, cfg.hyper, chain_cfgs[static_cast<std::size_t>(k)]);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  FitResultFiles files;
  files.run_dir = cfg.out_dir;
  std::filesystem::create_directories(files.run_dir);
  for (int k = 0; k < cfg.chains; ++k) {
    const std::string suffix = (k == 0) ? "" : "_chain" + std::to_string(k + 1);
    const auto draws_path = files.run_dir / ("draws" + suffix + ".csv");
    write_draws_file(draws_path, outputs[static_cast<std::size_t>(k)].states, ts.d(), ts.n(),
                     hash);
    files.draws_files.push_back(draws_path);
    write_acceptance_file(files.run_dir / ("acceptance" + suffix + ".csv"),
                          outputs[static_cast<std::size_t>(k)], hash);
    write_widths_file(files.run_dir / ("widths" + suffix + ".csv"),
                      outputs[static_cast<std::size_t>(k)].final_widths, hash);
  }
  files.acceptance_file = files.run_dir / "acceptance.csv";
  files.widths_file = files.run_dir / "widths.csv";
  files.manifest_file = files.run_dir / "manifest.json";
  write_manifest(files.manifest_file, cfg, data, ts, hash);
  return files;
}

LoadedRun load_run(const std::string& run_dir) {
  const std::filesystem::path dir(run_dir);
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
  json j;
  in >> j;
  LoadedRun run;
  for (const auto& [k, v] : j.at("config").items())
    run.config.set(k, v.get<std::string>());
  const auto n = j.at("n").get<Eigen::Index>();
  const auto d = j.at("d").get<Eigen::Index>();
  run.data.x.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) run.data.x(i, c) = j["data"]["x"][i][c].get<double>();
  run.data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) run.data.y[i] = j["data"]["y"][i].get<double>();
  run.hash = std::stoull(j.at("hash").get<std::string>(), nullptr, 16);
  if (manifest_hash(run.config, run.data) != run.hash)
    throw std::runtime_error(run_dir + ": manifest hash does not match its contents");

  // Draws from the first chain.
  std::ifstream draws(dir / "draws.csv");
  if (!draws) throw std::runtime_error("cannot open " + (dir / "draws.csv").string());
  std::string line;
  bool have_header = false;
  while (std::getline(draws, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped[0] == '#') {
      const std::string prefix = "# manifest_hash=";
      if (stripped.rfind(prefix, 0) == 0) {
        const auto h = std::stoull(stripped.substr(prefix.size()), nullptr, 16);
        if (h != run.hash)
          throw std::runtime_error(run_dir + ": draws file does not match the manifest");
      }
      continue;
    }
    if (!have_header) {
      have_header = true;
      continue;
    }
    const auto tokens = split_csv_line(stripped);
    const std::size_t expected = 5 + 3 * static_cast<std::size_t>(d) + static_cast<std::size_t>(n);
    if (tokens.size() != expected)
      throw std::runtime_error(run_dir + ": draws row has " + std::to_string(tokens.size()) +
                               " fields, expected " + std::to_string(expected));
    ModelState s;
    std::size_t c = 0;
    auto next = [&] { return parse_double(tokens[c++], "draws.csv"); };
    s.beta0 = next();
    s.omega = next();
    s.rho_g.resize(d);
    for (Eigen::Index jj = 0; jj < d; ++jj) s.rho_g[jj] = next();
    s.rho_l.resize(d);
    for (Eigen::Index jj = 0; jj < d; ++jj) s.rho_l[jj] = next();
    s.sigma2_eps = next();
    s.mu_v = next();
    s.sigma2_v = next();
    s.rho_v.resize(d);
    for (Eigen::Index jj = 0; jj < d; ++jj) s.rho_v[jj] = next();
    s.w.resize(n);
    for (Eigen::Index ii = 0; ii < n; ++ii) s.w[ii] = next();
    run.states.push_back(std::move(s));
  }
  if (run.states.empty()) throw std::runtime_error(run_dir + ": draws file holds no draws");
  return run;
}

namespace {

Eigen::MatrixXd resolve_test_inputs(const RunConfig& request, const TrainingSet& ts) {
  if (!request.test_csv.empty()) {
    Eigen::MatrixXd x = read_inputs_csv(request.test_csv);
    if (x.cols() != ts.d())
      throw std::runtime_error("test inputs have " + std::to_string(x.cols()) +
                               " columns, training data has " + std::to_string(ts.d()));
    return x;
  }
  if (request.grid_n > 1) {
    if (ts.d() != 1) throw std::runtime_error("grid_n prediction requires d = 1");
    const double lo = ts.transform().input_lo[0];
    const double hi = ts.transform().input_hi[0];
    Eigen::MatrixXd x(request.grid_n, 1);
    for (int i = 0; i < request.grid_n; ++i)
      x(i, 0) = lo + (hi - lo) * i / static_cast<double>(request.grid_n - 1);
    return x;
  }
  throw std::runtime_error("no test inputs: set 'test_data' or 'grid_n'");
}

std::filesystem::path predict_to_file(const RunConfig& request, const std::string& run_dir,
                                      bool decompose_only) {
  const LoadedRun run = load_run(run_dir);
  if (!request.data_csv.empty()) {
    const Dataset fresh = read_data_csv(request.data_csv);
    if (manifest_hash(run.config, fresh) != run.hash)
      throw std::runtime_error(
          "training data does not match the fitted run (manifest hash mismatch)");
  }
  const TrainingSet ts = make_training_set(run.config, run.data);
  const Eigen::MatrixXd x_test = resolve_test_inputs(request, ts);
  const double level = request.level;
  const auto results =
      predict_points(x_test, run.states, ts, run.config.hyper, level,
                     Rng::derive_seed(run.config.seed, kPredictStream), false);
  const auto path =
      std::filesystem::path(run_dir) / (decompose_only ? "decompose.csv" : "predictions.csv");
  write_predictions_file(path, results, ts.d(), run.hash, level, decompose_only);
  return path;
}

}  // namespace

std::filesystem::path run_predict(const RunConfig& cfg, const std::string& run_dir) {
  return predict_to_file(cfg, run_dir, false);
}

std::filesystem::path run_decompose(const RunConfig& cfg, const std::string& run_dir) {
  return predict_to_file(cfg, run_dir, true);
}

// --------------------------------------------------------------- benchmark

std::filesystem::path run_benchmark(const std::string& name, RunConfig cfg) {
  const TestFunction& fn = test_function(name);
  cfg.function_name = name;
  cfg.data_csv.clear();
  if (cfg.design_n == 0) cfg.design_n = (name == "bjx") ? 17 : 50;
  // Benchmark phase defaults: the wingweight case runs longer burn-in and
  // production when the generic defaults were left untouched.
  if (name == "wingweight" && cfg.chain.n_burn == 1000 && cfg.chain.n_mcmc == 2000) {
    cfg.chain.n_burn = 2000;
    cfg.chain.n_mcmc = 3000;
  }

  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);

  // Training data and test inputs.
  const Dataset data = resolve_training_data(cfg);
  const TrainingSet ts = make_training_set(cfg, data);
  const std::uint64_t hash = manifest_hash(cfg, data);
  Eigen::MatrixXd x_test;
  if (name == "bjx") {
    const int g = cfg.grid_n > 1 ? cfg.grid_n : 101;
    x_test.resize(g, 1);
    for (int i = 0; i < g; ++i)
      x_test(i, 0) = fn.lo[0] + (fn.hi[0] - fn.lo[0]) * i / static_cast<double>(g - 1);
  } else {
    const int n_test = cfg.grid_n > 1 ? cfg.grid_n : 150;
    const Eigen::MatrixXd unit = sobol_points(n_test, fn.dim);
    x_test.resize(n_test, fn.dim);
    for (int i = 0; i < n_test; ++i)
      for (int j = 0; j < fn.dim; ++j)
        x_test(i, j) = fn.lo[j] + (fn.hi[j] - fn.lo[j]) * unit(i, j);
  }
  const Eigen::VectorXd truth = fn.evaluate_all(x_test);

  // BCGP pipeline.
  ChainConfig chain_cfg = cfg.chain;
  chain_cfg.seed = cfg.seed;
  const ChainOutput chain = run_chain(ts, cfg.hyper, chain_cfg);
  const auto bcgp_results =
      predict_points(x_test, chain.states, ts, cfg.hyper, cfg.level,
                     Rng::derive_seed(cfg.seed, kPredictStream), false);
  Eigen::VectorXd bcgp_pred(x_test.rows());
  for (Eigen::Index i = 0; i < x_test.rows(); ++i) bcgp_pred[i] = bcgp_results[i].rb_mean;

  write_draws_file(out_dir / "draws.csv", chain.states, ts.d(), ts.n(), hash);
  write_acceptance_file(out_dir / "acceptance.csv", chain, hash);
  write_widths_file(out_dir / "widths.csv", chain.final_widths, hash);
  write_manifest(out_dir / "manifest.json", cfg, data, ts, hash);
  write_predictions_file(out_dir / "predictions_bcgp.csv", bcgp_results, ts.d(), hash, cfg.level,
                         false);

  // Kriging baselines: constant mean everywhere, cubic mean for the 1-d
  // benchmark, linear mean for the 10-d one.
  const boost::math::normal_distribution<double> std_normal;
  const double z = boost::math::quantile(std_normal, 1.0 - 0.5 * (1.0 - cfg.level));
  struct Baseline {
    std::string label;
    MeanBasis basis;
    double rmspe_value = 0.0;
    double mean_rel_err = 0.0;
  };
  std::vector<Baseline> baselines = {{"kriging_constant", MeanBasis::Constant}};
  baselines.push_back(name == "bjx" ? Baseline{"kriging_cubic", MeanBasis::Cubic}
                                    : Baseline{"kriging_linear", MeanBasis::Linear});

  // The 10-d benchmark's published baselines were fit by REML; the 1-d one
  // is fine under plain ML.
  const KrigingEstimator estimator =
      (name == "wingweight") ? KrigingEstimator::Reml : KrigingEstimator::MaximumLikelihood;
  for (auto& b : baselines) {
    const KrigingModel model = fit_kriging(ts, b.basis, 0.0, estimator);
    Eigen::VectorXd pred(x_test.rows());
    std::ofstream out(out_dir / ("predictions_" + b.label + ".csv"));
    out << "# manifest_hash=" << fmt_hash(hash) << "\n";
    for (Eigen::Index j = 1; j <= ts.d(); ++j) out << "x" << j << ',';
    out << "mean,lo,hi\n";
    for (Eigen::Index i = 0; i < x_test.rows(); ++i) {
      const auto [mean, var] = model.predict(x_test.row(i).transpose());
      pred[i] = mean;
      const double sd = std::sqrt(std::max(0.0, var));
      for (Eigen::Index j = 0; j < ts.d(); ++j) out << fmt(x_test(i, j)) << ',';
      out << fmt(mean) << ',' << fmt(mean - z * sd) << ',' << fmt(mean + z * sd) << "\n";
    }
    b.rmspe_value = rmspe(pred, truth);
    b.mean_rel_err = relative_errors(pred, truth).mean();
  }

  // RMSPE table with the published values for this benchmark alongside.
  const double bcgp_rmspe = rmspe(bcgp_pred, truth);
  const double bcgp_rel = relative_errors(bcgp_pred, truth).mean();
  std::ofstream table(out_dir / "rmspe.csv");
  table << "# manifest_hash=" << fmt_hash(hash) << "\n";
  if (name == "bjx")
    table << "# published reference (same benchmark): cgp rmspe 0.023\n";
  else
    table << "# published reference (same benchmark): cgp rmspe 2.76, bcgp mean relative error "
             "0.0097\n";
  table << "predictor,rmspe,mean_rel_err,reference_rmspe\n";
  const double ref_bcgp = name == "bjx" ? 0.014 : 3.62;
  const double ref_const = name == "bjx" ? 0.067 : 1.03;
  const double ref_other = name == "bjx" ? 0.061 : 0.91;
  table << "bcgp," << fmt(bcgp_rmspe) << ',' << fmt(bcgp_rel) << ',' << fmt(ref_bcgp) << "\n";
  table << baselines[0].label << ',' << fmt(baselines[0].rmspe_value) << ','
        << fmt(baselines[0].mean_rel_err) << ',' << fmt(ref_const) << "\n";
  table << baselines[1].label << ',' << fmt(baselines[1].rmspe_value) << ','
        << fmt(baselines[1].mean_rel_err) << ',' << fmt(ref_other) << "\n";

  // Grouped-boxplot summaries of the global component for every input.
  if (name == "wingweight") {
    Eigen::VectorXd global(x_test.rows());
    for (Eigen::Index i = 0; i < x_test.rows(); ++i) global[i] = bcgp_results[i].comp_global;
    for (int j = 0; j < fn.dim; ++j) {
      std::ofstream out(out_dir / ("groups_x" + std::to_string(j + 1) + ".csv"));
      out << "# manifest_hash=" << fmt_hash(hash) << "\n";
      out << "# grouped global-component predictions over 8 equal-width bins of x"
          << (j + 1) << "\n";
      out << "bin_lo,bin_hi,count,q1,median,q3\n";
      const auto bins = group_by_bins(x_test.col(j), global, 8, fn.lo[j], fn.hi[j]);
      for (const auto& b : bins)
        out << fmt(b.bin_lo) << ',' << fmt(b.bin_hi) << ',' << b.count << ',' << fmt(b.q1) << ','
            << fmt(b.median) << ',' << fmt(b.q3) << "\n";
    }
  }
  return out_dir / "rmspe.csv";
}

}  // namespace bcgp
