#include "swe/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "swe/experiments.hpp"

namespace swe::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  int code;
  ConfigError(int code_, const std::string& msg) : std::runtime_error(msg), code(code_) {}
};

// All tunables of a study command, defaults applied per command. The manifest
// persists exactly this set.
struct Options {
  std::string command;
  std::vector<double> alpha;
  std::vector<double> hurst;
  double rho = 0.25;
  double horizon = 0.5;
  double epsilon = 0.01;
  std::vector<int> n_list;
  int modes = 256;
  int samples = 200;
  int refinement = 2;
  int threads = 0;
  std::uint64_t seed = 1;
  std::string scheme = "low";  // low | high | both (both: deterministic only)
  std::string f = "sin";       // sin | zero
  std::string outdir = "out";
  // noise-stats only
  int draws = 10000;
  int stat_steps = 4;
  double stat_tau = 1.0;
  bool dump_paths = false;
  // deterministic only
  bool dump_trajectory = false;
};

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(exit_bad_value, "unparsable value for '" + key + "': " + value);
  }
}

long long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(exit_bad_value, "unparsable value for '" + key + "': " + value);
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(exit_bad_value, "empty list for '" + key + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) {
    out.push_back(static_cast<int>(parse_integer(key, item)));
  }
  if (out.empty()) throw ConfigError(exit_bad_value, "empty list for '" + key + "'");
  return out;
}

// Flat key=value configuration file; '#' starts a comment.
void apply_config_file(Options& opts, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(exit_bad_value, "cannot open config file: " + path);
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(exit_bad_value, "config line " + std::to_string(line_no) +
                                            ": expected key=value");
    }
    const std::string key = strip(stripped.substr(0, eq));
    const std::string value = strip(stripped.substr(eq + 1));

    if (key == "alpha") {
      opts.alpha = parse_double_list(key, value);
    } else if (key == "hurst") {
      opts.hurst = parse_double_list(key, value);
    } else if (key == "rho") {
      opts.rho = parse_double(key, value);
    } else if (key == "T") {
      opts.horizon = parse_double(key, value);
    } else if (key == "N_list") {
      opts.n_list = parse_int_list(key, value);
    } else if (key == "M") {
      opts.modes = static_cast<int>(parse_integer(key, value));
    } else if (key == "samples") {
      opts.samples = static_cast<int>(parse_integer(key, value));
    } else if (key == "seed") {
      opts.seed = static_cast<std::uint64_t>(parse_integer(key, value));
    } else if (key == "scheme") {
      opts.scheme = value;
    } else if (key == "f") {
      opts.f = value;
    } else if (key == "epsilon") {
      opts.epsilon = parse_double(key, value);
    } else if (key == "a") {
      opts.refinement = static_cast<int>(parse_integer(key, value));
    } else if (key == "outdir") {
      opts.outdir = value;
    } else {
      throw ConfigError(exit_unknown_key, "unknown config key: " + key);
    }
  }
}

void check_constraints(const Options& opts) {
  for (double a : opts.alpha) {
    if (!(a > 0.0) || a > 1.0) {
      throw ConfigError(exit_constraint, "field 'alpha' must lie in (0, 1]");
    }
  }
  for (double h : opts.hurst) {
    if (!(h > 0.5) || !(h < 1.0)) {
      throw ConfigError(exit_constraint, "field 'hurst' must lie in (1/2, 1)");
    }
  }
  if (opts.rho < 0.0) throw ConfigError(exit_constraint, "field 'rho' must be >= 0");
  if (!(opts.horizon > 0.0)) {
    throw ConfigError(exit_constraint, "field 'T' must be positive");
  }
  if (!(opts.epsilon > 0.0)) {
    throw ConfigError(exit_constraint, "field 'epsilon' must be positive");
  }
  if (opts.refinement < 2) throw ConfigError(exit_constraint, "field 'a' must be >= 2");
  if (opts.modes < 1) throw ConfigError(exit_constraint, "field 'M' must be >= 1");
  if (opts.samples < 1) {
    throw ConfigError(exit_constraint, "field 'samples' must be >= 1");
  }
  if (opts.n_list.empty()) {
    throw ConfigError(exit_constraint, "field 'N_list' must be non-empty");
  }
  for (std::size_t i = 0; i < opts.n_list.size(); ++i) {
    if (opts.n_list[i] < 1) {
      throw ConfigError(exit_constraint, "field 'N_list' entries must be positive");
    }
    if (i > 0 && opts.n_list[i] != opts.refinement * opts.n_list[i - 1]) {
      throw ConfigError(exit_constraint,
                        "field 'N_list' must be a geometric chain with ratio a");
    }
  }
  if (opts.scheme != "low" && opts.scheme != "high" && opts.scheme != "both") {
    throw ConfigError(exit_constraint, "field 'scheme' must be low, high or both");
  }
  if (opts.f != "sin" && opts.f != "zero") {
    throw ConfigError(exit_constraint, "field 'f' must be sin or zero");
  }
  if (opts.threads < 0) {
    throw ConfigError(exit_constraint, "field 'threads' must be >= 0");
  }
  if (opts.draws < 2) throw ConfigError(exit_constraint, "field 'draws' must be >= 2");
  if (opts.stat_steps < 1) {
    throw ConfigError(exit_constraint, "field 'steps' must be >= 1");
  }
  if (!(opts.stat_tau > 0.0)) {
    throw ConfigError(exit_constraint, "field 'tau' must be positive");
  }
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json options_json(const Options& opts) {
  json j;
  j["alpha"] = opts.alpha;
  j["hurst"] = opts.hurst;
  j["rho"] = opts.rho;
  j["T"] = opts.horizon;
  j["N_list"] = opts.n_list;
  j["M"] = opts.modes;
  j["samples"] = opts.samples;
  j["seed"] = opts.seed;
  j["scheme"] = opts.scheme;
  j["f"] = opts.f;
  j["epsilon"] = opts.epsilon;
  j["a"] = opts.refinement;
  j["threads"] = opts.threads;
  j["outdir"] = opts.outdir;
  if (opts.command == "noise-stats") {
    j["draws"] = opts.draws;
    j["steps"] = opts.stat_steps;
    j["tau"] = opts.stat_tau;
  }
  return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
}

void write_manifest(const Options& opts) {
  json manifest;
  manifest["command"] = opts.command;
  manifest["config"] = options_json(opts);
  manifest["seed"] = opts.seed;
  manifest["outdir"] = opts.outdir;
  manifest["timestamp"] = timestamp_utc();
  write_text_file(fs::path(opts.outdir) / "manifest.json", manifest.dump(2) + "\n");
}

json report_json(const experiments::RateReport& report) {
  json j;
  j["scheme"] = schemes::scheme_name(report.scheme);
  j["alpha"] = report.alpha;
  j["hurst"] = report.hurst;
  j["rho"] = report.rho;
  j["T"] = report.horizon;
  j["M"] = report.modes;
  j["samples"] = report.samples;
  j["a"] = report.refinement;
  j["seed"] = report.seed;
  j["resolutions"] = report.resolutions;
  j["errors"] = report.errors;
  j["std_errors"] = report.std_errors;
  json orders = json::array();
  for (std::size_t i = 0; i < report.orders.size(); ++i) {
    if (i == 0 || !std::isfinite(report.orders[i])) {
      orders.push_back(nullptr);
    } else {
      orders.push_back(report.orders[i]);
    }
  }
  j["orders"] = orders;
  j["wall_seconds"] = report.wall_seconds;
  return j;
}

schemes::ModelConfig base_config(const Options& opts, double alpha, double hurst) {
  schemes::ModelConfig config;
  config.alpha = alpha;
  config.hurst = hurst;
  config.rho = opts.rho;
  config.horizon = opts.horizon;
  config.epsilon = opts.epsilon;
  config.modes = opts.modes;
  config.f = opts.f == "zero" ? schemes::Nonlinearity::zero()
                              : schemes::Nonlinearity::sine();
  if (opts.modes < 3) {
    throw ConfigError(exit_constraint,
                      "field 'M' must be >= 3 to carry the sin(2 pi x)/sin(3 pi x) data");
  }
  const spectral::EigenBasis basis = spectral::build_eigenbasis(opts.modes);
  config.u0 = spectral::project_mode(basis, 2, 1.0 / std::numbers::sqrt2);
  config.v0 = spectral::project_mode(basis, 3, 1.0 / (2.0 * std::numbers::sqrt2));
  return config;
}

void print_report_table(const experiments::RateReport& report) {
  std::printf("  alpha=%g H=%g rho=%g M=%d samples=%d (%.1fs)\n", report.alpha,
              report.hurst, report.rho, report.modes, report.samples,
              report.wall_seconds);
  std::printf("    %8s  %12s  %12s  %8s\n", "N", "error", "stderr", "order");
  for (std::size_t i = 0; i < report.resolutions.size(); ++i) {
    if (i == 0) {
      std::printf("    %8d  %12.4e  %12.2e  %8s\n", report.resolutions[i],
                  report.errors[i], report.std_errors[i], "-");
    } else {
      std::printf("    %8d  %12.4e  %12.2e  %8.3f\n", report.resolutions[i],
                  report.errors[i], report.std_errors[i], report.orders[i]);
    }
  }
}

void emit_study_outputs(const Options& opts,
                        const std::vector<experiments::RateReport>& reports,
                        bool scheme_column, json extra_summary = json::object()) {
  fs::create_directories(opts.outdir);
  write_manifest(opts);

  std::ostringstream csv;
  experiments::write_csv(csv, reports, scheme_column);
  write_text_file(fs::path(opts.outdir) / "results.csv", csv.str());

  json summary;
  summary["command"] = opts.command;
  summary["config"] = options_json(opts);
  json report_array = json::array();
  for (const auto& report : reports) report_array.push_back(report_json(report));
  summary["reports"] = report_array;
  for (auto& [key, value] : extra_summary.items()) summary[key] = value;
  write_text_file(fs::path(opts.outdir) / "summary.json", summary.dump(2) + "\n");
}

int cmd_table1(const Options& opts) {
  std::vector<experiments::RateReport> reports;
  const schemes::Scheme scheme =
      opts.scheme == "high" ? schemes::Scheme::high : schemes::Scheme::low;
  for (double alpha : opts.alpha) {
    experiments::ExperimentPlan plan;
    plan.base = base_config(opts, alpha, opts.hurst.front());
    plan.scheme = scheme;
    plan.resolutions = opts.n_list;
    plan.refinement = opts.refinement;
    plan.samples = opts.samples;
    plan.seed = opts.seed;
    plan.threads = opts.threads;
    if (const auto warning = schemes::regularity_warning(plan.base, plan.scheme)) {
      std::cerr << "warning: " << *warning << "\n";
    }
    reports.push_back(experiments::run_convergence_study(plan));
    print_report_table(reports.back());
  }
  emit_study_outputs(opts, reports, false);
  return exit_ok;
}

int cmd_rates_high(const Options& opts) {
  std::vector<experiments::RateReport> reports;
  std::ostringstream plot;
  plot << "alpha,H,tau,error,reference\n";
  json slopes = json::array();
  const schemes::Scheme scheme =
      opts.scheme == "low" ? schemes::Scheme::low : schemes::Scheme::high;
  char buf[200];
  for (double alpha : opts.alpha) {
    for (double hurst : opts.hurst) {
      experiments::ExperimentPlan plan;
      plan.base = base_config(opts, alpha, hurst);
      plan.scheme = scheme;
      plan.resolutions = opts.n_list;
      plan.refinement = opts.refinement;
      plan.samples = opts.samples;
      plan.seed = opts.seed;
      plan.threads = opts.threads;
      if (const auto warning = schemes::regularity_warning(plan.base, plan.scheme)) {
        std::cerr << "warning: " << *warning << "\n";
      }
      const auto report = experiments::run_convergence_study(plan);
      print_report_table(report);

      const auto rates =
          schemes::predict_rates(alpha, opts.rho, opts.epsilon, hurst);
      const double slope = experiments::fit_loglog_slope(
          report.resolutions, report.errors, report.horizon);
      const double tau0 = report.horizon / report.resolutions.front();
      for (std::size_t i = 0; i < report.resolutions.size(); ++i) {
        const double tau = report.horizon / report.resolutions[i];
        const double reference =
            report.errors.front() * std::pow(tau / tau0, rates.high_order);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", alpha,
                      hurst, tau, report.errors[i], reference);
        plot << buf;
      }
      json s;
      s["alpha"] = alpha;
      s["hurst"] = hurst;
      s["gamma"] = rates.gamma;
      s["predicted_rate"] = rates.high_order;
      s["fitted_slope"] = slope;
      slopes.push_back(s);
      std::printf("    fitted slope %.3f (reference %.3f)\n", slope,
                  rates.high_order);
      reports.push_back(report);
    }
  }
  json extra;
  extra["slopes"] = slopes;
  emit_study_outputs(opts, reports, false, extra);
  write_text_file(fs::path(opts.outdir) / "plot.csv", plot.str());
  return exit_ok;
}

int cmd_deterministic(const Options& opts) {
  std::vector<experiments::RateReport> reports;
  std::vector<schemes::Scheme> selected;
  if (opts.scheme == "low" || opts.scheme == "both") {
    selected.push_back(schemes::Scheme::low);
  }
  if (opts.scheme == "high" || opts.scheme == "both") {
    selected.push_back(schemes::Scheme::high);
  }
  for (double alpha : opts.alpha) {
    for (const auto scheme : selected) {
      experiments::ExperimentPlan plan;
      plan.base = base_config(opts, alpha, opts.hurst.front());
      plan.base.f = schemes::Nonlinearity::zero();
      plan.base.with_noise = false;
      plan.scheme = scheme;
      plan.resolutions = opts.n_list;
      plan.refinement = opts.refinement;
      plan.samples = 1;
      plan.seed = opts.seed;
      reports.push_back(experiments::deterministic_order_study(plan));
      std::printf("  scheme=%s\n", schemes::scheme_name(scheme));
      print_report_table(reports.back());
    }
  }
  emit_study_outputs(opts, reports, true);

  if (opts.dump_trajectory) {
    // coarsest resolution, first alpha, first selected scheme
    schemes::ModelConfig config = base_config(opts, opts.alpha.front(),
                                              opts.hurst.front());
    config.f = schemes::Nonlinearity::zero();
    config.with_noise = false;
    config.steps = opts.n_list.front();
    const auto basis = spectral::build_eigenbasis(config.modes);
    schemes::TrajectoryRecord record;
    record.keep_fields = true;
    schemes::run(config, selected.front(), basis, nullptr, nullptr, &record);

    const int shown = std::min(4, config.modes);
    std::ostringstream csv;
    csv << "step,t,u_norm";
    for (int j = 1; j <= shown; ++j) csv << ",coeff_" << j;
    csv << "\n";
    char buf[128];
    for (std::size_t n = 0; n < record.times.size(); ++n) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g", n, record.times[n],
                    record.u_norms[n]);
      csv << buf;
      for (int j = 0; j < shown; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", record.fields[n][j]);
        csv << buf;
      }
      csv << "\n";
    }
    write_text_file(fs::path(opts.outdir) / "trajectory.csv", csv.str());
  }
  return exit_ok;
}

int cmd_noise_stats(const Options& opts) {
  const double hurst = opts.hurst.front();
  const int n = opts.stat_steps;
  const fbm::TimeGrid grid(opts.stat_tau * n, n);
  const auto cov = fbm::assemble_covariance(grid, hurst, true);

  // Sample moments of (D_0, I_0) across draws.
  double sum_d = 0, sum_d2 = 0, sum_i = 0, sum_i2 = 0, sum_di = 0;
  for (int s = 0; s < opts.draws; ++s) {
    rng::NormalStream stream(opts.seed, static_cast<std::uint64_t>(s), 0);
    const auto noise = fbm::sample_mode_noise(cov, stream);
    const double d = noise.increments[0];
    const double i = noise.weighted[0];
    sum_d += d;
    sum_d2 += d * d;
    sum_i += i;
    sum_i2 += i * i;
    sum_di += d * i;
  }
  const double count = opts.draws;
  const double mean_d = sum_d / count;
  const double mean_i = sum_i / count;
  const double var_d = (sum_d2 - count * mean_d * mean_d) / (count - 1.0);
  const double var_i = (sum_i2 - count * mean_i * mean_i) / (count - 1.0);
  const double cov_di = (sum_di - count * mean_d * mean_i) / (count - 1.0);

  const double tau = grid.tau();
  const double var_d_theory = std::pow(tau, 2.0 * hurst);
  const double cov_theory = 0.5 * std::pow(tau, 2.0 * hurst + 1.0);
  // Gaussian standard errors of the moment estimators.
  const double se_var = var_d_theory * std::sqrt(2.0 / (count - 1.0));
  const double se_cov =
      std::sqrt((var_d_theory * fbm::weighted_covariance(0, 0, grid, hurst) +
                 cov_theory * cov_theory) /
                (count - 1.0));

  // Coarsening law check: aggregate the fine covariance with the exact
  // identities and compare against the directly assembled coarse covariance.
  double coarsen_max_diff = std::nan("");
  if (n % 2 == 0) {
    const int nc = n / 2;
    Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(2 * nc, 2 * n);
    for (int k = 0; k < nc; ++k) {
      for (int m = 0; m < 2; ++m) {
        agg(k, 2 * k + m) = 1.0;
        agg(nc + k, n + 2 * k + m) = 1.0;
        agg(nc + k, 2 * k + m) = m * tau;
      }
    }
    const Eigen::MatrixXd coarse_from_fine = agg * cov.matrix * agg.transpose();
    const auto coarse =
        fbm::assemble_covariance(fbm::TimeGrid(grid.horizon, nc), hurst, true);
    coarsen_max_diff = (coarse_from_fine - coarse.matrix).cwiseAbs().maxCoeff();
  }

  fs::create_directories(opts.outdir);
  write_manifest(opts);

  std::ostringstream csv;
  csv << "quantity,estimate,theory,stderr,zscore\n";
  char buf[256];
  const auto emit = [&](const char* name, double est, double theory, double se) {
    const double z = se > 0 ? (est - theory) / se : 0.0;
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", name, est, theory,
                  se, z);
    csv << buf;
  };
  emit("mean_D0", mean_d, 0.0, std::sqrt(var_d_theory / count));
  emit("var_D0", var_d, var_d_theory, se_var);
  emit("cov_D0_I0", cov_di, cov_theory, se_cov);
  emit("var_I0", var_i, fbm::weighted_covariance(0, 0, grid, hurst),
       fbm::weighted_covariance(0, 0, grid, hurst) * std::sqrt(2.0 / (count - 1.0)));
  if (n % 2 == 0) {
    emit("coarsen_max_abs_diff", coarsen_max_diff, 0.0, 0.0);
  }
  write_text_file(fs::path(opts.outdir) / "results.csv", csv.str());

  if (opts.dump_paths) {
    rng::NormalStream stream(opts.seed, 0, 0);
    const auto noise = fbm::sample_mode_noise(cov, stream);
    std::ostringstream paths;
    fbm::dump_path_csv(paths, noise);
    write_text_file(fs::path(opts.outdir) / "paths.csv", paths.str());
  }

  json summary;
  summary["command"] = opts.command;
  summary["config"] = options_json(opts);
  summary["var_D0"] = {{"estimate", var_d}, {"theory", var_d_theory}, {"stderr", se_var}};
  summary["cov_D0_I0"] = {
      {"estimate", cov_di}, {"theory", cov_theory}, {"stderr", se_cov}};
  if (n % 2 == 0) summary["coarsen_max_abs_diff"] = coarsen_max_diff;
  write_text_file(fs::path(opts.outdir) / "summary.json", summary.dump(2) + "\n");

  std::printf("  var(D0)    = %.6f  (theory %.6f, se %.2e)\n", var_d, var_d_theory,
              se_var);
  std::printf("  cov(D0,I0) = %.6f  (theory %.6f, se %.2e)\n", cov_di, cov_theory,
              se_cov);
  if (n % 2 == 0) {
    std::printf("  coarsening covariance identity: max |diff| = %.3e\n",
                coarsen_max_diff);
  }
  return exit_ok;
}

struct FlagBindings {
  std::string alpha, hurst, n_list, scheme, f, outdir, config;
  double rho = 0, horizon = 0, epsilon = 0, tau = 0;
  int modes = 0, samples = 0, refinement = 0, threads = 0, draws = 0, steps = 0;
  std::uint64_t seed = 0;
};

void add_common_flags(CLI::App* cmd, FlagBindings& flags) {
  cmd->add_option("--config", flags.config, "flat key=value configuration file");
  cmd->add_option("--alpha", flags.alpha, "fractional power(s), comma separated");
  cmd->add_option("--hurst", flags.hurst, "Hurst parameter(s), comma separated");
  cmd->add_option("--rho", flags.rho, "mode-weight decay exponent");
  cmd->add_option("--T", flags.horizon, "time horizon");
  cmd->add_option("--N_list", flags.n_list, "resolutions, comma separated");
  cmd->add_option("--M", flags.modes, "number of spectral modes");
  cmd->add_option("--samples", flags.samples, "Monte Carlo sample count");
  cmd->add_option("--seed", flags.seed, "base RNG seed");
  cmd->add_option("--scheme", flags.scheme, "low | high | both");
  cmd->add_option("--f", flags.f, "nonlinearity: sin | zero");
  cmd->add_option("--epsilon", flags.epsilon, "regularity bookkeeping epsilon");
  cmd->add_option("--a", flags.refinement, "refinement factor");
  cmd->add_option("--threads", flags.threads, "worker pool size (0 = machine)");
  cmd->add_option("--outdir", flags.outdir, "output directory");
}

void apply_flags(Options& opts, const CLI::App* cmd, const FlagBindings& flags) {
  if (!flags.config.empty()) apply_config_file(opts, flags.config);
  if (cmd->count("--alpha")) opts.alpha = parse_double_list("alpha", flags.alpha);
  if (cmd->count("--hurst")) opts.hurst = parse_double_list("hurst", flags.hurst);
  if (cmd->count("--rho")) opts.rho = flags.rho;
  if (cmd->count("--T")) opts.horizon = flags.horizon;
  if (cmd->count("--N_list")) opts.n_list = parse_int_list("N_list", flags.n_list);
  if (cmd->count("--M")) opts.modes = flags.modes;
  if (cmd->count("--samples")) opts.samples = flags.samples;
  if (cmd->count("--seed")) opts.seed = flags.seed;
  if (cmd->count("--scheme")) opts.scheme = flags.scheme;
  if (cmd->count("--f")) opts.f = flags.f;
  if (cmd->count("--epsilon")) opts.epsilon = flags.epsilon;
  if (cmd->count("--a")) opts.refinement = flags.refinement;
  if (cmd->count("--threads")) opts.threads = flags.threads;
  if (cmd->count("--outdir")) opts.outdir = flags.outdir;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Strong-convergence studies for two difference schemes of the "
               "stochastic fractional wave equation"};
  app.require_subcommand(1);

  FlagBindings table1_flags, rates_flags, det_flags, stats_flags;

  auto* table1 = app.add_subcommand(
      "table1", "low-order convergence-rate study (terminal-time errors)");
  add_common_flags(table1, table1_flags);
  table1->footer("defaults: alpha=0.6,0.8,1  hurst=0.8  rho=0.25  T=0.5  "
                 "N_list=32,64,128  M=256  samples=200  seed=1  scheme=low  "
                 "f=sin  epsilon=0.01  a=2  threads=0 (machine)  outdir=out");

  auto* rates = app.add_subcommand(
      "rates-high", "high-order scheme study with log-log plot data");
  add_common_flags(rates, rates_flags);
  rates->footer("defaults: alpha=0.6,0.8  hurst=0.6,0.8  rho=1.5  T=0.5  "
                "N_list=16,32,64,128  M=64  samples=200  seed=1  scheme=high  "
                "f=sin  epsilon=0.01  a=2  threads=0 (machine)  outdir=out");

  auto* det = app.add_subcommand(
      "deterministic", "noiseless order study against the exact propagator");
  add_common_flags(det, det_flags);
  bool dump_trajectory = false;
  det->add_flag("--dump-trajectory", dump_trajectory,
                "write the coarsest-run trajectory as CSV");
  det->footer("defaults: alpha=0.6  hurst=0.8  rho=0.25  T=0.5  "
              "N_list=64,128,256,512,1024  M=8  scheme=both  f=zero  "
              "epsilon=0.01  a=2  outdir=out");

  auto* stats = app.add_subcommand("noise-stats",
                                   "fBm sampler statistical validation report");
  add_common_flags(stats, stats_flags);
  stats->footer("defaults: hurst=0.8  draws=10000  steps=4  tau=1  seed=1  "
                "outdir=out");
  stats->add_option("--draws", stats_flags.draws, "number of sampler draws");
  stats->add_option("--steps", stats_flags.steps, "grid steps for the report");
  stats->add_option("--tau", stats_flags.tau, "grid step size");
  bool dump_paths = false;
  stats->add_flag("--dump-paths", dump_paths, "write one sampled path as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_unknown_key;
  } catch (const CLI::ConversionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_bad_value;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.get_name() == "ExtrasError" ? exit_unknown_key : exit_bad_value;
  }

  try {
    Options opts;
    if (table1->parsed()) {
      opts.command = "table1";
      opts.alpha = {0.6, 0.8, 1.0};
      opts.hurst = {0.8};
      opts.rho = 0.25;
      opts.n_list = {32, 64, 128};
      opts.modes = 256;
      opts.scheme = "low";
      apply_flags(opts, table1, table1_flags);
      check_constraints(opts);
      return cmd_table1(opts);
    }
    if (rates->parsed()) {
      opts.command = "rates-high";
      opts.alpha = {0.6, 0.8};
      opts.hurst = {0.6, 0.8};
      opts.rho = 1.5;
      opts.n_list = {16, 32, 64, 128};
      opts.modes = 64;
      opts.scheme = "high";
      apply_flags(opts, rates, rates_flags);
      check_constraints(opts);
      return cmd_rates_high(opts);
    }
    if (det->parsed()) {
      opts.command = "deterministic";
      opts.alpha = {0.6};
      opts.hurst = {0.8};
      opts.n_list = {64, 128, 256, 512, 1024};
      opts.modes = 8;
      opts.scheme = "both";
      opts.f = "zero";
      apply_flags(opts, det, det_flags);
      opts.dump_trajectory = dump_trajectory;
      check_constraints(opts);
      return cmd_deterministic(opts);
    }
    if (stats->parsed()) {
      opts.command = "noise-stats";
      opts.alpha = {1.0};
      opts.hurst = {0.8};
      opts.n_list = {4};
      opts.modes = 3;
      apply_flags(opts, stats, stats_flags);
      if (stats->count("--draws")) opts.draws = stats_flags.draws;
      if (stats->count("--steps")) opts.stat_steps = stats_flags.steps;
      if (stats->count("--tau")) opts.stat_tau = stats_flags.tau;
      opts.dump_paths = dump_paths;
      check_constraints(opts);
      return cmd_noise_stats(opts);
    }
    return exit_bad_value;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_constraint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}

}  // namespace swe::cli
