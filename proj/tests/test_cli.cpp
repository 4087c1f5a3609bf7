#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swe/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("swave");
  for (const auto& a : args) argv.push_back(a.c_str());
  return swe::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "swave_cli_tests" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("table1 runs are bit-identical for identical seeds") {
  const auto dir1 = fresh_dir("t1_a");
  const auto dir2 = fresh_dir("t1_b");
  const std::vector<std::string> base = {
      "table1",    "--M",       "8",      "--N_list", "4,8", "--samples", "2",
      "--seed",    "7",         "--threads", "1",     "--alpha", "0.8"};

  auto args1 = base;
  args1.insert(args1.end(), {"--outdir", dir1.string()});
  auto args2 = base;
  args2.insert(args2.end(), {"--outdir", dir2.string()});

  CHECK(run_cli(args1) == swe::cli::exit_ok);
  CHECK(run_cli(args2) == swe::cli::exit_ok);
  CHECK(slurp(dir1 / "results.csv") == slurp(dir2 / "results.csv"));

  // manifest carries the resolved configuration
  const auto manifest = nlohmann::json::parse(slurp(dir1 / "manifest.json"));
  CHECK(manifest["command"] == "table1");
  CHECK(manifest["config"]["M"] == 8);
  CHECK(manifest["config"]["seed"] == 7);
  CHECK(manifest["config"]["scheme"] == "low");
}

TEST_CASE("constraint violations are a distinct exit class") {
  CHECK(run_cli({"table1", "--alpha", "0", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_constraint);
  CHECK(run_cli({"table1", "--alpha", "1.5", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_constraint);
  CHECK(run_cli({"table1", "--hurst", "0.4", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_constraint);
  CHECK(run_cli({"table1", "--a", "1", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_constraint);
  CHECK(run_cli({"table1", "--N_list", "4,12", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_constraint);
}

TEST_CASE("unparsable values are a distinct exit class") {
  CHECK(run_cli({"table1", "--alpha", "abc", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_bad_value);
  CHECK(run_cli({"table1", "--N_list", "4,x", "--outdir", "/tmp/never"}) ==
        swe::cli::exit_bad_value);
}

TEST_CASE("unknown flags and config keys are a distinct exit class") {
  CHECK(run_cli({"table1", "--bogus", "1"}) == swe::cli::exit_unknown_key);

  const auto dir = fresh_dir("cfg");
  fs::create_directories(dir);
  const auto write_config = [&](const std::string& body) {
    std::ofstream out(dir / "run.cfg");
    out << body;
  };

  write_config("wibble = 3\n");
  CHECK(run_cli({"table1", "--config", (dir / "run.cfg").string()}) ==
        swe::cli::exit_unknown_key);

  write_config("alpha = oops\n");
  CHECK(run_cli({"table1", "--config", (dir / "run.cfg").string()}) ==
        swe::cli::exit_bad_value);

  write_config("hurst = 0.2\n");
  CHECK(run_cli({"table1", "--config", (dir / "run.cfg").string()}) ==
        swe::cli::exit_constraint);
}

TEST_CASE("config file values are overridden by flags") {
  const auto dir = fresh_dir("cfg_override");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "run.cfg");
    out << "# study configuration\n"
        << "alpha = 0.8\n"
        << "M = 4\n"
        << "N_list = 4,8\n"
        << "samples = 2\n"
        << "seed = 3\n"
        << "outdir = " << (dir / "out_from_file").string() << "\n";
  }
  CHECK(run_cli({"table1", "--config", (dir / "run.cfg").string(), "--M", "8",
                 "--threads", "1"}) == swe::cli::exit_ok);
  const auto manifest =
      nlohmann::json::parse(slurp(dir / "out_from_file" / "manifest.json"));
  CHECK(manifest["config"]["M"] == 8);       // flag wins
  CHECK(manifest["config"]["seed"] == 3);    // file value kept
}

TEST_CASE("deterministic command emits the expected files") {
  const auto dir = fresh_dir("det");
  CHECK(run_cli({"deterministic", "--N_list", "16,32", "--M", "4",
                 "--dump-trajectory", "--outdir", dir.string()}) ==
        swe::cli::exit_ok);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "summary.json"));

  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.rfind("scheme,alpha,H,rho,M,N,samples,error,stderr,order\n", 0) == 0);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["reports"].size() == 2);  // low and high

  const std::string trajectory = slurp(dir / "trajectory.csv");
  CHECK(trajectory.rfind("step,t,u_norm,coeff_1", 0) == 0);
  // 16 steps -> 17 recorded states plus the header
  CHECK(std::count(trajectory.begin(), trajectory.end(), '\n') == 18);
}

TEST_CASE("rates-high emits plot data") {
  const auto dir = fresh_dir("rh");
  CHECK(run_cli({"rates-high", "--alpha", "0.8", "--hurst", "0.8", "--M", "4",
                 "--N_list", "4,8", "--samples", "2", "--threads", "1", "--outdir",
                 dir.string()}) == swe::cli::exit_ok);
  CHECK(fs::exists(dir / "plot.csv"));
  const std::string plot = slurp(dir / "plot.csv");
  CHECK(plot.rfind("alpha,H,tau,error,reference\n", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["slopes"].size() == 1);
}

TEST_CASE("noise-stats emits the validation report") {
  const auto dir = fresh_dir("stats");
  CHECK(run_cli({"noise-stats", "--draws", "500", "--steps", "2", "--dump-paths",
                 "--outdir", dir.string()}) == swe::cli::exit_ok);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "paths.csv"));
  const std::string stats = slurp(dir / "results.csv");
  CHECK(stats.rfind("quantity,estimate,theory,stderr,zscore\n", 0) == 0);
  const std::string paths = slurp(dir / "paths.csv");
  CHECK(paths.rfind("k,t_k,D_k,I_k\n", 0) == 0);
}
