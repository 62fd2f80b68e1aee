#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "mqrif/dataset.hpp"

#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path case_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "mqrif_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Exit code of the command line tool; stdout/stderr land in the given dir.
int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(MQRIF_CLI_PATH) + " " + args + " >" +
                          (dir / "stdout.txt").string() + " 2>" +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  REQUIRE(in.good());
  return json::parse(in);
}

Eigen::MatrixXd load_y(const std::string& path,
                       const std::vector<std::string>& cols) {
  mqrif::DatasetSchema s;
  s.response_columns = cols;
  return mqrif::load_csv(path, s).y;
}

fs::path simulate_into(const std::string& name, int n, std::uint64_t seed) {
  const fs::path dir = case_dir(name);
  const int code = run_cli("simulate --kind gaussian-linear --n " +
                               std::to_string(n) +
                               " --k 2 --p 2 --noise-scale 0.5 --seed " +
                               std::to_string(seed) + " --out " + dir.string(),
                           dir);
  REQUIRE(code == 0);
  REQUIRE(testsup::file_exists((dir / "data.csv").string()));
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate replays byte for byte") {
  const fs::path dir = simulate_into("sim_replay", 120, 42);
  const std::string data1 = testsup::read_file((dir / "data.csv").string());
  const std::string man1 = testsup::read_file((dir / "manifest.json").string());
  CHECK(data1.find("y1,y2,x1") == 0);

  // rerun with identical arguments into the same directory
  const int code = run_cli(
      "simulate --kind gaussian-linear --n 120 --k 2 --p 2 --noise-scale 0.5 "
      "--seed 42 --out " +
          dir.string(),
      dir);
  REQUIRE(code == 0);
  CHECK(testsup::read_file((dir / "data.csv").string()) == data1);
  CHECK(testsup::read_file((dir / "manifest.json").string()) == man1);

  // a different seed changes the data
  const fs::path other = case_dir("sim_replay_other");
  REQUIRE(run_cli("simulate --kind gaussian-linear --n 120 --k 2 --p 2 "
                  "--noise-scale 0.5 --seed 43 --out " +
                      other.string(),
                  other) == 0);
  CHECK(testsup::read_file((other / "data.csv").string()) != data1);
}

TEST_CASE("fit at the symmetric large-c target recovers column means") {
  const fs::path sim = simulate_into("fit_sim", 250, 7);
  const fs::path dir = case_dir("fit_out");
  const int code =
      run_cli("fit --data " + (sim / "data.csv").string() +
                  " --response y1,y2 --tau 0.5 --c 1e6 --out " + dir.string(),
              dir);
  REQUIRE(code == 0);
  for (const char* f : {"theta.csv", "m_tau0.5.csv", "d_tau0.5.csv",
                        "delta_tau0.5.csv", "thetacov_tau0.5.csv",
                        "corr_tau0.5.csv", "rif_tau0.5.csv", "manifest.json"})
    CHECK(testsup::file_exists((dir / f).string()));

  const Eigen::MatrixXd Y = load_y((sim / "data.csv").string(), {"y1", "y2"});
  const Eigen::MatrixXd theta =
      load_y((dir / "theta.csv").string(), {"y1", "y2"});
  REQUIRE(theta.rows() == 1);
  CHECK(std::abs(theta(0, 0) - Y.col(0).mean()) < 1e-8);
  CHECK(std::abs(theta(0, 1) - Y.col(1).mean()) < 1e-8);

  const json m = read_manifest(dir);
  CHECK(m["tool"] == "mqrif");
  CHECK(m["command"] == "fit");
  REQUIRE(m["fits"].size() == 1);
  CHECK(m["fits"][0]["tau"] == 0.5);
  CHECK(m["fits"][0]["converged"] == true);
  CHECK(m["fits"][0]["c_from_cv"] == false);
  CHECK(m.contains("config"));
  CHECK_FALSE(m.contains("timestamp"));
}

TEST_CASE("upe with cross validated tuning writes per-tau tables") {
  const fs::path sim = simulate_into("upe_sim", 250, 11);
  const fs::path dir = case_dir("upe_out");
  const int code = run_cli(
      "upe --data " + (sim / "data.csv").string() +
          " --response y1,y2 --covariates x1 --tau 0.25,0.5 --c cv "
          "--k-folds 4 --grid-size 6 --seed 5 --out " +
          dir.string(),
      dir);
  REQUIRE(code == 0);
  for (const char* f : {"upe_tau0.25.csv", "upe_tau0.5.csv", "corr_tau0.25.csv",
                        "corr_tau0.5.csv", "manifest.json"})
    CHECK(testsup::file_exists((dir / f).string()));

  const std::string table = testsup::read_file((dir / "upe_tau0.25.csv").string());
  CHECK(table.find("covariate,response,estimate,se") == 0);
  CHECK(table.find("intercept,y1,") != std::string::npos);
  CHECK(table.find("x1,y2,") != std::string::npos);

  const json m = read_manifest(dir);
  REQUIRE(m["fits"].size() == 2);
  for (const auto& fj : m["fits"]) {
    CHECK(fj["c_from_cv"] == true);
    CHECK(fj["c"].get<double>() > 0.0);
    CHECK(fj["method"] == "linear");
  }
}

TEST_CASE("exit codes sort errors by kind") {
  const fs::path dir = case_dir("codes");
  // unreadable data
  CHECK(run_cli("fit --data " + (dir / "nope.csv").string() +
                    " --response y1 --out " + dir.string(),
                dir) == 2);
  const std::string err = testsup::read_file((dir / "stderr.txt").string());
  CHECK(err.find("error:") != std::string::npos);

  // usage problem
  CHECK(run_cli("fit --definitely-not-a-flag", dir) == 1);
  CHECK(run_cli("", dir) == 1);
  CHECK(run_cli("--help", dir) == 0);

  // iteration budget too small for the steep quantile target
  const fs::path sim = simulate_into("codes_sim", 199, 13);
  CHECK(run_cli("fit --data " + (sim / "data.csv").string() +
                    " --response y1,y2 --tau 0.1 --c 0 --max-iter 2 --out " +
                    dir.string(),
                dir) == 3);

  // coverage cannot search for c inside its replication loop
  CHECK(run_cli("coverage --c cv --reps 50 --out " + dir.string(), dir) == 2);
}

TEST_CASE("contour emits tables a drawing and a nesting verdict") {
  const fs::path sim = simulate_into("contour_sim", 400, 17);
  const fs::path dir = case_dir("contour_out");
  const int code = run_cli("contour --data " + (sim / "data.csv").string() +
                               " --response y1,y2 --tau 0.1,0.3 --c 0 "
                               "--directions 24 --out " +
                               dir.string(),
                           dir);
  REQUIRE(code == 0);
  for (const char* f : {"contour_tau0.1.csv", "contour_tau0.3.csv",
                        "contour_tau0.1.svg", "contour_tau0.3.svg"})
    CHECK(testsup::file_exists((dir / f).string()));
  const std::string svg = testsup::read_file((dir / "contour_tau0.1.svg").string());
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polygon") != std::string::npos);

  const std::string table =
      testsup::read_file((dir / "contour_tau0.1.csv").string());
  CHECK(table.find("u1,u2,theta1,theta2,converged") == 0);

  const json m = read_manifest(dir);
  REQUIRE(m["nesting"].size() == 1);
  CHECK(m["nesting"][0]["outer_tau"] == 0.1);
  CHECK(m["nesting"][0]["inner_tau"] == 0.3);
  CHECK(m["nesting"][0]["nested"] == true);
}

TEST_CASE("command line flags override the config file") {
  const fs::path sim = simulate_into("cfg_sim", 150, 19);
  const fs::path dir = case_dir("cfg_out");
  {
    std::ofstream ini(dir / "run.ini");
    ini << "tau = 0.25\nc = 1e6\n";
  }
  int code = run_cli("fit --config " + (dir / "run.ini").string() + " --data " +
                         (sim / "data.csv").string() +
                         " --response y1,y2 --tau 0.4 --out " + dir.string(),
                     dir);
  REQUIRE(code == 0);
  json m = read_manifest(dir);
  REQUIRE(m["config"]["taus"].size() == 1);
  CHECK(m["config"]["taus"][0] == 0.4);
  CHECK(m["config"]["c"] == "1e6");  // untouched key passes through

  code = run_cli("fit --config " + (dir / "run.ini").string() + " --data " +
                     (sim / "data.csv").string() + " --response y1,y2 --out " +
                     dir.string(),
                 dir);
  REQUIRE(code == 0);
  m = read_manifest(dir);
  CHECK(m["config"]["taus"][0] == 0.25);
}

TEST_CASE("bootstrap command smoke") {
  const fs::path sim = simulate_into("boot_sim", 150, 23);
  const fs::path dir = case_dir("boot_out");
  const int code = run_cli("boot --data " + (sim / "data.csv").string() +
                               " --response y1,y2 --covariates x1 --tau 0.5 "
                               "--c 1e6 --bootstrap-b 100 --level 0.9 --out " +
                               dir.string(),
                           dir);
  REQUIRE(code == 0);
  const std::string table = testsup::read_file((dir / "boot_tau0.5.csv").string());
  CHECK(table.find("covariate,response,estimate,lower,upper,se_boot") == 0);
  const json m = read_manifest(dir);
  CHECK(m["fits"][0]["replicates"] == 100);
  CHECK(m["fits"][0]["failed_replicates"] == 0);
  CHECK(m["fits"][0]["level"] == 0.9);
}

TEST_CASE("coverage command smoke") {
  const fs::path dir = case_dir("coverage_out");
  const int code = run_cli(
      "coverage --kind gaussian-linear --n 150 --k 2 --p 2 --reps 50 "
      "--level 0.9 --tau 0.5 --c 1e6 --seed 29 --out " +
          dir.string(),
      dir);
  REQUIRE(code == 0);
  const std::string table = testsup::read_file((dir / "coverage.csv").string());
  CHECK(table.find("level,coverage,reps_run,reps_failed,z") == 0);
  const json m = read_manifest(dir);
  const double cov = m["coverage"].get<double>();
  CHECK(cov > 0.6);
  CHECK(cov <= 1.0);
  CHECK(m["reps_run"] == 50);
}

}  // TEST_SUITE
