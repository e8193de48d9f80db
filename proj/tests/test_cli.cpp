#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "casclab/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CASCLAB_CLI_PATH;
const std::string kConfigs = CASCLAB_CONFIG_DIR;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path workdir() {
  const fs::path p = fs::temp_directory_path() / "casclab_cli_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("simulate writes ledger, snapshot and manifest") {
  const fs::path out = workdir() / "sim";
  REQUIRE(run("simulate --config " + kConfigs + "/determinism_simulate.json --out " +
              out.string()) == 0);
  CHECK(fs::exists(out / "ledger.csv"));
  CHECK(fs::exists(out / "trajectory.snp"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("zero data simulates to an all-zero ledger") {
  const fs::path cfg = workdir() / "zero.json";
  casclab::write_text(cfg.string(), R"({
    "system": {"n": 2, "p": 0, "interval_length": 3.141592653589793, "modes": 6,
               "subdiagonal": [{"kind":"expr","name":"constant","params":{"value":1.0}}],
               "coupling_regions": [[1.0, 2.0]]},
    "T": 1.0, "dt": 1e-3
  })");
  const fs::path out = workdir() / "zero_out";
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + out.string()) == 0);
  std::ifstream is((out / "ledger.csv").string());
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    const std::size_t comma = line.find(',');
    CHECK(line.substr(comma + 1).find_first_not_of("0,.") == std::string::npos);
  }
}

TEST_CASE("gramian subcommand reports the spectrum") {
  const fs::path out = workdir() / "gram";
  REQUIRE(run("gramian --config " + kConfigs + "/gramian_n2.json --out " + out.string()) == 0);
  const nlohmann::json rep = nlohmann::json::parse(casclab::read_text((out / "gramian.json").string()));
  CHECK(rep.at("min_eigenvalue").get<double>() > 0.0);
  CHECK(rep.at("symmetry_defect").get<double>() <= 1e-10);
}

TEST_CASE("check-coeff subcommand") {
  const fs::path out = workdir() / "coeff";
  const fs::path cfg = workdir() / "coeff.json";
  casclab::write_text(cfg.string(), R"({
    "coefficient": {"kind":"samples","x":[0.0,3.141592653589793],"y":[0.0,3.141592653589793]},
    "levels": [3],
    "stability": {"level": 3, "truncations": [16, 32, 64]}
  })");
  REQUIRE(run("check-coeff --config " + cfg.string() + " --out " + out.string()) == 0);
  const nlohmann::json rep = nlohmann::json::parse(casclab::read_text((out / "coeff_report.json").string()));
  CHECK_FALSE(rep.at("compat")[0].at("pass").get<bool>());
  CHECK_FALSE(rep.at("stability").at("stable").get<bool>());
}

TEST_CASE("the CLI snaps the step to the horizon") {
  const fs::path cfg = workdir() / "period.json";
  casclab::write_text(cfg.string(), R"({
    "system": {"n": 1, "p": 0, "interval_length": 3.141592653589793, "modes": 4,
               "subdiagonal": [], "coupling_regions": []},
    "T": 6.283185307179586, "dt": 1e-3,
    "initial_data": {"kind": "mode", "component": 1, "mode": 1, "amplitude": 1.0}
  })");
  const fs::path out = workdir() / "period_out";
  CHECK(run("simulate --config " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "ledger.csv"));
}

TEST_CASE("malformed JSON exits with code 2") {
  const fs::path bad = workdir() / "bad.json";
  casclab::write_text(bad.string(), "{ this is not json");
  CHECK(run("simulate --config " + bad.string() + " --out " + (workdir() / "x").string()) == 2);
}

TEST_CASE("schema violations exit with code 2") {
  const fs::path bad = workdir() / "bad_schema.json";
  casclab::write_text(bad.string(), R"({"system": {"n": 2, "interval_length": 3.14, "modes": 4,
    "subdiagonal": [], "coupling_regions": []}, "T": 1.0})");
  CHECK(run("simulate --config " + bad.string() + " --out " + (workdir() / "y").string()) == 2);
}

TEST_CASE("uncontrollable problems exit with code 3 and still write the report") {
  const fs::path out = workdir() / "humfail";
  REQUIRE(run("hum --config " + kConfigs + "/gramian_decoupled.json --out " + out.string()) == 3);
  CHECK(fs::exists(out / "hum.json"));
  const nlohmann::json rep = nlohmann::json::parse(casclab::read_text((out / "hum.json").string()));
  CHECK(rep.at("status").get<std::string>() == "not-controllable-at-this-T");
  CHECK(rep.at("uncontrolled_dimension").get<int>() > 0);
}

TEST_CASE("hum subcommand emits controls and ledgers on success") {
  const fs::path out = workdir() / "humok";
  REQUIRE(run("hum --config " + kConfigs + "/gramian_n2.json --out " + out.string()) == 0);
  CHECK(fs::exists(out / "hum.json"));
  CHECK(fs::exists(out / "control_2.csv"));
  CHECK(fs::exists(out / "controlled_ledger.csv"));
}
