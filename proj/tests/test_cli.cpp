#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "kerrparamp/cli.hpp"

using namespace kerrparamp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("kerrparamp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

nlohmann::json bundled_json() {
  std::ifstream in(fixtures::bundled_config_path());
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == exit_usage);
  CHECK(run({"no-such-command"}).code == exit_usage);
  CHECK(run({"saturate"}).code == exit_usage);
  CHECK(run({"saturate", "--config", fixtures::bundled_config_path(), "--sweep-direction",
             "sideways"})
            .code == exit_usage);
  CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("config errors") {
  TempDir tmp;
  CHECK(run({"derive-params", "--config", (tmp.path / "missing.json").string()}).code ==
        exit_config);
  nlohmann::json j = bundled_json();
  j["device"]["kappa_b_mhz"] = 0.0;
  const Run r = run({"derive-params", "--config", write_config(tmp.path, j).string()});
  CHECK(r.code == exit_config);
  CHECK(r.err.find("device.kappa_b_mhz") != std::string::npos);
}

TEST_CASE("derive-params writes a table and params.csv") {
  TempDir tmp;
  const Run r = run({"derive-params", "--config", fixtures::bundled_config_path(), "--out",
                     tmp.path.string()});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("5.0847") != std::string::npos);
  const auto rows = read_csv(tmp.path / "params.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == rows[1].size());
  const std::size_t fa = column(rows[0], "omega_a_ghz");
  CHECK(std::stod(rows[1][fa]) == doctest::Approx(5.0847));
  column(rows[0], "g_mhz");
  column(rows[0], "k_aa_khz");
}

TEST_CASE("saturate on a linear device gives flat curves") {
  TempDir tmp;
  nlohmann::json j = bundled_json();
  j["device"]["kerr_scale"] = 0.0;
  const Run r = run({"saturate", "--config", write_config(tmp.path, j).string(), "--out",
                     tmp.path.string(), "--epsilon-mhz", "-2,0,2", "--signal-dbm",
                     "-140,-120,-100"});
  REQUIRE(r.code == exit_ok);
  const auto sat = read_csv(tmp.path / "saturation.csv");
  REQUIRE(sat.size() == 1 + 9);
  const std::size_t g = column(sat[0], "gain_db");
  for (std::size_t i = 1; i < sat.size(); ++i)
    CHECK(std::stod(sat[i][g]) == doctest::Approx(20.0).epsilon(1e-9));
  const auto th = read_csv(tmp.path / "thresholds.csv");
  REQUIRE(th.size() == 4);
  const std::size_t pm = column(th[0], "p_minus_1db_dbm");
  const std::size_t pp = column(th[0], "p_plus_1db_dbm");
  for (std::size_t i = 1; i < th.size(); ++i) {
    CHECK(th[i][pm].empty());
    CHECK(th[i][pp].empty());
  }
}

TEST_CASE("tracked signal frequency from the command line") {
  TempDir tmp;
  const Run r = run({"saturate", "--config", fixtures::bundled_config_path(), "--out",
                     tmp.path.string(), "--epsilon-mhz", "-2", "--signal-dbm", "-140,-120,-100",
                     "--signal-frequency", "tracked"});
  REQUIRE(r.code == exit_ok);
  const auto sat = read_csv(tmp.path / "saturation.csv");
  REQUIRE(sat.size() == 4);
  const std::size_t d = column(sat[0], "delta_mhz");
  CHECK(sat[1][d] != sat[3][d]);
  CHECK(run({"saturate", "--config", fixtures::bundled_config_path(), "--signal-frequency",
             "wobbly"})
            .code == exit_usage);
}

TEST_CASE("csv headers carry units") {
  TempDir tmp;
  const std::string cfg = fixtures::bundled_config_path();
  const std::string out = tmp.path.string();
  REQUIRE(run({"gain-map", "--config", cfg, "--out", out, "--epsilon-mhz", "0,1"}).code ==
          exit_ok);
  REQUIRE(run({"phase-map", "--config", cfg, "--out", out, "--epsilon-mhz", "-1",
               "--signal-dbm", "-140,-130"})
              .code == exit_ok);
  const auto gm = read_csv(tmp.path / "gainmap.csv");
  CHECK(gm[0] == std::vector<std::string>{"eps_mhz", "np", "gain_db", "delta_maxg_mhz"});
  CHECK(gm.size() == 1 + 2 * 57);
  const auto ph = read_csv(tmp.path / "phasemap.csv");
  CHECK(ph[0] ==
        std::vector<std::string>{"eps_mhz", "psig_dbm", "transmission_db", "phase_deg", "branch"});
  CHECK(ph.size() == 3);
}

TEST_CASE("optimize on a linear device reports no candidates") {
  TempDir tmp;
  nlohmann::json j = bundled_json();
  j["device"]["kerr_scale"] = 0.0;
  const Run r = run({"optimize", "--config", write_config(tmp.path, j).string(), "--out",
                     tmp.path.string(), "--epsilon-mhz", "-1,1", "--signal-dbm", "-140,-120"});
  // no candidate is a result, not a failure: empty optima rows
  CHECK(r.code == exit_ok);
  CHECK(r.err.find("optimize") != std::string::npos);
  const auto rows = read_csv(tmp.path / "optima.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "monotone");
  CHECK(rows[1][1].empty());
  CHECK(rows[2][1].empty());
}
