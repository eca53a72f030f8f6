#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pemfc/errors.hpp"
#include "pemfc/results_io.hpp"
#include "pemfc/scenario.hpp"

using namespace pemfc;
using scenario::parse_scenario_text;
using scenario::RunKind;
using scenario::Scenario;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("empty scenario is the all-defaults scenario") {
  const Scenario sc = parse_scenario_text("");
  CHECK(sc.cell.op.T_fc == 353.15);
  CHECK(sc.cell.geom.H_mem == 2.5e-5);
  CHECK(sc.kind == RunKind::Steady);
  CHECK(sc.resolution.n_gdl == 10);
}

TEST_CASE("overrides apply on top of defaults") {
  const Scenario sc = parse_scenario_text(
      "operating.Phi_c_des = 0.6\n"
      "# a comment\n"
      "mesh.n_mem = 7\n"
      "run.kind = sweep\n"
      "run.i_list = 500, 1000, 2000\n");
  CHECK(sc.cell.op.Phi_c_des == 0.6);
  CHECK(sc.resolution.n_mem == 7);
  CHECK(sc.kind == RunKind::Sweep);
  REQUIRE(sc.i_list.size() == 3);
  CHECK(sc.i_list[1] == 1000.0);
  // The resolved echo carries the override.
  const std::string echo = scenario::resolved_config(sc);
  CHECK(echo.find("operating.Phi_c_des = 0.59999999999999998") != std::string::npos);
}

TEST_CASE("validation errors name the key path and constraint") {
  CHECK_THROWS_WITH_AS(parse_scenario_text("geometry.H_mem = -1\n"),
                       doctest::Contains("geometry.H_mem > 0"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text("nonsense.key = 1\n"),
                       doctest::Contains("unknown key"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario_text("operating.T_fc = warm\n"),
                       doctest::Contains("not a number"), ValidationError);
  CHECK_THROWS_AS(parse_scenario_text("run.kind = sweep\n"), ValidationError);
  CHECK_THROWS_AS(
      parse_scenario_text("run.kind = sweep\nrun.i_list = 100, 50\n"),
      ValidationError);
  CHECK_THROWS_AS(parse_scenario_text("run.kind = fit\n"), ValidationError);
  CHECK_THROWS_AS(
      parse_scenario_text("solver.dt_min = 1\nsolver.dt_max = 0.5\n"),
      ValidationError);
}

TEST_CASE("resolved config round-trips exactly") {
  const Scenario sc = parse_scenario_text(
      "operating.Phi_c_des = 0.6\n"
      "electro.kappa_c = 1.75\n"
      "run.kind = transient\n"
      "run.profile = 0:0, 5:4000\n"
      "run.t_end = 30\n");
  const std::string echo1 = scenario::resolved_config(sc);
  const Scenario sc2 = parse_scenario_text(echo1);
  const std::string echo2 = scenario::resolved_config(sc2);
  CHECK(echo1 == echo2);
  CHECK(sc2.profile.at(6.0) == 4000.0);
  CHECK(sc2.profile.at(4.9) == 0.0);
}

TEST_CASE("csv quoting follows RFC 4180") {
  CHECK(results_io::csv_quote("plain") == "plain");
  CHECK(results_io::csv_quote("a,b") == "\"a,b\"");
  CHECK(results_io::csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(results_io::csv_quote("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("polarization data reader") {
  TempDir dir("pemfc_io_test");
  const std::string path = dir.str() + "/data.csv";
  {
    std::ofstream f(path);
    f << "i_A_per_m2,U_V,weight\n1000,0.82\n2000,0.78,2.0\n";
  }
  const auto data = scenario::read_polarization_csv(path);
  REQUIRE(data.size() == 2);
  CHECK(data[0].i_fc == 1000.0);
  CHECK(data[0].weight == 1.0);
  CHECK(data[1].U_meas == 0.78);
  CHECK(data[1].weight == 2.0);
  CHECK_THROWS_AS(scenario::read_polarization_csv(dir.str() + "/missing.csv"),
                  ValidationError);
}

TEST_CASE("props tables are deterministic and cover the registry") {
  TempDir dir("pemfc_props_test");
  CellDefinition cell;
  for (const auto& spec : results_io::props_table_registry()) {
    const std::string p1 = results_io::write_props_table(
        dir.str(), spec.name, 0.0, 0.0, 0, cell);
    const std::string text1 = slurp(p1);
    const std::string p2 = results_io::write_props_table(
        dir.str(), spec.name, 0.0, 0.0, 0, cell);
    CHECK(text1 == slurp(p2));
    CHECK(text1.find(spec.x_column) == 0);
  }
  CHECK_THROWS_AS(results_io::write_props_table(dir.str(), "no_such", 0, 1, 10,
                                                cell),
                  ValidationError);
}

TEST_CASE("scenario run writes the promised files") {
  TempDir dir("pemfc_run_test");
  const Scenario sc = parse_scenario_text(
      "run.kind = transient\n"
      "run.t_end = 0.5\n"
      "run.output_every = 0.25\n"
      "run.profile = 0:0\n"
      "electro.enable_crossover = false\n"
      "electro.enable_short_circuit = false\n");
  scenario::run_scenario(sc, dir.str(), true);
  CHECK(std::filesystem::exists(dir.path / "resolved_config"));
  CHECK(std::filesystem::exists(dir.path / "timeseries.csv"));
  CHECK(std::filesystem::exists(dir.path / "ledger.csv"));
  // Header sanity on the timeseries.
  const std::string ts = slurp((dir.path / "timeseries.csv").string());
  CHECK(ts.find("t_s,lambda[acl:0]") == 0);
  CHECK(ts.find("U_cell_V") != std::string::npos);
  CHECK(ts.find("C_N2") != std::string::npos);
}

TEST_CASE("identical scenarios produce byte-identical outputs") {
  const Scenario sc = parse_scenario_text(
      "run.kind = sweep\n"
      "run.i_list = 1000, 4000\n");
  TempDir d1("pemfc_det_1"), d2("pemfc_det_2");
  scenario::run_scenario(sc, d1.str(), true);
  scenario::run_scenario(sc, d2.str(), true);
  CHECK(slurp(d1.str() + "/polarization.csv") ==
        slurp(d2.str() + "/polarization.csv"));
  CHECK(slurp(d1.str() + "/resolved_config") ==
        slurp(d2.str() + "/resolved_config"));
}
