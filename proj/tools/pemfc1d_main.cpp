// Command-line front end: run / sweep / fit / props-table / validate.
// Exit codes: 0 success, 2 validation error, 3 infeasible operating point,
// 4 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "pemfc/errors.hpp"
#include "pemfc/results_io.hpp"
#include "pemfc/scenario.hpp"

namespace {

std::string default_out(const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("PEMFC1D_OUT")) return env;
  return "out";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D dynamic two-phase PEM fuel cell simulator"};
  app.require_subcommand(1);

  std::string out_dir;
  bool quiet = false;
  app.add_option("--out", out_dir, "Output directory (default $PEMFC1D_OUT or ./out)");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  std::string scenario_path;
  auto* cmd_run = app.add_subcommand("run", "Run a transient or steady scenario");
  cmd_run->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* cmd_sweep = app.add_subcommand("sweep", "Run a polarization sweep scenario");
  cmd_sweep->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* cmd_fit = app.add_subcommand("fit", "Calibrate parameters against data");
  cmd_fit->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* cmd_validate = app.add_subcommand("validate", "Parse, validate and echo a scenario");
  cmd_validate->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string table_name;
  double table_from = 0.0, table_to = 0.0;
  int table_points = 0;
  auto* cmd_table = app.add_subcommand("props-table", "Emit a correlation sweep CSV");
  cmd_table->add_option("name", table_name, "Correlation name")->required();
  cmd_table->add_option("--from", table_from, "Range start");
  cmd_table->add_option("--to", table_to, "Range end");
  cmd_table->add_option("--points", table_points, "Number of samples");

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace pemfc;
    if (cmd_table->parsed()) {
      CellDefinition cell;
      const std::string path = results_io::write_props_table(
          default_out(out_dir), table_name, table_from, table_to, table_points,
          cell);
      if (!quiet) std::printf("wrote %s\n", path.c_str());
      return 0;
    }

    scenario::Scenario sc = scenario::parse_scenario_file(scenario_path);
    if (cmd_validate->parsed()) {
      std::fputs(scenario::resolved_config(sc).c_str(), stdout);
      return 0;
    }
    if (cmd_run->parsed() && sc.kind != scenario::RunKind::Transient &&
        sc.kind != scenario::RunKind::Steady)
      throw ValidationError("'run' expects a transient or steady scenario "
                            "(use sweep/fit for the other kinds)");
    if (cmd_sweep->parsed() && sc.kind != scenario::RunKind::Sweep)
      throw ValidationError("'sweep' expects run.kind = sweep");
    if (cmd_fit->parsed() && sc.kind != scenario::RunKind::Fit)
      throw ValidationError("'fit' expects run.kind = fit");

    scenario::run_scenario(sc, default_out(out_dir), quiet);
    return 0;
  } catch (const pemfc::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const pemfc::InfeasibleError& e) {
    std::fprintf(stderr, "infeasible operating point: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
