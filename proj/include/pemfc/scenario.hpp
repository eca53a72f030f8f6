#pragma once

// Scenario configuration: hierarchical plain-text "section.key = value"
// files over Table-derived defaults, validation with key-path diagnostics,
// and run orchestration for the CLI.

#include <string>
#include <vector>

#include "pemfc/calibration.hpp"
#include "pemfc/solver.hpp"

namespace pemfc::scenario {

enum class RunKind { Transient, Steady, Sweep, Fit, PropsTable };

struct Scenario {
  CellDefinition cell;
  MeshResolution resolution;
  solver::SolverConfig solver_cfg;
  voltage::OverpotentialConfig voltage_cfg;
  InitOptions init;

  RunKind kind = RunKind::Steady;
  // Transient
  solver::CurrentProfile profile;
  double t_end = 60.0;
  double output_every = 1.0;
  // Steady
  double i_fc = 1e4;
  // Sweep
  std::vector<double> i_list;
  // Fit
  std::string data_path;
  std::vector<std::string> free_params{"i0", "kappa_c", "R_e"};
  // PropsTable
  std::string correlation;
  double table_from = 0.0, table_to = 0.0;
  int table_points = 0;
};

// Parse and fully validate; unknown keys, unit violations and invariant
// breaches raise ValidationError naming the key path and constraint.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

// Canonical echo of every key with its resolved value; reparsing the echo
// reproduces the scenario exactly.
std::string resolved_config(const Scenario& sc);

// Execute and write results under out_dir (created if missing):
// resolved_config always; timeseries.csv + ledger.csv for transients;
// polarization.csv for steady/sweep; fit_report.csv + fit_summary.txt +
// fit_curve.csv for fits; <correlation>.csv for props tables.
void run_scenario(const Scenario& sc, const std::string& out_dir, bool quiet);

// Polarization data CSV (columns i_A_per_m2, U_V[, weight]).
std::vector<calibration::DataPoint> read_polarization_csv(const std::string& path);

} // namespace pemfc::scenario
