#pragma once

// Identification of the undetermined electrochemical parameters (i0_c_ref,
// kappa_c, alpha_c, R_e, optionally i_lim) from measured polarization data:
// box-constrained Levenberg-Marquardt on the steady model, with i0 and i_lim
// handled in log space.

#include <optional>
#include <string>
#include <vector>

#include "pemfc/solver.hpp"

namespace pemfc::calibration {

enum class Param { i0, kappa_c, alpha_c, R_e, i_lim };

const char* param_name(Param p);
std::optional<Param> param_from_name(const std::string& name);

struct DataPoint {
  double i_fc = 0;    // A/m^2
  double U_meas = 0;  // V
  double weight = 1.0;
};

struct ParamSpec {
  Param which;
  double lo, hi;
  bool log_scale;
};

ParamSpec default_spec(Param p);

struct CalibrationProblem {
  CellDefinition cell;
  MeshResolution resolution;
  solver::SolverConfig solver_cfg;
  voltage::OverpotentialConfig voltage_cfg;
  std::vector<DataPoint> data;
  std::vector<ParamSpec> free_params;
  double penalty_residual = 1.0; // V, for infeasible model evaluations
};

struct IterationRecord {
  int iter = 0;
  double cost = 0;      // 0.5 sum of squared residuals
  double lambda_lm = 0; // damping
  double step_norm = 0;
};

struct CalibrationResult {
  std::vector<double> values;        // fitted, natural units
  std::vector<bool> bound_hit;
  double rms = 0;                    // sqrt(mean squared weighted residual), V
  double initial_rms = 0;
  std::vector<double> sensitivity;   // Jacobian column norms at the solution
  std::vector<IterationRecord> trace;
  int residual_evaluations = 0;
  bool converged = false;
};

// Model voltages at the data currents for a given parameter vector; entries
// are NaN where the operating point is infeasible. Residual evaluations for
// distinct points run concurrently.
std::vector<double> model_voltages(const CalibrationProblem& problem,
                                   const std::vector<double>& values);

// Throws ValidationError on an ill-posed problem (too few points, bad
// bounds) and on an all-infeasible initial point.
CalibrationResult fit(const CalibrationProblem& problem,
                      const std::vector<double>& initial_values);

// Apply fitted values onto a cell definition.
void apply_params(CellDefinition& cell, const std::vector<ParamSpec>& specs,
                  const std::vector<double>& values);

} // namespace pemfc::calibration
