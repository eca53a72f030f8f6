#pragma once

// CSV writers (RFC 4180, '.' decimal separator, header row, fixed column
// order) and the correlation sweep tables. All output is byte-deterministic
// for a given input.

#include <string>
#include <vector>

#include "pemfc/solver.hpp"
#include "pemfc/calibration.hpp"

namespace pemfc::results_io {

std::string csv_quote(const std::string& field);
std::string format_number(double v); // fixed "%.12g"

void write_timeseries(const std::string& path, const Mesh1D& mesh,
                      const solver::TransientResult& result);
void write_ledger(const std::string& path,
                  const std::vector<solver::LedgerRow>& ledger);
void write_polarization(const std::string& path,
                        const std::vector<solver::SweepRow>& rows);
void write_fit_report(const std::string& dir,
                      const calibration::CalibrationProblem& problem,
                      const calibration::CalibrationResult& result);

// Registry of correlation sweep tables for figure reproduction.
struct PropsTableSpec {
  std::string name;
  std::string x_column;
  std::vector<std::string> y_columns;
  double default_from = 0.0, default_to = 1.0;
};

std::vector<PropsTableSpec> props_table_registry();

// Writes <name>.csv under dir; range defaults to the registry entry when
// from >= to or points < 2. Returns the file path.
std::string write_props_table(const std::string& dir, const std::string& name,
                              double from, double to, int points,
                              const CellDefinition& cell);

} // namespace pemfc::results_io
