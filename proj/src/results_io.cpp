#include "pemfc/results_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "pemfc/errors.hpp"

namespace pemfc::results_io {

namespace {

std::ofstream open_file(const std::string& path) {
  std::ofstream f(path, std::ios::binary); // fixed line endings everywhere
  if (!f) throw NumericalError("cannot open output file: " + path);
  return f;
}

void write_row(std::ofstream& f, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) f << ',';
    f << csv_quote(fields[i]);
  }
  f << "\r\n";
}

} // namespace

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_timeseries(const std::string& path, const Mesh1D& mesh,
                      const solver::TransientResult& result) {
  std::ofstream f = open_file(path);
  std::vector<std::string> header{"t_s"};
  const int n = StateVector::sized(mesh).size();
  for (int i = 0; i < n; ++i) header.push_back(StateVector::entry_name(mesh, i));
  for (const char* c : {"U_eq_V", "eta_c_V", "dV_ohmic_p_V", "dV_ohmic_e_V",
                        "dV_conc_V", "U_cell_V", "i_n_A_per_m2",
                        "i_sc_A_per_m2", "i_co_H2_A_per_m2",
                        "i_co_O2_A_per_m2", "R_p_ohm_m2"})
    header.push_back(c);
  write_row(f, header);

  std::vector<double> flat;
  for (size_t r = 0; r < result.times.size(); ++r) {
    std::vector<std::string> row{format_number(result.times[r])};
    result.snapshots[r].pack(flat);
    for (double v : flat) row.push_back(format_number(v));
    const voltage::VoltageReport& rep = result.reports[r];
    for (double v : {rep.U_eq, rep.eta_c, rep.dV_ohmic_p, rep.dV_ohmic_e,
                     rep.dV_conc, rep.U_cell, rep.i_n, rep.i_sc, rep.i_co_h2,
                     rep.i_co_o2, rep.R_p})
      row.push_back(format_number(v));
    write_row(f, row);
  }
}

void write_ledger(const std::string& path,
                  const std::vector<solver::LedgerRow>& ledger) {
  std::ofstream f = open_file(path);
  write_row(f, {"t_s",
                "water_stored_mol_per_m2", "water_in_mol_per_m2",
                "water_out_mol_per_m2", "water_drained_mol_per_m2",
                "water_produced_mol_per_m2", "water_clipped_mol_per_m2",
                "water_closure_mol_per_m2",
                "h2_stored_mol_per_m2", "h2_in_mol_per_m2",
                "h2_out_mol_per_m2", "h2_reacted_mol_per_m2",
                "h2_clipped_mol_per_m2", "h2_closure_mol_per_m2",
                "o2_stored_mol_per_m2", "o2_in_mol_per_m2",
                "o2_out_mol_per_m2", "o2_reacted_mol_per_m2",
                "o2_clipped_mol_per_m2", "o2_closure_mol_per_m2",
                "n2_stored_mol_per_m2", "n2_in_mol_per_m2",
                "n2_out_mol_per_m2", "n2_clipped_mol_per_m2",
                "n2_closure_mol_per_m2"});
  for (const auto& r : ledger) {
    std::vector<std::string> row;
    for (double v : {r.t,
                     r.water_stored, r.water_in, r.water_out, r.water_drained,
                     r.water_produced, r.water_clipped, r.water_closure,
                     r.h2_stored, r.h2_in, r.h2_out, r.h2_reacted,
                     r.h2_clipped, r.h2_closure,
                     r.o2_stored, r.o2_in, r.o2_out, r.o2_reacted,
                     r.o2_clipped, r.o2_closure,
                     r.n2_stored, r.n2_in, r.n2_out, r.n2_clipped,
                     r.n2_closure})
      row.push_back(format_number(v));
    write_row(f, row);
  }
}

void write_polarization(const std::string& path,
                        const std::vector<solver::SweepRow>& rows) {
  std::ofstream f = open_file(path);
  write_row(f, {"i_A_per_m2", "U_V", "U_eq_V", "eta_c_V", "R_p_ohm_m2",
                "i_n_A_per_m2", "dV_conc_V", "feasible", "i_sc_A_per_m2",
                "i_co_H2_A_per_m2", "i_co_O2_A_per_m2", "residual", "error"});
  for (const auto& r : rows) {
    std::vector<std::string> row{format_number(r.i_fc)};
    if (r.feasible) {
      for (double v : {r.rep.U_cell, r.rep.U_eq, r.rep.eta_c, r.rep.R_p,
                       r.rep.i_n, r.rep.dV_conc})
        row.push_back(format_number(v));
      row.push_back("1");
      for (double v : {r.rep.i_sc, r.rep.i_co_h2, r.rep.i_co_o2, r.residual})
        row.push_back(format_number(v));
      row.push_back("");
    } else {
      for (int j = 0; j < 6; ++j) row.push_back("");
      row.push_back("0");
      for (int j = 0; j < 4; ++j) row.push_back("");
      row.push_back(r.error);
    }
    write_row(f, row);
  }
}

void write_fit_report(const std::string& dir,
                      const calibration::CalibrationProblem& problem,
                      const calibration::CalibrationResult& result) {
  {
    std::ofstream f = open_file(dir + "/fit_report.csv");
    write_row(f, {"parameter", "value", "bound_hit", "lower", "upper",
                  "sensitivity"});
    for (size_t j = 0; j < problem.free_params.size(); ++j) {
      const auto& s = problem.free_params[j];
      write_row(f, {calibration::param_name(s.which),
                    format_number(result.values[j]),
                    result.bound_hit[j] ? "1" : "0", format_number(s.lo),
                    format_number(s.hi), format_number(result.sensitivity[j])});
    }
  }
  {
    const std::vector<double> U =
        calibration::model_voltages(problem, result.values);
    std::ofstream f = open_file(dir + "/fit_curve.csv");
    write_row(f, {"i_A_per_m2", "U_meas_V", "U_fit_V", "residual_V",
                  "weight"});
    for (size_t k = 0; k < problem.data.size(); ++k) {
      const auto& d = problem.data[k];
      write_row(f, {format_number(d.i_fc), format_number(d.U_meas),
                    format_number(U[k]), format_number(U[k] - d.U_meas),
                    format_number(d.weight)});
    }
  }
  {
    std::ofstream f = open_file(dir + "/fit_summary.txt");
    f << "calibration " << (result.converged ? "converged" : "stopped")
      << " after " << (result.trace.empty() ? 0 : result.trace.back().iter)
      << " accepted iterations, " << result.residual_evaluations
      << " residual evaluations\n";
    f << "residual RMS: " << format_number(result.rms) << " V (initial "
      << format_number(result.initial_rms) << " V)\n";
    for (size_t j = 0; j < problem.free_params.size(); ++j) {
      f << "  " << calibration::param_name(problem.free_params[j].which)
        << " = " << format_number(result.values[j]);
      if (result.bound_hit[j]) f << "  [at bound]";
      f << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Correlation sweep tables

std::vector<PropsTableSpec> props_table_registry() {
  return {
      {"p_sat", "T_K", {"P_sat_Pa"}, 253.15, 372.0},
      {"d_lambda", "lambda", {"kulikovsky", "springer", "motupally"}, 0.0, 22.0},
      {"lambda_eq", "a_w", {"hinatsu_bao", "springer_bao"}, 0.0, 3.0},
      {"sorption_rate", "lambda", {"gamma_absorption_per_s", "gamma_desorption_per_s"}, 0.0, 22.0},
      {"surface_tension", "T_K", {"sigma_N_per_m"}, 274.0, 372.0},
      {"sigma_m", "lambda", {"springer", "ramousse"}, 0.0, 22.0},
      {"leverett", "s", {"J"}, 0.0, 1.0},
      {"d_cap", "s", {"gdl_kg_per_m_s", "cl_kg_per_m_s"}, 0.0, 1.0},
      {"binary_diffusivity", "T_K", {"H2O_H2_m2_per_s", "H2O_O2_m2_per_s"}, 274.0, 372.0},
      {"effective_diffusivity", "s", {"cl_ratio", "gdl_ratio"}, 0.0, 1.0},
      {"crossover_permeability", "lambda", {"k_H2", "k_O2"}, 0.0, 22.0},
      {"water_density", "T_K", {"rho_kg_per_m3"}, 274.0, 372.0},
      {"water_viscosity_dynamic", "T_K", {"mu_Pa_s"}, 274.0, 372.0},
      {"water_viscosity_kinematic", "T_K", {"nu_m2_per_s"}, 274.0, 372.0},
  };
}

std::string write_props_table(const std::string& dir, const std::string& name,
                              double from, double to, int points,
                              const CellDefinition& cell) {
  using namespace props;
  const auto registry = props_table_registry();
  const PropsTableSpec* spec = nullptr;
  for (const auto& s : registry)
    if (s.name == name) spec = &s;
  if (!spec) {
    std::string known;
    for (const auto& s : registry) known += " " + s.name;
    throw ValidationError("unknown correlation '" + name + "'; known:" + known);
  }
  if (from >= to) {
    from = spec->default_from;
    to = spec->default_to;
  }
  if (points < 2) points = 201;

  const double T = cell.op.T_fc;
  const PropertyConfig& pc = cell.props;
  std::function<std::vector<double>(double)> eval;
  if (name == "p_sat") {
    eval = [&](double x) { return std::vector<double>{p_sat(x)}; };
  } else if (name == "d_lambda") {
    eval = [&](double x) {
      PropertyConfig c = pc;
      c.d_lambda_variant = DLambdaVariant::Kulikovsky;
      const double a = d_lambda(x, T, c);
      c.d_lambda_variant = DLambdaVariant::Springer;
      const double b = d_lambda(x, T, c);
      c.d_lambda_variant = DLambdaVariant::Motupally;
      return std::vector<double>{a, b, d_lambda(x, T, c)};
    };
  } else if (name == "lambda_eq") {
    eval = [&](double x) {
      PropertyConfig c = pc;
      c.lambda_eq_variant = LambdaEqVariant::HinatsuBao;
      const double a = lambda_eq(x, T, c);
      c.lambda_eq_variant = LambdaEqVariant::SpringerBao;
      return std::vector<double>{a, lambda_eq(x, T, c)};
    };
  } else if (name == "sorption_rate") {
    eval = [&](double x) {
      return std::vector<double>{
          sorption_rate(x, x + 1.0, T, cell.geom.H_cl, cell.mem),
          sorption_rate(x, x - 1.0, T, cell.geom.H_cl, cell.mem)};
    };
  } else if (name == "surface_tension") {
    eval = [&](double x) { return std::vector<double>{surface_tension(x)}; };
  } else if (name == "sigma_m") {
    eval = [&](double x) {
      PropertyConfig c = pc;
      c.conductivity_variant = ConductivityVariant::Springer;
      const double a = proton_conductivity(x, T, c);
      c.conductivity_variant = ConductivityVariant::Ramousse;
      return std::vector<double>{a, proton_conductivity(x, T, c)};
    };
  } else if (name == "leverett") {
    eval = [&](double x) { return std::vector<double>{leverett_j(x)}; };
  } else if (name == "d_cap") {
    eval = [&](double x) {
      return std::vector<double>{d_cap(x, cell.gdl, T), d_cap(x, cell.cl, T)};
    };
  } else if (name == "binary_diffusivity") {
    eval = [&](double x) {
      return std::vector<double>{
          binary_diffusivity(GasPair::H2O_H2, x, kAtm),
          binary_diffusivity(GasPair::H2O_O2, x, kAtm)};
    };
  } else if (name == "effective_diffusivity") {
    eval = [&](double x) {
      return std::vector<double>{
          effective_diffusivity(1.0, x, Layer::CL, Direction::ThroughPlane, cell.cl),
          effective_diffusivity(1.0, x, Layer::GDL, Direction::ThroughPlane, cell.gdl)};
    };
  } else if (name == "crossover_permeability") {
    eval = [&](double x) {
      return std::vector<double>{
          crossover_permeability(CrossoverGas::H2, x, lambda_eq_liquid(T), T, cell.mem),
          crossover_permeability(CrossoverGas::O2, x, lambda_eq_liquid(T), T, cell.mem)};
    };
  } else if (name == "water_density") {
    eval = [&](double x) { return std::vector<double>{liquid_water_density(x)}; };
  } else if (name == "water_viscosity_dynamic") {
    eval = [&](double x) { return std::vector<double>{liquid_viscosity_dynamic(x)}; };
  } else {
    eval = [&](double x) { return std::vector<double>{liquid_viscosity_kinematic(x)}; };
  }

  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name + ".csv";
  std::ofstream f = open_file(path);
  std::vector<std::string> header{spec->x_column};
  header.insert(header.end(), spec->y_columns.begin(), spec->y_columns.end());
  write_row(f, header);
  for (int i = 0; i < points; ++i) {
    const double x = from + (to - from) * i / (points - 1);
    std::vector<std::string> row{format_number(x)};
    for (double v : eval(x)) row.push_back(format_number(v));
    write_row(f, row);
  }
  return path;
}

} // namespace pemfc::results_io
