#include "pemfc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "pemfc/errors.hpp"
#include "pemfc/results_io.hpp"

namespace pemfc::scenario {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (...) {
  }
  throw ValidationError("key '" + key + "': '" + v + "' is not a number");
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  if (x != std::floor(x))
    throw ValidationError("key '" + key + "': '" + v + "' is not an integer");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct KeyEntry {
  std::string key;
  std::function<void(Scenario&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

KeyEntry num(const std::string& key, double Scenario::* field) {
  return {key,
          [key, field](Scenario& s, const std::string& v) {
            s.*field = parse_double(key, v);
          },
          [field](const Scenario& s) { return fmt(s.*field); }};
}

template <class Sub>
KeyEntry numf(const std::string& key, Sub Scenario::* sub, double Sub::* field) {
  return {key,
          [key, sub, field](Scenario& s, const std::string& v) {
            s.*sub.*field = parse_double(key, v);
          },
          [sub, field](const Scenario& s) { return fmt(s.*sub.*field); }};
}

template <class Enum>
KeyEntry enum_key(const std::string& key,
                  std::function<Enum&(Scenario&)> ref,
                  std::vector<std::pair<std::string, Enum>> names) {
  return {key,
          [key, ref, names](Scenario& s, const std::string& v) {
            for (const auto& [n, e] : names)
              if (n == v) {
                ref(s) = e;
                return;
              }
            std::string known;
            for (const auto& [n, e] : names) known += " " + n;
            throw ValidationError("key '" + key + "': unknown value '" + v +
                                  "'; expected one of:" + known);
          },
          [ref, names](const Scenario& s) {
            Enum cur = ref(const_cast<Scenario&>(s));
            for (const auto& [n, e] : names)
              if (e == cur) return n;
            return std::string("?");
          }};
}

std::vector<KeyEntry> build_registry() {
  using props::PorousConstants;
  std::vector<KeyEntry> reg;
  auto add = [&](KeyEntry e) { reg.push_back(std::move(e)); };

  auto dnum = [&](const std::string& key, std::function<double&(Scenario&)> ref) {
    add({key,
         [key, ref](Scenario& s, const std::string& v) {
           ref(s) = parse_double(key, v);
         },
         [ref](const Scenario& s) {
           return fmt(ref(const_cast<Scenario&>(s)));
         }});
  };
  auto bnum = [&](const std::string& key, std::function<bool&(Scenario&)> ref) {
    add({key,
         [key, ref](Scenario& s, const std::string& v) {
           ref(s) = parse_bool(key, v);
         },
         [ref](const Scenario& s) {
           return std::string(ref(const_cast<Scenario&>(s)) ? "true" : "false");
         }});
  };
  auto inum = [&](const std::string& key, std::function<int&(Scenario&)> ref) {
    add({key,
         [key, ref](Scenario& s, const std::string& v) {
           ref(s) = parse_int(key, v);
         },
         [ref](const Scenario& s) {
           return std::to_string(ref(const_cast<Scenario&>(s)));
         }});
  };

  // Geometry (m, m^2).
  dnum("geometry.H_gc", [](Scenario& s) -> double& { return s.cell.geom.H_gc; });
  dnum("geometry.W_gc", [](Scenario& s) -> double& { return s.cell.geom.W_gc; });
  dnum("geometry.L_gc", [](Scenario& s) -> double& { return s.cell.geom.L_gc; });
  dnum("geometry.H_gdl", [](Scenario& s) -> double& { return s.cell.geom.H_gdl; });
  dnum("geometry.H_cl", [](Scenario& s) -> double& { return s.cell.geom.H_cl; });
  dnum("geometry.H_mem", [](Scenario& s) -> double& { return s.cell.geom.H_mem; });
  dnum("geometry.A_act", [](Scenario& s) -> double& { return s.cell.geom.A_act; });

  // Porous layers.
  auto porous_keys = [&](const std::string& sec,
                         std::function<PorousConstants&(Scenario&)> ref) {
    dnum(sec + ".eps", [ref](Scenario& s) -> double& { return ref(s).eps; });
    dnum(sec + ".eps_p", [ref](Scenario& s) -> double& { return ref(s).eps_p; });
    dnum(sec + ".tau", [ref](Scenario& s) -> double& { return ref(s).tau; });
    dnum(sec + ".alpha", [ref](Scenario& s) -> double& { return ref(s).alpha; });
    dnum(sec + ".beta1", [ref](Scenario& s) -> double& { return ref(s).beta1; });
    dnum(sec + ".beta2", [ref](Scenario& s) -> double& { return ref(s).beta2; });
    dnum(sec + ".eps_c", [ref](Scenario& s) -> double& { return ref(s).eps_c; });
    dnum(sec + ".r_f_fiber", [ref](Scenario& s) -> double& { return ref(s).r_f_fiber; });
    dnum(sec + ".e_cap", [ref](Scenario& s) -> double& { return ref(s).e_cap; });
    dnum(sec + ".theta_c", [ref](Scenario& s) -> double& { return ref(s).theta_c_deg; });
  };
  porous_keys("gdl", [](Scenario& s) -> PorousConstants& { return s.cell.gdl; });
  porous_keys("cl", [](Scenario& s) -> PorousConstants& { return s.cell.cl; });
  dnum("cl.eps_mc", [](Scenario& s) -> double& { return s.cell.cl.eps_mc; });

  // Membrane.
  dnum("membrane.rho_mem", [](Scenario& s) -> double& { return s.cell.mem.rho_mem; });
  dnum("membrane.M_eq", [](Scenario& s) -> double& { return s.cell.mem.M_eq; });
  dnum("membrane.V_w", [](Scenario& s) -> double& { return s.cell.mem.V_w; });

  // Operating point.
  dnum("operating.T_fc", [](Scenario& s) -> double& { return s.cell.op.T_fc; });
  dnum("operating.P_a_des", [](Scenario& s) -> double& { return s.cell.op.P_a_des; });
  dnum("operating.P_c_des", [](Scenario& s) -> double& { return s.cell.op.P_c_des; });
  dnum("operating.Phi_a_des", [](Scenario& s) -> double& { return s.cell.op.Phi_a_des; });
  dnum("operating.Phi_c_des", [](Scenario& s) -> double& { return s.cell.op.Phi_c_des; });
  dnum("operating.S_a", [](Scenario& s) -> double& { return s.cell.op.S_a; });
  dnum("operating.S_c", [](Scenario& s) -> double& { return s.cell.op.S_c; });
  dnum("operating.y_O2_ext", [](Scenario& s) -> double& { return s.cell.op.y_O2_ext; });
  dnum("operating.k_em_in", [](Scenario& s) -> double& { return s.cell.op.k_em_in; });

  // Electrochemistry.
  dnum("electro.E0", [](Scenario& s) -> double& { return s.cell.electro.E0; });
  dnum("electro.P_ref", [](Scenario& s) -> double& { return s.cell.electro.P_ref; });
  dnum("electro.alpha_c", [](Scenario& s) -> double& { return s.cell.electro.alpha_c; });
  dnum("electro.kappa_c", [](Scenario& s) -> double& { return s.cell.electro.kappa_c; });
  dnum("electro.i0_c_ref", [](Scenario& s) -> double& { return s.cell.electro.i0_c_ref; });
  dnum("electro.i0_353_ref", [](Scenario& s) -> double& { return s.cell.electro.i0_353_ref; });
  dnum("electro.C_O2_ref", [](Scenario& s) -> double& { return s.cell.electro.C_O2_ref; });
  dnum("electro.E_act", [](Scenario& s) -> double& { return s.cell.electro.E_act; });
  dnum("electro.R_e", [](Scenario& s) -> double& { return s.cell.electro.R_e; });
  dnum("electro.i_lim", [](Scenario& s) -> double& { return s.cell.electro.i_lim; });
  dnum("electro.r_f_electrode", [](Scenario& s) -> double& { return s.cell.electro.r_f_electrode; });
  dnum("electro.K_e0", [](Scenario& s) -> double& { return s.cell.electro.K_e0; });
  dnum("electro.dH0", [](Scenario& s) -> double& { return s.cell.electro.dH0; });
  dnum("electro.gamma_cond", [](Scenario& s) -> double& { return s.cell.electro.gamma_cond; });
  dnum("electro.gamma_evap", [](Scenario& s) -> double& { return s.cell.electro.gamma_evap; });
  bnum("electro.enable_crossover", [](Scenario& s) -> bool& { return s.cell.electro.enable_crossover; });
  bnum("electro.enable_short_circuit", [](Scenario& s) -> bool& { return s.cell.electro.enable_short_circuit; });

  // Correlation variants.
  using props::ActivityModel;
  using props::ConductivityVariant;
  using props::DLambdaVariant;
  using props::LambdaEqVariant;
  add(enum_key<DLambdaVariant>(
      "props.d_lambda_variant",
      [](Scenario& s) -> DLambdaVariant& { return s.cell.props.d_lambda_variant; },
      {{"kulikovsky", DLambdaVariant::Kulikovsky},
       {"springer", DLambdaVariant::Springer},
       {"motupally", DLambdaVariant::Motupally}}));
  add(enum_key<LambdaEqVariant>(
      "props.lambda_eq_variant",
      [](Scenario& s) -> LambdaEqVariant& { return s.cell.props.lambda_eq_variant; },
      {{"hinatsu_bao", LambdaEqVariant::HinatsuBao},
       {"springer_bao", LambdaEqVariant::SpringerBao}}));
  add(enum_key<ConductivityVariant>(
      "props.conductivity_variant",
      [](Scenario& s) -> ConductivityVariant& { return s.cell.props.conductivity_variant; },
      {{"springer", ConductivityVariant::Springer},
       {"ramousse", ConductivityVariant::Ramousse}}));
  dnum("props.k_shape", [](Scenario& s) -> double& { return s.cell.props.k_shape; });
  add(enum_key<ActivityModel>(
      "props.activity_model",
      [](Scenario& s) -> ActivityModel& { return s.cell.props.activity_model; },
      {{"vapour_plus_liquid", ActivityModel::VapourPlusLiquid},
       {"relative_humidity_only", ActivityModel::RelativeHumidityOnly}}));

  // Voltage stack.
  using voltage::OverpotentialMode;
  add(enum_key<OverpotentialMode>(
      "voltage.mode",
      [](Scenario& s) -> OverpotentialMode& { return s.voltage_cfg.mode; },
      {{"tafel", OverpotentialMode::Tafel},
       {"extended", OverpotentialMode::Extended}}));
  bnum("voltage.use_a_plus", [](Scenario& s) -> bool& { return s.voltage_cfg.use_a_plus; });
  bnum("voltage.use_flooding_factor", [](Scenario& s) -> bool& { return s.voltage_cfg.use_flooding_factor; });
  bnum("voltage.use_roughness", [](Scenario& s) -> bool& { return s.voltage_cfg.use_roughness; });
  bnum("voltage.use_temperature_activation", [](Scenario& s) -> bool& { return s.voltage_cfg.use_temperature_activation; });
  bnum("voltage.concentration_loss_enabled", [](Scenario& s) -> bool& { return s.voltage_cfg.concentration_loss_enabled; });

  // Mesh.
  inum("mesh.n_gdl", [](Scenario& s) -> int& { return s.resolution.n_gdl; });
  inum("mesh.n_cl", [](Scenario& s) -> int& { return s.resolution.n_cl; });
  inum("mesh.n_mem", [](Scenario& s) -> int& { return s.resolution.n_mem; });

  // Solver.
  dnum("solver.dt_init", [](Scenario& s) -> double& { return s.solver_cfg.dt_init; });
  dnum("solver.dt_min", [](Scenario& s) -> double& { return s.solver_cfg.dt_min; });
  dnum("solver.dt_max", [](Scenario& s) -> double& { return s.solver_cfg.dt_max; });
  dnum("solver.newton_tol", [](Scenario& s) -> double& { return s.solver_cfg.newton_tol; });
  inum("solver.newton_max_iter", [](Scenario& s) -> int& { return s.solver_cfg.newton_max_iter; });
  dnum("solver.time_error_tol", [](Scenario& s) -> double& { return s.solver_cfg.time_error_tol; });
  dnum("solver.steady_residual_tol", [](Scenario& s) -> double& { return s.solver_cfg.steady_residual_tol; });
  add({"solver.max_steps",
       [](Scenario& s, const std::string& v) {
         s.solver_cfg.max_steps = parse_int("solver.max_steps", v);
       },
       [](const Scenario& s) { return std::to_string(s.solver_cfg.max_steps); }});
  dnum("solver.s_clip", [](Scenario& s) -> double& { return s.solver_cfg.s_clip; });

  // Initial state.
  add(enum_key<InitKind>(
      "init.kind", [](Scenario& s) -> InitKind& { return s.init.kind; },
      {{"equilibrated", InitKind::Equilibrated}, {"dry_start", InitKind::DryStart}}));
  dnum("init.phi", [](Scenario& s) -> double& { return s.init.phi; });

  // Run.
  add(enum_key<RunKind>(
      "run.kind", [](Scenario& s) -> RunKind& { return s.kind; },
      {{"transient", RunKind::Transient},
       {"steady", RunKind::Steady},
       {"sweep", RunKind::Sweep},
       {"fit", RunKind::Fit},
       {"props_table", RunKind::PropsTable}}));
  dnum("run.t_end", [](Scenario& s) -> double& { return s.t_end; });
  dnum("run.output_every", [](Scenario& s) -> double& { return s.output_every; });
  add({"run.profile",
       [](Scenario& s, const std::string& v) {
         solver::CurrentProfile p;
         p.points.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (item.empty()) continue;
           const auto colon = item.find(':');
           if (colon == std::string::npos)
             throw ValidationError("key 'run.profile': expected 't:i' pairs, "
                                   "got '" + item + "'");
           p.points.emplace_back(parse_double("run.profile", item.substr(0, colon)),
                                 parse_double("run.profile", item.substr(colon + 1)));
         }
         if (p.points.empty())
           throw ValidationError("key 'run.profile': empty profile");
         s.profile = p;
       },
       [](const Scenario& s) {
         std::string out;
         for (const auto& [t, v] : s.profile.points) {
           if (!out.empty()) out += ",";
           out += fmt(t) + ":" + fmt(v);
         }
         return out;
       }});
  dnum("run.i_fc", [](Scenario& s) -> double& { return s.i_fc; });
  add({"run.i_list",
       [](Scenario& s, const std::string& v) {
         s.i_list = parse_list("run.i_list", v);
       },
       [](const Scenario& s) {
         std::string out;
         for (double v : s.i_list) {
           if (!out.empty()) out += ",";
           out += fmt(v);
         }
         return out;
       }});
  add({"run.data_path",
       [](Scenario& s, const std::string& v) { s.data_path = v; },
       [](const Scenario& s) { return s.data_path; }});
  add({"run.free_params",
       [](Scenario& s, const std::string& v) {
         s.free_params.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           if (item.empty()) continue;
           if (!calibration::param_from_name(item))
             throw ValidationError("key 'run.free_params': unknown parameter '" +
                                   item + "'");
           s.free_params.push_back(item);
         }
       },
       [](const Scenario& s) {
         std::string out;
         for (const auto& p : s.free_params) {
           if (!out.empty()) out += ",";
           out += p;
         }
         return out;
       }});
  add({"run.correlation",
       [](Scenario& s, const std::string& v) { s.correlation = v; },
       [](const Scenario& s) { return s.correlation; }});
  dnum("run.from", [](Scenario& s) -> double& { return s.table_from; });
  dnum("run.to", [](Scenario& s) -> double& { return s.table_to; });
  inum("run.points", [](Scenario& s) -> int& { return s.table_points; });
  return reg;
}

const std::vector<KeyEntry>& registry() {
  static const std::vector<KeyEntry> reg = build_registry();
  return reg;
}

void validate_scenario(const Scenario& sc) {
  sc.cell.validate();
  if (sc.resolution.n_gdl < 2 || sc.resolution.n_cl < 2 || sc.resolution.n_mem < 3)
    throw ValidationError("mesh: need n_gdl >= 2, n_cl >= 2, n_mem >= 3");
  const solver::SolverConfig& c = sc.solver_cfg;
  if (!(c.dt_min > 0 && c.dt_min <= c.dt_init && c.dt_init <= c.dt_max))
    throw ValidationError("solver: need 0 < dt_min <= dt_init <= dt_max");
  if (c.newton_tol <= 0 || c.time_error_tol <= 0 || c.steady_residual_tol <= 0)
    throw ValidationError("solver: tolerances must be positive");
  if (sc.init.kind == InitKind::Equilibrated &&
      (sc.init.phi <= 0.0 || sc.init.phi > 1.0))
    throw ValidationError("init.phi must be in (0, 1]");
  switch (sc.kind) {
    case RunKind::Transient:
      if (sc.t_end <= 0) throw ValidationError("run.t_end must be positive");
      if (sc.output_every <= 0)
        throw ValidationError("run.output_every must be positive");
      break;
    case RunKind::Steady:
      if (sc.i_fc < 0) throw ValidationError("run.i_fc must be non-negative");
      break;
    case RunKind::Sweep: {
      if (sc.i_list.empty()) throw ValidationError("run.i_list is empty");
      for (size_t i = 1; i < sc.i_list.size(); ++i)
        if (sc.i_list[i] <= sc.i_list[i - 1])
          throw ValidationError("run.i_list must be strictly increasing");
      break;
    }
    case RunKind::Fit: {
      if (sc.data_path.empty())
        throw ValidationError("run.data_path is required for fit runs");
      if (!std::filesystem::exists(sc.data_path))
        throw ValidationError("run.data_path does not exist: " + sc.data_path);
      if (sc.free_params.empty())
        throw ValidationError("run.free_params is empty");
      break;
    }
    case RunKind::PropsTable: {
      if (sc.correlation.empty())
        throw ValidationError("run.correlation is required for props_table runs");
      bool known = false;
      for (const auto& t : results_io::props_table_registry())
        if (t.name == sc.correlation) known = true;
      if (!known)
        throw ValidationError("run.correlation: unknown correlation '" +
                              sc.correlation + "'");
      break;
    }
  }
}

} // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("line " + std::to_string(lineno) +
                            ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeyEntry* entry = nullptr;
    for (const auto& e : registry())
      if (e.key == key) entry = &e;
    if (!entry) throw ValidationError("unknown key '" + key + "'");
    entry->set(sc, value);
  }
  validate_scenario(sc);
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string resolved_config(const Scenario& sc) {
  std::string out;
  for (const auto& e : registry()) {
    const std::string v = e.get(sc);
    if (v.empty()) continue; // unset paths/lists
    out += e.key + " = " + v + "\n";
  }
  return out;
}

std::vector<calibration::DataPoint> read_polarization_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open data file: " + path);
  std::vector<calibration::DataPoint> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(trim(c));
    if (cells.empty()) continue;
    if (lineno == 1 && !cells[0].empty() &&
        !std::isdigit(static_cast<unsigned char>(cells[0][0])) &&
        cells[0][0] != '-' && cells[0][0] != '+' && cells[0][0] != '.')
      continue; // header row
    if (cells.size() < 2)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected i_A_per_m2, U_V[, weight]");
    calibration::DataPoint d;
    d.i_fc = parse_double("data.i", cells[0]);
    d.U_meas = parse_double("data.U", cells[1]);
    if (cells.size() > 2 && !cells[2].empty())
      d.weight = parse_double("data.weight", cells[2]);
    out.push_back(d);
  }
  if (out.empty()) throw ValidationError(path + ": no data rows");
  return out;
}

void run_scenario(const Scenario& sc, const std::string& out_dir, bool quiet) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/resolved_config", std::ios::binary);
    if (!f) throw NumericalError("cannot write " + out_dir + "/resolved_config");
    f << resolved_config(sc);
  }

  switch (sc.kind) {
    case RunKind::Transient: {
      solver::Simulator sim(sc.cell, sc.resolution, sc.solver_cfg, sc.voltage_cfg);
      const StateVector s0 = initial_state(sc.cell, sim.mesh(), sc.init);
      const solver::TransientResult res =
          sim.run_transient(s0, sc.profile, sc.t_end, sc.output_every);
      results_io::write_timeseries(out_dir + "/timeseries.csv", sim.mesh(), res);
      results_io::write_ledger(out_dir + "/ledger.csv", res.ledger);
      if (!quiet)
        std::printf("transient: %zu snapshots, %ld steps (%ld rejected), "
                    "final U = %.4f V\n",
                    res.times.size(), res.steps_accepted, res.steps_rejected,
                    res.reports.back().U_cell);
      break;
    }
    case RunKind::Steady: {
      solver::Simulator sim(sc.cell, sc.resolution, sc.solver_cfg, sc.voltage_cfg);
      const StateVector s0 = initial_state(sc.cell, sim.mesh(), sc.init);
      solver::SteadyStats stats;
      solver::SweepRow row;
      row.i_fc = sc.i_fc;
      row.state = sim.solve_steady(s0, sc.i_fc, &stats);
      row.rep = sim.report(row.state, sc.i_fc);
      row.residual = stats.residual;
      row.feasible = true;
      results_io::write_polarization(out_dir + "/polarization.csv", {row});
      if (!quiet)
        std::printf("steady: i = %.0f A/m^2, U = %.4f V, residual %.2e\n",
                    sc.i_fc, row.rep.U_cell, stats.residual);
      break;
    }
    case RunKind::Sweep: {
      const std::vector<solver::SweepRow> rows = solver::polarization_sweep(
          sc.cell, sc.resolution, sc.solver_cfg, sc.voltage_cfg, sc.i_list);
      results_io::write_polarization(out_dir + "/polarization.csv", rows);
      if (!quiet)
        for (const auto& r : rows)
          std::printf("  i = %8.1f A/m^2 : %s\n", r.i_fc,
                      r.feasible ? results_io::format_number(r.rep.U_cell).c_str()
                                 : r.error.c_str());
      break;
    }
    case RunKind::Fit: {
      calibration::CalibrationProblem pb;
      pb.cell = sc.cell;
      pb.resolution = sc.resolution;
      pb.solver_cfg = sc.solver_cfg;
      pb.voltage_cfg = sc.voltage_cfg;
      pb.data = read_polarization_csv(sc.data_path);
      std::vector<double> init;
      for (const auto& name : sc.free_params) {
        const auto p = calibration::param_from_name(name);
        pb.free_params.push_back(calibration::default_spec(*p));
        switch (*p) {
          case calibration::Param::i0: init.push_back(sc.cell.electro.i0_c_ref); break;
          case calibration::Param::kappa_c: init.push_back(sc.cell.electro.kappa_c); break;
          case calibration::Param::alpha_c: init.push_back(sc.cell.electro.alpha_c); break;
          case calibration::Param::R_e: init.push_back(sc.cell.electro.R_e); break;
          case calibration::Param::i_lim:
            init.push_back(sc.cell.electro.i_lim > 0 ? sc.cell.electro.i_lim : 2e4);
            break;
        }
      }
      const calibration::CalibrationResult res = calibration::fit(pb, init);
      results_io::write_fit_report(out_dir, pb, res);
      if (!quiet) {
        std::printf("fit: rms %.4g V (initial %.4g V), %d evaluations\n",
                    res.rms, res.initial_rms, res.residual_evaluations);
        for (size_t j = 0; j < pb.free_params.size(); ++j)
          std::printf("  %s = %.6g%s\n",
                      calibration::param_name(pb.free_params[j].which),
                      res.values[j], res.bound_hit[j] ? " [at bound]" : "");
      }
      break;
    }
    case RunKind::PropsTable: {
      const std::string path = results_io::write_props_table(
          out_dir, sc.correlation, sc.table_from, sc.table_to, sc.table_points,
          sc.cell);
      if (!quiet) std::printf("wrote %s\n", path.c_str());
      break;
    }
  }
}

} // namespace pemfc::scenario
