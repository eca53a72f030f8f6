#pragma once

// Cell definition: geometry, layer materials, membrane, operating point and
// electrochemical parameters. Defaults follow the most recent published
// parameter sets (Xu 2021 / Wang 2020 where they exist); every field is
// overridable from a scenario file. Immutable once validated.

#include "pemfc/properties.hpp"

namespace pemfc {

struct Geometry {
  double H_gc = 5e-4;    // m, gas channel height
  double W_gc = 8e-4;    // m, gas channel width
  double L_gc = 12.0;    // m, cumulated channel length
  double H_gdl = 2.3e-4; // m
  double H_cl = 1e-5;    // m
  double H_mem = 2.5e-5; // m
  double A_act = 2.91e-2;// m^2, active area
};

struct Operating {
  double T_fc = 353.15;     // K
  double P_a_des = 101325.0;// Pa, anode desired pressure
  double P_c_des = 101325.0;// Pa
  double Phi_a_des = 0.8;   // inlet relative humidity
  double Phi_c_des = 0.8;
  double S_a = 1.4;         // anode stoichiometry
  double S_c = 1.8;
  double y_O2_ext = 0.2095; // O2 molar fraction of dry air
  double k_em_in = 5.0e-6;  // kg s^-1 Pa^-1, exhaust orifice constant
};

struct Electro {
  double E0 = 1.229;        // V, standard reversible voltage
  double P_ref = 1e5;       // Pa
  double alpha_c = 0.5;     // cathode charge-transfer coefficient
  double kappa_c = 1.0;     // concentration exponent (undetermined, calibrate)
  double i0_c_ref = 0.67;   // A/m^2 at C_O2_ref (undetermined, calibrate)
  double i0_353_ref = 0.67; // A/m^2, reference for the extended form
  double C_O2_ref = 3.39;   // mol/m^3
  double E_act = 6.568e4;   // J/mol, cathode activation energy
  double R_e = 0.0;         // ohm m^2, electron path resistance
  double i_lim = 0.0;       // A/m^2; <= 0 disables the concentration-loss term
  double r_f_electrode = 100.0; // ECSA * L_Pt, electrode roughness
  double K_e0 = 6.2;        // standard acid-base equilibrium constant
  double dH0 = 5.23e4;      // J/mol, standard reaction enthalpy
  double gamma_cond = 5e3;  // 1/s, condensation rate (Meng)
  double gamma_evap = 1e-4; // 1/(Pa s), evaporation rate (Meng)
  bool enable_crossover = true;
  bool enable_short_circuit = true;
};

struct CellDefinition {
  Geometry geom;
  props::PorousConstants gdl; // both GDLs
  props::PorousConstants cl;  // both CLs
  props::MembraneConstants mem;
  Operating op;
  Electro electro;
  props::PropertyConfig props;

  CellDefinition();

  // Throws ValidationError naming the offending field and constraint.
  void validate() const;
};

} // namespace pemfc
