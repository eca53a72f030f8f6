#pragma once

// Voltage stack: equilibrium potential, cathode overpotential (Tafel or the
// extended exchange-current form), internal current with its short-circuit
// fixed point, ohmic resistances, and the optional concentration loss.

#include "pemfc/transport.hpp"

namespace pemfc::voltage {

enum class OverpotentialMode { Tafel, Extended };

struct OverpotentialConfig {
  OverpotentialMode mode = OverpotentialMode::Tafel;
  bool use_a_plus = false;
  bool use_flooding_factor = false;
  bool use_roughness = false;
  bool use_temperature_activation = false;
  bool concentration_loss_enabled = false;
};

struct VoltageReport {
  double U_eq = 0, eta_c = 0;
  double dV_ohmic_p = 0, dV_ohmic_e = 0, dV_conc = 0;
  double U_cell = 0;
  double i_n = 0, i_sc = 0, i_co_h2 = 0, i_co_o2 = 0;
  double R_p = 0;
};

// Nernst potential from the CL concentrations; throws InfeasibleError on a
// starved (non-positive) concentration.
double equilibrium_potential(double c_h2_acl, double c_o2_ccl, double T,
                             const Electro& el);

// Exchange current density i_0,c for the configured mode.
double exchange_current(const CellDefinition& cell, const OverpotentialConfig& cfg,
                        double c_o2_ccl, double s_ccl, double lambda_ccl);

// Cathode overpotential (RT/alpha_c F) ln((i_fc + i_n)/i_0,c).
double overpotential(double i_fc, double i_n, double i0c, double T, double alpha_c);

// Activity of solvated protons: physical root of the acid-base quadratic,
// with the analytic lambda/(lambda+1) limit at K_e -> 1.
double proton_activity(double lambda, double T, const Electro& el);

// Short-circuit areal resistance from the channel pressures.
double short_circuit_resistance(double p_agc, double p_cgc);

// Proton resistance: membrane integral plus one third of the CCL ionomer
// integral, midpoint quadrature over the mesh. Throws NumericalError if the
// conductivity vanishes anywhere.
double proton_resistance(const CellDefinition& cell, const Mesh1D& mesh,
                         const StateVector& st);

// (RT/2F) ln(i_lim/(i_lim - i_fc)); throws InfeasibleError at i_fc >= i_lim.
double concentration_loss(double i_fc, double T, double i_lim);

// Full report at a state: damped fixed point over the U_cell <-> i_sc
// coupling. Throws on starvation or non-convergence.
VoltageReport cell_voltage(const transport::RunContext& ctx,
                           const StateVector& st, double i_fc,
                           const OverpotentialConfig& cfg);

} // namespace pemfc::voltage
