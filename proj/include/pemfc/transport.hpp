#pragma once

// Matter fluxes at mesh faces and volumetric sources per cell, for a given
// state and current density. All fluxes are referenced to the active area;
// gas-channel inlet/outlet flows are referenced to the channel cross-section
// H_gc*W_gc. Pure functions of (state, parameters).

#include <vector>

#include "pemfc/cell.hpp"
#include "pemfc/mesh.hpp"
#include "pemfc/state.hpp"

namespace pemfc::transport {

// Per-run constants derived from the cell definition; immutable and shared.
struct RunContext {
  const CellDefinition* cell = nullptr;
  const Mesh1D* mesh = nullptr;

  double T = 0.0, psat = 0.0, csat = 0.0;
  double rho_l = 0.0, nu_l = 0.0;
  double lambda_l_eq = 0.0;
  double sh = 0.0;          // Sherwood number of the channels
  double K0_gdl = 0.0, K0_cl = 0.0;
  double dcap_pref_gdl = 0.0, dcap_pref_cl = 0.0;
  double area_ratio = 0.0;  // A_act / (H_gc W_gc)
  double inv_Lgc = 0.0;

  static RunContext make(const CellDefinition& cell, const Mesh1D& mesh);

  const props::PorousConstants& porous(int i) const {
    Region r = mesh->region(i);
    return (r == Region::AGDL || r == Region::CGDL) ? cell->gdl : cell->cl;
  }
  bool is_gdl(int i) const {
    Region r = mesh->region(i);
    return r == Region::AGDL || r == Region::CGDL;
  }
  double d_cap_local(double s, int i) const;
  // Effective diffusivity of the anode (H2O/H2) or cathode (H2O/O2) pair in
  // cell i at local pressure P.
  double d_eff_local(double s, int i, double P) const;
};

struct TransportInputs {
  double i_fc = 0.0; // A/m^2, imposed current density
  double i_n = 0.0;  // A/m^2, internal current (lagged from voltage solve)
  double i_sc = 0.0; // A/m^2, short-circuit current (lagged)
};

// Inlet/outlet molar flows per channel cross-section (mol m^-2 s^-1).
struct BoundaryFlows {
  double v_in_a = 0, v_out_a = 0, v_in_c = 0, v_out_c = 0;
  double h2_in = 0, h2_out = 0;
  double o2_in = 0, o2_out = 0;
  double n2_in = 0, n2_out = 0;
};

// Crossover bundle shared between transport sources and the internal
// current: gradients use the membrane-gradient convention grad C = C_cl/H_mem
// with the far side at zero (instantaneous consumption).
struct CrossoverState {
  double k_h2 = 0, k_o2 = 0;          // mol m^-1 s^-1 Pa^-1
  double grad_ch2 = 0, grad_co2 = 0;  // mol/m^4
  double s_h2_co = 0, s_o2_co = 0;    // mol m^-3 s^-1, in the source CL
};

struct StateAverages {
  double lambda_mem = 0, lambda_acl = 0, lambda_ccl = 0;
  double c_h2_acl = 0, c_o2_ccl = 0;
  double s_ccl = 0;
  double p_agc = 0, p_cgc = 0;
};

// Active branch of every switching term: condensation vs evaporation per
// cell, absorption vs desorption per CL cell, outlet valves open or closed.
// The stepper freezes a pattern across one implicit step so Newton sees a
// smooth system; all branches agree with the plain evaluation at the state
// the pattern was taken from.
struct BranchState {
  std::vector<signed char> vl_condensing;  // per cell, +1 cond / -1 evap
  std::vector<signed char> sorp_absorbing; // per cell (CLs), +1 abs / -1 des
  signed char outlet_a_open = 0;
  signed char outlet_c_open = 0;
};

BranchState branch_state(const RunContext& ctx, const StateVector& st);

struct FluxSourceFields {
  // Face arrays (n_faces). Boundary faces hold the codi fluxes; fluxes are
  // identically zero where a field is not defined.
  std::vector<double> j_mem;       // mol m^-2 s^-1
  std::vector<double> j_cap;       // kg m^-2 s^-1
  std::vector<double> j_v, j_h2, j_o2; // mol m^-2 s^-1

  // Cell arrays (n_cells), mol m^-3 s^-1.
  std::vector<double> s_sorp, s_prod, s_vl, s_h2_cons, s_o2_cons;

  BoundaryFlows bc;
  CrossoverState co;

  // Codi fluxes at the two GDL/GC interfaces (per active area); duplicated
  // from the boundary entries of the face arrays for the GC balances.
  double j_codi_v_a = 0, j_codi_v_c = 0, j_codi_h2 = 0, j_codi_o2 = 0;
};

StateAverages compute_averages(const RunContext& ctx, const StateVector& st);

CrossoverState crossover_state(const RunContext& ctx, const StateVector& st);

// Throws NumericalError("GC fully saturated") when a channel pressure drops
// to the desired-humidity vapour pressure.
BoundaryFlows boundary_flows(const RunContext& ctx, const StateVector& st,
                             double i_fc, double i_n,
                             const BranchState* frozen = nullptr);

FluxSourceFields evaluate(const RunContext& ctx, const StateVector& st,
                          const TransportInputs& in,
                          const BranchState* frozen = nullptr);

} // namespace pemfc::transport
