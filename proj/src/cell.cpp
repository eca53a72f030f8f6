#include "pemfc/cell.hpp"

#include <string>

#include "pemfc/errors.hpp"

namespace pemfc {

CellDefinition::CellDefinition() {
  gdl.eps = 0.6;
  gdl.eps_c = 0.2;
  gdl.e_cap = 4.0;
  gdl.theta_c_deg = 120.0;

  cl.eps = 0.2;
  cl.eps_c = 0.0; // CLs barely deform under clamping
  cl.e_cap = 3.0;
  cl.theta_c_deg = 120.0;
  cl.eps_mc = 0.2;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("cell definition: " + what);
}

void check_porous(const props::PorousConstants& pc, const char* name) {
  const std::string n = name;
  require(pc.eps > 0.0 && pc.eps < 1.0, n + ".eps in (0,1)");
  require(pc.eps_p > 0.0 && pc.eps_p < pc.eps, n + ".eps_p in (0, eps)");
  require(pc.tau > 0.0, n + ".tau > 0");
  require(pc.eps_c >= 0.0 && pc.eps_c <= 0.5, n + ".eps_c in [0, 0.5]");
  require(pc.r_f_fiber > 0.0, n + ".r_f_fiber > 0");
  // Published capillary-exponent rule: cubic for sand-like porosities,
  // 4..5 for high-porosity fibrous media.
  if (pc.eps >= 0.1 && pc.eps <= 0.4)
    require(pc.e_cap == 3.0, n + ".e_cap = 3 required for eps in [0.1, 0.4]");
  else if (pc.eps >= 0.6 && pc.eps <= 0.8)
    require(pc.e_cap >= 4.0 && pc.e_cap <= 5.0,
            n + ".e_cap in [4, 5] required for eps in [0.6, 0.8]");
  else
    require(pc.e_cap >= 3.0 && pc.e_cap <= 5.0, n + ".e_cap in [3, 5]");
  require(pc.eps_mc >= 0.0 && pc.eps_mc < 1.0, n + ".eps_mc in [0, 1)");
}

} // namespace

void CellDefinition::validate() const {
  require(geom.H_gc > 0, "geometry.H_gc > 0");
  require(geom.W_gc > 0, "geometry.W_gc > 0");
  require(geom.L_gc > 0, "geometry.L_gc > 0");
  require(geom.H_gdl > 0, "geometry.H_gdl > 0");
  require(geom.H_cl > 0, "geometry.H_cl > 0");
  require(geom.H_mem > 0, "geometry.H_mem > 0");
  require(geom.A_act > 0, "geometry.A_act > 0");
  const double ar = geom.W_gc / geom.H_gc;
  require(ar >= 0.2 && ar <= 10.0, "geometry.W_gc/H_gc in [0.2, 10]");

  check_porous(gdl, "gdl");
  check_porous(cl, "cl");
  require(cl.eps_mc > 0.0, "cl.eps_mc > 0");

  require(mem.rho_mem > 0, "membrane.rho_mem > 0");
  require(mem.M_eq > 0, "membrane.M_eq > 0");
  require(mem.V_w > 0, "membrane.V_w > 0");

  require(op.T_fc > 273.0 && op.T_fc < 373.0, "operating.T_fc in (273, 373) K");
  require(op.P_a_des > 0, "operating.P_a_des > 0");
  require(op.P_c_des > 0, "operating.P_c_des > 0");
  require(op.Phi_a_des > 0.0 && op.Phi_a_des <= 1.0, "operating.Phi_a_des in (0, 1]");
  require(op.Phi_c_des > 0.0 && op.Phi_c_des <= 1.0, "operating.Phi_c_des in (0, 1]");
  require(op.S_a >= 1.0, "operating.S_a >= 1");
  require(op.S_c >= 1.0, "operating.S_c >= 1");
  require(op.y_O2_ext > 0.0 && op.y_O2_ext < 1.0, "operating.y_O2_ext in (0, 1)");
  require(op.k_em_in >= 3.5e-6 && op.k_em_in <= 8.0e-6,
          "operating.k_em_in in [3.5e-6, 8.0e-6]");

  require(electro.alpha_c > 0.0 && electro.alpha_c <= 1.0, "electro.alpha_c in (0, 1]");
  require(electro.kappa_c >= 0.25 && electro.kappa_c <= 4.0, "electro.kappa_c in [0.25, 4]");
  require(electro.i0_c_ref > 0, "electro.i0_c_ref > 0");
  require(electro.i0_353_ref > 0, "electro.i0_353_ref > 0");
  require(electro.C_O2_ref > 0, "electro.C_O2_ref > 0");
  require(electro.R_e >= 0, "electro.R_e >= 0");
  require(electro.r_f_electrode > 0, "electro.r_f_electrode > 0");
  require(electro.gamma_cond > 0, "electro.gamma_cond > 0");
  require(electro.gamma_evap > 0, "electro.gamma_evap > 0");

  require(props.k_shape > 0, "props.k_shape > 0");
}

} // namespace pemfc
