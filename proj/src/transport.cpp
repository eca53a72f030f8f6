#include "pemfc/transport.hpp"

#include <algorithm>
#include <cmath>

#include "pemfc/errors.hpp"

namespace pemfc::transport {

using namespace props;

namespace {

constexpr double kTiny = 1e-300;

double harmonic(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }

} // namespace

RunContext RunContext::make(const CellDefinition& cell, const Mesh1D& mesh) {
  RunContext ctx;
  ctx.cell = &cell;
  ctx.mesh = &mesh;
  ctx.T = cell.op.T_fc;
  ctx.psat = p_sat(ctx.T);
  ctx.csat = ctx.psat / (kGasConst * ctx.T);
  ctx.rho_l = liquid_water_density(ctx.T);
  ctx.nu_l = liquid_viscosity_kinematic(ctx.T);
  ctx.lambda_l_eq = lambda_eq_liquid(ctx.T);
  ctx.sh = sherwood(cell.geom.W_gc, cell.geom.H_gc);
  ctx.K0_gdl = intrinsic_permeability_tsb(cell.gdl);
  ctx.K0_cl = intrinsic_permeability_tsb(cell.cl);
  const double sigma = surface_tension(ctx.T);
  auto pref = [&](const PorousConstants& pc, double K0) {
    return sigma * K0 / ctx.nu_l *
           std::abs(std::cos(pc.theta_c_deg * M_PI / 180.0)) *
           std::sqrt(pc.eps / K0);
  };
  ctx.dcap_pref_gdl = pref(cell.gdl, ctx.K0_gdl);
  ctx.dcap_pref_cl = pref(cell.cl, ctx.K0_cl);
  ctx.area_ratio = cell.geom.A_act / (cell.geom.H_gc * cell.geom.W_gc);
  ctx.inv_Lgc = 1.0 / cell.geom.L_gc;
  return ctx;
}

double RunContext::d_cap_local(double s, int i) const {
  const props::PorousConstants& pc = porous(i);
  const double sc = clamp01(s);
  const double dj = k::lev[0] + sc * (2.0 * k::lev[1] + sc * 3.0 * k::lev[2]);
  const double pref = is_gdl(i) ? dcap_pref_gdl : dcap_pref_cl;
  return pref * std::pow(sc, pc.e_cap) * dj;
}

double RunContext::d_eff_local(double s, int i, double P) const {
  const GasPair pair = mesh->anode_side(i) ? GasPair::H2O_H2 : GasPair::H2O_O2;
  const double D = binary_diffusivity(pair, T, std::max(P, 1.0));
  return effective_diffusivity(D, clamp01(s), is_gdl(i) ? Layer::GDL : Layer::CL,
                               Direction::ThroughPlane, porous(i));
}

StateAverages compute_averages(const RunContext& ctx, const StateVector& st) {
  const Mesh1D& m = *ctx.mesh;
  StateAverages a;
  double w_mem = 0, w_acl = 0, w_ccl = 0;
  for (int i = 0; i < m.n_cells(); ++i) {
    const double dx = m.width(i);
    switch (m.region(i)) {
      case Region::MEM:
        a.lambda_mem += st.lambda[m.lambda_index(i)] * dx;
        w_mem += dx;
        break;
      case Region::ACL:
        a.lambda_acl += st.lambda[m.lambda_index(i)] * dx;
        a.c_h2_acl += st.c_h2[m.h2_index(i)] * dx;
        w_acl += dx;
        break;
      case Region::CCL:
        a.lambda_ccl += st.lambda[m.lambda_index(i)] * dx;
        a.c_o2_ccl += st.c_o2[m.o2_index(i)] * dx;
        a.s_ccl += st.s[m.liquid_index(i)] * dx;
        w_ccl += dx;
        break;
      default:
        break;
    }
  }
  a.lambda_mem /= w_mem;
  a.lambda_acl /= w_acl;
  a.c_h2_acl /= w_acl;
  a.lambda_ccl /= w_ccl;
  a.c_o2_ccl /= w_ccl;
  a.s_ccl /= w_ccl;
  a.p_agc = (st.c_v_agc + st.c_h2_agc) * kGasConst * ctx.T;
  a.p_cgc = (st.c_v_cgc + st.c_o2_cgc + st.c_n2) * kGasConst * ctx.T;
  return a;
}

CrossoverState crossover_state(const RunContext& ctx, const StateVector& st) {
  CrossoverState co;
  if (!ctx.cell->electro.enable_crossover) return co;
  const StateAverages a = compute_averages(ctx, st);
  const double lam = std::max(a.lambda_mem, 0.0);
  co.k_h2 = crossover_permeability(CrossoverGas::H2, lam, ctx.lambda_l_eq,
                                   ctx.T, ctx.cell->mem);
  co.k_o2 = crossover_permeability(CrossoverGas::O2, lam, ctx.lambda_l_eq,
                                   ctx.T, ctx.cell->mem);
  co.grad_ch2 = std::max(a.c_h2_acl, 0.0) / ctx.cell->geom.H_mem;
  co.grad_co2 = std::max(a.c_o2_ccl, 0.0) / ctx.cell->geom.H_mem;
  const double rt_hcl = kGasConst * ctx.T / ctx.cell->geom.H_cl;
  co.s_h2_co = co.k_h2 * rt_hcl * co.grad_ch2;
  co.s_o2_co = co.k_o2 * rt_hcl * co.grad_co2;
  return co;
}

BranchState branch_state(const RunContext& ctx, const StateVector& st) {
  const Mesh1D& m = *ctx.mesh;
  BranchState b;
  b.vl_condensing.assign(m.n_cells(), 0);
  b.sorp_absorbing.assign(m.n_cells(), 0);
  for (int i = 0; i < m.n_cells(); ++i) {
    const Region r = m.region(i);
    if (r == Region::MEM) continue;
    const int li = m.liquid_index(i);
    b.vl_condensing[i] = std::max(st.c_v[li], 0.0) > ctx.csat ? 1 : -1;
    if (r == Region::ACL || r == Region::CCL) {
      const double lam = std::max(st.lambda[m.lambda_index(i)], 0.0);
      const double a_w = water_activity(std::max(st.c_v[li], 0.0),
                                        clamp01(st.s[li]), ctx.T,
                                        ctx.cell->props);
      const double leq = lambda_eq(a_w, ctx.T, ctx.cell->props);
      b.sorp_absorbing[i] = leq >= lam ? 1 : -1;
    }
  }
  const double p_agc = (st.c_v_agc + st.c_h2_agc) * kGasConst * ctx.T;
  const double p_cgc =
      (st.c_v_cgc + st.c_o2_cgc + st.c_n2) * kGasConst * ctx.T;
  b.outlet_a_open = p_agc > ctx.cell->op.P_a_des ? 1 : 0;
  b.outlet_c_open = p_cgc > ctx.cell->op.P_c_des ? 1 : 0;
  return b;
}

BoundaryFlows boundary_flows(const RunContext& ctx, const StateVector& st,
                             double i_fc, double i_n,
                             const BranchState* frozen) {
  const Operating& op = ctx.cell->op;
  const double T = ctx.T;
  const double i_tot = i_fc + i_n;
  BoundaryFlows bf;

  const double p_agc = (st.c_v_agc + st.c_h2_agc) * kGasConst * T;
  const double p_cgc = (st.c_v_cgc + st.c_o2_cgc + st.c_n2) * kGasConst * T;
  const double dry_a_in = p_agc - op.Phi_a_des * ctx.psat;
  const double dry_c_in = p_cgc - op.Phi_c_des * ctx.psat;
  if (dry_a_in <= 0.0 || dry_c_in <= 0.0)
    throw NumericalError("GC fully saturated: channel pressure at or below "
                         "the desired-humidity vapour pressure");

  bf.h2_in = ctx.area_ratio * op.S_a * i_tot / (2.0 * kFaraday);
  bf.v_in_a = op.Phi_a_des * ctx.psat / dry_a_in * bf.h2_in;
  bf.o2_in = ctx.area_ratio * op.S_c * i_tot / (4.0 * kFaraday);
  bf.v_in_c = op.Phi_c_des * ctx.psat / dry_c_in / op.y_O2_ext * bf.o2_in;
  bf.n2_in = (1.0 - op.y_O2_ext) / op.y_O2_ext * bf.o2_in;

  const Geometry& g = ctx.cell->geom;
  const bool a_open = frozen ? frozen->outlet_a_open != 0 : p_agc > op.P_a_des;
  const bool c_open = frozen ? frozen->outlet_c_open != 0 : p_cgc > op.P_c_des;
  // Anode outlet, proportional to the overpressure against the set point.
  if (a_open) {
    const double cv = std::max(st.c_v_agc, 0.0);
    const double ch2 = std::max(st.c_h2_agc, 0.0);
    const double M_out = (cv * kMolarMassH2O + ch2 * kMolarMassH2) /
                         std::max(cv + ch2, kTiny);
    const double tot =
        op.k_em_in / (g.H_gc * g.W_gc * M_out) * (p_agc - op.P_a_des);
    const double x_v = cv * kGasConst * T / p_agc;
    bf.v_out_a = x_v * tot;
    bf.h2_out = (1.0 - x_v) * tot;
  }
  // Cathode outlet.
  if (c_open) {
    const double cv = std::max(st.c_v_cgc, 0.0);
    const double co2 = std::max(st.c_o2_cgc, 0.0);
    const double cn2 = std::max(st.c_n2, 0.0);
    const double M_out = (cv * kMolarMassH2O + co2 * kMolarMassO2 +
                          cn2 * kMolarMassN2) /
                         std::max(cv + co2 + cn2, kTiny);
    const double tot =
        op.k_em_in / (g.H_gc * g.W_gc * M_out) * (p_cgc - op.P_c_des);
    const double x_v = cv * kGasConst * T / p_cgc;
    const double y_dry = co2 / std::max(co2 + cn2, kTiny);
    bf.v_out_c = x_v * tot;
    bf.o2_out = y_dry * (1.0 - x_v) * tot;
    bf.n2_out = (1.0 - y_dry) * (1.0 - x_v) * tot;
  }
  return bf;
}

FluxSourceFields evaluate(const RunContext& ctx, const StateVector& st,
                          const TransportInputs& in,
                          const BranchState* frozen) {
  const Mesh1D& m = *ctx.mesh;
  const CellDefinition& cell = *ctx.cell;
  const int nc = m.n_cells();
  const int nf = m.n_faces();

  FluxSourceFields f;
  f.j_mem.assign(nf, 0.0);
  f.j_cap.assign(nf, 0.0);
  f.j_v.assign(nf, 0.0);
  f.j_h2.assign(nf, 0.0);
  f.j_o2.assign(nf, 0.0);
  f.s_sorp.assign(nc, 0.0);
  f.s_prod.assign(nc, 0.0);
  f.s_vl.assign(nc, 0.0);
  f.s_h2_cons.assign(nc, 0.0);
  f.s_o2_cons.assign(nc, 0.0);

  f.co = crossover_state(ctx, st);
  f.bc = boundary_flows(ctx, st, in.i_fc, in.i_n, frozen);

  // Local total pressures for the binary diffusivities.
  std::vector<double> p_loc(nc, 0.0);
  for (int i = 0; i < nc; ++i) {
    if (m.region(i) == Region::MEM) continue;
    const int li = m.liquid_index(i);
    double ctot = std::max(st.c_v[li], 0.0);
    if (m.anode_side(i))
      ctot += std::max(st.c_h2[m.h2_index(i)], 0.0);
    else
      ctot += std::max(st.c_o2[m.o2_index(i)], 0.0) + std::max(st.c_n2, 0.0);
    p_loc[i] = std::max(ctot, kTiny) * kGasConst * ctx.T;
  }

  // Dissolved-water flux through the ionomer (EOD toward the cathode plus
  // back-diffusion); zero at the outer ionomer borders.
  const double rho_over_M = cell.mem.rho_mem / cell.mem.M_eq;
  for (int fi = m.first_acl() + 1; fi < m.first_cgdl(); ++fi) {
    const int L = fi - 1, R = fi;
    const double lamL = st.lambda[m.lambda_index(L)];
    const double lamR = st.lambda[m.lambda_index(R)];
    const double lam_face = 0.5 * (lamL + lamR);
    const double grad = (lamR - lamL) / (m.center(R) - m.center(L));
    const double D = d_lambda(std::max(lam_face, 0.0), ctx.T, cell.props);
    f.j_mem[fi] = k::eod_slope * in.i_fc / kFaraday * lam_face -
                  rho_over_M * D * grad;
  }

  // Capillary liquid flux; Dirichlet s = 0 ghost at the GDL/GC faces,
  // harmonic mean of the one-sided D_cap at unlike-material interfaces.
  auto cap_interior = [&](int fi) {
    const int L = fi - 1, R = fi;
    const double sL = st.s[m.liquid_index(L)];
    const double sR = st.s[m.liquid_index(R)];
    double D;
    if (ctx.is_gdl(L) != ctx.is_gdl(R)) {
      D = harmonic(ctx.d_cap_local(sL, L), ctx.d_cap_local(sR, R));
    } else {
      D = ctx.d_cap_local(0.5 * (sL + sR), L);
    }
    f.j_cap[fi] = -D * (sR - sL) / (m.center(R) - m.center(L));
  };
  for (int fi = 1; fi < m.first_mem(); ++fi) cap_interior(fi);
  for (int fi = m.first_ccl() + 1; fi < nc; ++fi) cap_interior(fi);
  {
    const double s0 = st.s[m.liquid_index(0)];
    f.j_cap[0] = -ctx.d_cap_local(0.5 * s0, 0) * s0 / (0.5 * m.width(0));
    const double sN = st.s[m.liquid_index(nc - 1)];
    f.j_cap[nf - 1] =
        ctx.d_cap_local(0.5 * sN, nc - 1) * sN / (0.5 * m.width(nc - 1));
  }

  // Gas diffusive fluxes; arithmetic mean of cell diffusivities inside a
  // layer, harmonic across unlike layers (a flooded cell blocks the face).
  auto face_deff = [&](int fi) {
    const int L = fi - 1, R = fi;
    const double DL = ctx.d_eff_local(st.s[m.liquid_index(L)], L, p_loc[L]);
    const double DR = ctx.d_eff_local(st.s[m.liquid_index(R)], R, p_loc[R]);
    return ctx.is_gdl(L) != ctx.is_gdl(R) ? harmonic(DL, DR)
                                          : 0.5 * (DL + DR);
  };
  auto gas_interior = [&](int fi, std::vector<double>& out,
                          const std::vector<double>& conc, auto idx) {
    const int L = fi - 1, R = fi;
    out[fi] = -face_deff(fi) * (conc[idx(R)] - conc[idx(L)]) /
              (m.center(R) - m.center(L));
  };
  auto liq_idx = [&](int i) { return m.liquid_index(i); };
  auto h2_idx = [&](int i) { return m.h2_index(i); };
  auto o2_idx = [&](int i) { return m.o2_index(i); };
  for (int fi = 1; fi < m.first_mem(); ++fi) {
    gas_interior(fi, f.j_v, st.c_v, liq_idx);
    gas_interior(fi, f.j_h2, st.c_h2, h2_idx);
  }
  for (int fi = m.first_ccl() + 1; fi < nc; ++fi) {
    gas_interior(fi, f.j_v, st.c_v, liq_idx);
    gas_interior(fi, f.j_o2, st.c_o2, o2_idx);
  }

  // Convective-diffusive exchange with the channels. The interface
  // concentration is a one-sided linear reconstruction from the last two
  // GDL cells; h uses the plain binary diffusivity at channel pressure.
  {
    const double p_agc = (st.c_v_agc + st.c_h2_agc) * kGasConst * ctx.T;
    const double p_cgc =
        (st.c_v_cgc + st.c_o2_cgc + st.c_n2) * kGasConst * ctx.T;
    const double h_a = ctx.sh *
                       binary_diffusivity(GasPair::H2O_H2, ctx.T,
                                          std::max(p_agc, 1.0)) /
                       cell.geom.H_gc;
    const double h_c = ctx.sh *
                       binary_diffusivity(GasPair::H2O_O2, ctx.T,
                                          std::max(p_cgc, 1.0)) /
                       cell.geom.H_gc;
    auto recon_left = [&](const std::vector<double>& c, auto idx) {
      return 1.5 * c[idx(0)] - 0.5 * c[idx(1)];
    };
    auto recon_right = [&](const std::vector<double>& c, auto idx) {
      return 1.5 * c[idx(nc - 1)] - 0.5 * c[idx(nc - 2)];
    };
    f.j_codi_v_a = h_a * (st.c_v_agc - recon_left(st.c_v, liq_idx));
    f.j_codi_h2 = h_a * (st.c_h2_agc - recon_left(st.c_h2, h2_idx));
    f.j_codi_v_c = h_c * (recon_right(st.c_v, liq_idx) - st.c_v_cgc);
    f.j_codi_o2 = h_c * (recon_right(st.c_o2, o2_idx) - st.c_o2_cgc);
    f.j_v[0] = f.j_codi_v_a;
    f.j_h2[0] = f.j_codi_h2;
    f.j_v[nf - 1] = f.j_codi_v_c;
    f.j_o2[nf - 1] = f.j_codi_o2;
  }

  // Volumetric sources.
  const double rt_hcl = kGasConst * ctx.T / cell.geom.H_cl;
  const double prod_ccl =
      (in.i_fc + in.i_sc) / (2.0 * kFaraday * cell.geom.H_cl);
  const double cons_h2 =
      -(in.i_fc + in.i_sc) / (2.0 * kFaraday * cell.geom.H_cl);
  const double cons_o2 =
      -(in.i_fc + in.i_sc) / (4.0 * kFaraday * cell.geom.H_cl);
  (void)rt_hcl;
  for (int i = 0; i < nc; ++i) {
    const Region r = m.region(i);
    if (r == Region::MEM) continue;
    const int li = m.liquid_index(i);
    const double sc = clamp01(st.s[li]);
    const double cvc = std::max(st.c_v[li], 0.0);
    const props::PorousConstants& pc = ctx.porous(i);

    // Evaporation/condensation.
    const bool condensing =
        frozen ? frozen->vl_condensing[i] > 0 : cvc > ctx.csat;
    if (condensing) {
      const double x_v = cvc * kGasConst * ctx.T / p_loc[i];
      f.s_vl[i] = cell.electro.gamma_cond * pc.eps * (1.0 - sc) * x_v *
                  (cvc - ctx.csat);
    } else {
      f.s_vl[i] = -cell.electro.gamma_evap * pc.eps * sc * ctx.rho_l /
                  kMolarMassH2O * kGasConst * ctx.T * (ctx.csat - cvc);
    }

    if (r == Region::ACL || r == Region::CCL) {
      const double lam = std::max(st.lambda[m.lambda_index(i)], 0.0);
      const double a_w = water_activity(cvc, sc, ctx.T, cell.props);
      const double leq = lambda_eq(a_w, ctx.T, cell.props);
      const bool absorbing =
          frozen ? frozen->sorp_absorbing[i] > 0 : leq >= lam;
      const double gamma = sorption_rate_branch(absorbing, lam, ctx.T,
                                                cell.geom.H_cl, cell.mem);
      f.s_sorp[i] = gamma * rho_over_M * (leq - lam);
      if (r == Region::ACL) {
        f.s_prod[i] = 2.0 * f.co.s_o2_co;
        f.s_h2_cons[i] = cons_h2 - f.co.s_h2_co - 2.0 * f.co.s_o2_co;
      } else {
        f.s_prod[i] = prod_ccl + f.co.s_h2_co;
        f.s_o2_cons[i] = cons_o2 - f.co.s_o2_co - 0.5 * f.co.s_h2_co;
      }
    }
  }
  return f;
}

} // namespace pemfc::transport
