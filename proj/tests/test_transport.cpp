#include <doctest.h>

#include <cmath>

#include "pemfc/errors.hpp"
#include "pemfc/transport.hpp"

using namespace pemfc;
using transport::RunContext;
using transport::TransportInputs;

namespace {

struct Fixture {
  CellDefinition cell;
  Mesh1D mesh;
  RunContext ctx;
  Fixture() : mesh(Mesh1D::build(cell, {10, 5, 5})), ctx(RunContext::make(cell, mesh)) {}
  explicit Fixture(const CellDefinition& c)
      : cell(c), mesh(Mesh1D::build(cell, {10, 5, 5})),
        ctx(RunContext::make(cell, mesh)) {}
  StateVector equilibrated(double phi) const {
    return initial_state(cell, mesh, {InitKind::Equilibrated, phi});
  }
};

} // namespace

TEST_CASE("membrane water flux: EOD and diffusion terms") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.8);
  for (auto& v : st.lambda) v = 14.0;

  // Uniform water content, no current: every ionomer flux vanishes.
  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  for (double j : f0.j_mem) CHECK(j == 0.0);

  // Pure drag at 1e4 A/m^2: (2.5/22)(i/F) lambda.
  auto f1 = transport::evaluate(fx.ctx, st, {1e4, 0.0, 0.0});
  const double eod = 2.5 / 22.0 * 1e4 / kFaraday * 14.0;
  CHECK(eod == doctest::Approx(0.165).epsilon(1e-3));
  const int mid = fx.mesh.first_mem() + 2; // interior membrane face
  CHECK(f1.j_mem[mid] == doctest::Approx(eod).epsilon(1e-12));

  // Pure back-diffusion: impose a uniform gradient of 1e3 across one face.
  StateVector st2 = fx.equilibrated(0.8);
  const int fL = mid - 1, fR = mid; // cells around face `mid`
  const double dx = fx.mesh.center(fR) - fx.mesh.center(fL);
  for (auto& v : st2.lambda) v = 2.5;
  st2.lambda[fx.mesh.lambda_index(fL)] = 2.5 - 0.5 * 1e3 * dx;
  st2.lambda[fx.mesh.lambda_index(fR)] = 2.5 + 0.5 * 1e3 * dx;
  auto f2 = transport::evaluate(fx.ctx, st2, {0.0, 0.0, 0.0});
  const double D = props::d_lambda(2.5, fx.cell.op.T_fc, fx.cell.props);
  const double rho_over_M = fx.cell.mem.rho_mem / fx.cell.mem.M_eq;
  CHECK(rho_over_M == doctest::Approx(1800.0).epsilon(1e-12));
  CHECK(f2.j_mem[mid] == doctest::Approx(-rho_over_M * D * 1e3).epsilon(1e-9));
  CHECK(f2.j_mem[mid] == doctest::Approx(-5.22e-4).epsilon(2e-3));
}

TEST_CASE("no-flux boundaries at the ionomer border and membrane faces") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.9);
  // Non-trivial fields.
  for (size_t i = 0; i < st.lambda.size(); ++i) st.lambda[i] = 6.0 + 0.3 * i;
  for (size_t i = 0; i < st.c_v.size(); ++i) st.c_v[i] *= 1.0 + 0.01 * i;
  auto f = transport::evaluate(fx.ctx, st, {8e3, 50.0, 20.0});
  const int b_acl = fx.mesh.first_acl();
  const int b_cgdl = fx.mesh.first_cgdl();
  CHECK(f.j_mem[b_acl] == 0.0);
  CHECK(f.j_mem[b_cgdl] == 0.0);
  // Gas species cannot cross the membrane.
  const int b_mem = fx.mesh.first_mem();
  const int b_ccl = fx.mesh.first_ccl();
  for (int face : {b_mem, b_ccl}) {
    CHECK(f.j_v[face] == 0.0);
    CHECK(f.j_h2[face] == 0.0);
    CHECK(f.j_o2[face] == 0.0);
    CHECK(f.j_cap[face] == 0.0);
  }
}

TEST_CASE("sorption source") {
  Fixture fx;
  const double T = fx.cell.op.T_fc;
  StateVector st = fx.equilibrated(1.0); // a_w = 1 everywhere, lambda_eq = 9.2
  const int acl_cell = fx.mesh.first_acl() + 1;

  // At equilibrium the source vanishes.
  for (auto& v : st.lambda) v = props::lambda_eq(1.0, T, fx.cell.props);
  auto f_eq = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  CHECK(f_eq.s_sorp[acl_cell] == doctest::Approx(0.0).epsilon(1e-9));

  // Absorption at lambda = 7 toward 9.2.
  for (auto& v : st.lambda) v = 7.0;
  auto f = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  const double leq = props::lambda_eq(1.0, T, fx.cell.props);
  const double gamma = props::sorption_rate(7.0, leq, T, fx.cell.geom.H_cl, fx.cell.mem);
  CHECK(f.s_sorp[acl_cell] ==
        doctest::Approx(gamma * 1800.0 * (leq - 7.0)).epsilon(1e-9));
  CHECK(f.s_sorp[acl_cell] == doctest::Approx(2.59e3).epsilon(5e-3));

  // Desorption is negative and uses the faster rate.
  for (auto& v : st.lambda) v = 12.0;
  auto fd = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  const double gd = props::sorption_rate(12.0, leq, T, fx.cell.geom.H_cl, fx.cell.mem);
  CHECK(fd.s_sorp[acl_cell] < 0.0);
  CHECK(fd.s_sorp[acl_cell] ==
        doctest::Approx(gd * 1800.0 * (leq - 12.0)).epsilon(1e-9));
}

TEST_CASE("production source") {
  CellDefinition cell;
  cell.electro.enable_crossover = false;
  Fixture fx(cell);
  StateVector st = fx.equilibrated(0.8);
  const int ccl_cell = fx.mesh.first_ccl() + 2;
  const int acl_cell = fx.mesh.first_acl() + 2;

  auto f = transport::evaluate(fx.ctx, st, {1e4, 0.0, 0.0});
  CHECK(f.s_prod[ccl_cell] ==
        doctest::Approx(1e4 / (2.0 * kFaraday * 1e-5)).epsilon(1e-12));
  CHECK(f.s_prod[ccl_cell] == doctest::Approx(5.182e3).epsilon(1e-3));
  CHECK(f.s_prod[acl_cell] == 0.0); // no crossover water without crossover

  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  CHECK(f0.s_prod[ccl_cell] == 0.0);
  // Production lands only in catalyst layers.
  CHECK(f.s_prod[0] == 0.0);
  CHECK(f.s_prod[fx.mesh.first_mem() + 1] == 0.0);
}

TEST_CASE("crossover sources and stoichiometric links") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.8);
  auto f = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  const transport::StateAverages av = transport::compute_averages(fx.ctx, st);

  // Chain identity: S = k (R T / H_cl) (C_cl / H_mem).
  const double T = fx.cell.op.T_fc;
  const double expect_h2 = f.co.k_h2 * kGasConst * T / fx.cell.geom.H_cl *
                           av.c_h2_acl / fx.cell.geom.H_mem;
  CHECK(f.co.s_h2_co == doctest::Approx(expect_h2).epsilon(1e-12));
  CHECK(f.co.s_h2_co > 0.0);

  // ACL water production from oxygen crossover: 2 S_O2,co.
  const int acl_cell = fx.mesh.first_acl();
  CHECK(f.s_prod[acl_cell] == doctest::Approx(2.0 * f.co.s_o2_co).epsilon(1e-12));
  // Wasted fuel bundles inside the corrected consumption terms (i_fc = 0).
  CHECK(f.s_h2_cons[acl_cell] ==
        doctest::Approx(-f.co.s_h2_co - 2.0 * f.co.s_o2_co).epsilon(1e-12));
  const int ccl_cell = fx.mesh.first_ccl();
  CHECK(f.s_o2_cons[ccl_cell] ==
        doctest::Approx(-f.co.s_o2_co - 0.5 * f.co.s_h2_co).epsilon(1e-12));

  // Starved anode: every crossover term dies with the concentration.
  StateVector dry = st;
  for (auto& v : dry.c_h2) v = 0.0;
  dry.c_h2_agc = 0.0;
  auto fd = transport::evaluate(fx.ctx, dry, {0.0, 0.0, 0.0});
  CHECK(fd.co.s_h2_co == 0.0);
}

TEST_CASE("crossover magnitude worked example") {
  // Liquid-equilibrated membrane at the 303.15 K reference makes
  // k_H2 = 1.8e-14 exactly; the chain then gives S within arithmetic.
  CellDefinition cell;
  cell.op.T_fc = 303.15;
  Fixture fx(cell);
  StateVector st = fx.equilibrated(0.8);
  const double l_eq = props::lambda_eq_liquid(303.15);
  for (auto& v : st.lambda) v = l_eq;
  for (auto& v : st.c_h2) v = 40.0;
  st.c_h2_agc = 40.0;
  auto f = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  CHECK(f.co.k_h2 == doctest::Approx(1.8e-14).epsilon(1e-12));
  const double oracle = 1.8e-14 * (kGasConst * 303.15 / 1e-5) * (40.0 / 2.5e-5);
  CHECK(f.co.s_h2_co == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("consumption sources") {
  CellDefinition cell;
  cell.electro.enable_crossover = false;
  Fixture fx(cell);
  StateVector st = fx.equilibrated(0.8);
  auto f = transport::evaluate(fx.ctx, st, {1e4, 0.0, 0.0});
  const int acl = fx.mesh.first_acl() + 1;
  const int ccl = fx.mesh.first_ccl() + 1;
  CHECK(f.s_h2_cons[acl] == doctest::Approx(-5.182e3).epsilon(1e-3));
  CHECK(f.s_o2_cons[ccl] == doctest::Approx(-2.591e3).epsilon(1e-3));
  CHECK(f.s_h2_cons[acl] / f.s_o2_cons[ccl] == doctest::Approx(2.0).epsilon(1e-12));
  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  CHECK(f0.s_h2_cons[acl] == 0.0);
  CHECK(f0.s_o2_cons[ccl] == 0.0);
  // Consumption is confined to the catalyst layers.
  CHECK(f.s_h2_cons[0] == 0.0);
  CHECK(f.s_o2_cons[fx.mesh.n_cells() - 1] == 0.0);
}

TEST_CASE("capillary flux") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.8);

  // Dry and uniform saturations carry no capillary flux.
  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  for (double j : f0.j_cap) CHECK(j == 0.0);
  for (auto& v : st.s) v = 0.2;
  auto f1 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  for (int fi = 1; fi < fx.mesh.first_mem(); ++fi) CHECK(f1.j_cap[fi] == 0.0);

  // Dirichlet s = 0 ghost at the channel faces drives drainage.
  CHECK(f1.j_cap[0] < 0.0);
  CHECK(f1.j_cap[fx.mesh.n_faces() - 1] > 0.0);
  const double s0 = 0.2;
  const double D = fx.ctx.d_cap_local(0.5 * s0, 0);
  CHECK(f1.j_cap[0] ==
        doctest::Approx(-D * s0 / (0.5 * fx.mesh.width(0))).epsilon(1e-12));

  // Interior gradient: sign and magnitude from the Fick form.
  StateVector st2 = fx.equilibrated(0.8);
  const int fi = 3; // inside the anode GDL
  const double dx = fx.mesh.center(fi) - fx.mesh.center(fi - 1);
  for (auto& v : st2.s) v = 0.2;
  st2.s[fi - 1] = 0.2 - 0.5 * 10.0 * dx;
  st2.s[fi] = 0.2 + 0.5 * 10.0 * dx;
  auto f2 = transport::evaluate(fx.ctx, st2, {0.0, 0.0, 0.0});
  CHECK(f2.j_cap[fi] ==
        doctest::Approx(-fx.ctx.d_cap_local(0.2, fi) * 10.0).epsilon(1e-6));
}

TEST_CASE("phase change source") {
  Fixture fx;
  const double csat = fx.ctx.csat;
  StateVector st = fx.equilibrated(0.5);

  // Exactly saturated vapour: both branches vanish.
  for (auto& v : st.c_v) v = csat;
  st.c_v_agc = st.c_v_cgc = csat;
  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  for (int i = 0; i < fx.mesh.n_cells(); ++i) CHECK(f0.s_vl[i] == 0.0);

  // Evaporation needs liquid.
  StateVector dry = fx.equilibrated(0.5); // C_v below saturation, s = 0
  auto f1 = transport::evaluate(fx.ctx, dry, {0.0, 0.0, 0.0});
  for (int i = 0; i < fx.mesh.n_cells(); ++i) CHECK(f1.s_vl[i] == 0.0);

  // Condensation example: eps 0.6, s 0.1, x_v 0.3, excess 2 mol/m^3.
  StateVector wet = fx.equilibrated(0.5);
  const int cell_i = 2; // anode GDL (eps = 0.6)
  const int li = fx.mesh.liquid_index(cell_i);
  wet.s[li] = 0.1;
  wet.c_v[li] = csat + 2.0;
  // Choose H2 so that the vapour mole fraction is exactly 0.3.
  wet.c_h2[fx.mesh.h2_index(cell_i)] = (csat + 2.0) / 0.3 - (csat + 2.0);
  auto f2 = transport::evaluate(fx.ctx, wet, {0.0, 0.0, 0.0});
  CHECK(f2.s_vl[cell_i] ==
        doctest::Approx(5e3 * 0.6 * 0.9 * 0.3 * 2.0).epsilon(1e-9));
  CHECK(f2.s_vl[cell_i] == doctest::Approx(1.62e3).epsilon(1e-9));

  // Evaporation branch sign matches the vapour deficit.
  StateVector evap = fx.equilibrated(0.5);
  evap.s[li] = 0.1;
  auto f3 = transport::evaluate(fx.ctx, evap, {0.0, 0.0, 0.0});
  CHECK(f3.s_vl[cell_i] < 0.0);
}

TEST_CASE("gas diffusive flux") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.5);
  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  for (int fi = 1; fi < fx.mesh.first_mem(); ++fi) {
    CHECK(f0.j_v[fi] == 0.0);
    CHECK(f0.j_h2[fi] == 0.0);
  }

  // Known gradient in the anode GDL.
  const int fi = 4;
  StateVector st2 = st;
  const double dx = fx.mesh.center(fi) - fx.mesh.center(fi - 1);
  st2.c_h2[fi - 1] -= 0.5 * 100.0 * dx;
  st2.c_h2[fi] += 0.5 * 100.0 * dx;
  auto f1 = transport::evaluate(fx.ctx, st2, {0.0, 0.0, 0.0});
  CHECK(f1.j_h2[fi] < 0.0);

  // A flooded neighbour blocks the face (harmonic mean at the interface).
  StateVector blocked = st;
  const int acl0 = fx.mesh.first_acl();
  blocked.s[fx.mesh.liquid_index(acl0)] = 1.0;
  blocked.c_v[fx.mesh.liquid_index(acl0)] *= 1.3;
  auto f2 = transport::evaluate(fx.ctx, blocked, {0.0, 0.0, 0.0});
  CHECK(f2.j_v[acl0] == 0.0);
}

TEST_CASE("convective-diffusive channel exchange") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.5);
  // Uniform concentrations equal to the channel values: no exchange.
  auto f0 = transport::evaluate(fx.ctx, st, {0.0, 0.0, 0.0});
  CHECK(f0.j_codi_v_a == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f0.j_codi_h2 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f0.j_codi_o2 == doctest::Approx(0.0).epsilon(1e-15));

  // A richer cathode GDL pushes oxygen toward the channel (positive x).
  StateVector rich = st;
  for (auto& v : rich.c_o2) v *= 1.2;
  auto f1 = transport::evaluate(fx.ctx, rich, {0.0, 0.0, 0.0});
  CHECK(f1.j_codi_o2 > 0.0);
  CHECK(f1.j_o2[fx.mesh.n_faces() - 1] == f1.j_codi_o2);

  // A richer anode channel pushes hydrogen into the GDL (positive x).
  StateVector gcrich = st;
  gcrich.c_h2_agc *= 1.2;
  auto f2 = transport::evaluate(fx.ctx, gcrich, {0.0, 0.0, 0.0});
  CHECK(f2.j_codi_h2 > 0.0);
  CHECK(f2.j_h2[0] == f2.j_codi_h2);
}

TEST_CASE("boundary flows") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.5);
  auto bf = transport::boundary_flows(fx.ctx, st, 1e4, 0.0);

  // Worked inlet example with the default geometry and S_a = 1.4.
  const double expect = 0.0291 / (5e-4 * 8e-4) * 1.4 * 1e4 / (2.0 * kFaraday);
  CHECK(bf.h2_in == doctest::Approx(expect).epsilon(1e-12));
  CHECK(bf.h2_in == doctest::Approx(5.28e3).epsilon(1e-3));

  // Equilibrated channels sit at the set-point pressure: no outflow.
  CHECK(bf.h2_out == 0.0);
  CHECK(bf.v_out_a == 0.0);
  CHECK(bf.o2_out == 0.0);

  // Nitrogen inlet tracks dry-air composition.
  CHECK(bf.n2_in / bf.o2_in ==
        doctest::Approx((1.0 - 0.2095) / 0.2095).epsilon(1e-12));

  // Linearity in (i_fc + i_n) with the exact slope.
  auto bf2 = transport::boundary_flows(fx.ctx, st, 2.5e3, 120.0);
  const double slope = fx.cell.geom.A_act * fx.cell.op.S_a /
                       (2.0 * kFaraday * fx.cell.geom.H_gc * fx.cell.geom.W_gc);
  CHECK(bf2.h2_in == doctest::Approx(slope * (2.5e3 + 120.0)).epsilon(1e-12));
  CHECK(bf.h2_in - bf2.h2_in ==
        doctest::Approx(slope * (1e4 - 2.5e3 - 120.0)).epsilon(1e-12));

  // Overpressured channel vents; a saturated channel is an error.
  StateVector hi = st;
  hi.c_h2_agc *= 1.2;
  auto bf3 = transport::boundary_flows(fx.ctx, hi, 1e4, 0.0);
  CHECK(bf3.h2_out > 0.0);
  StateVector sat = st;
  sat.c_h2_agc = 0.0;
  sat.c_v_agc *= 0.9;
  CHECK_THROWS_AS(transport::boundary_flows(fx.ctx, sat, 1e4, 0.0),
                  NumericalError);
}

TEST_CASE("outlet composition bookkeeping") {
  Fixture fx;
  StateVector st = fx.equilibrated(0.5);
  // Pressurize the cathode 5% above the set point.
  st.c_o2_cgc *= 1.1;
  st.c_n2 *= 1.1;
  st.c_v_cgc *= 1.1;
  auto bf = transport::boundary_flows(fx.ctx, st, 0.0, 0.0);
  CHECK(bf.o2_out > 0.0);
  CHECK(bf.n2_out > 0.0);
  CHECK(bf.v_out_c > 0.0);
  // Dry-gas split follows the channel composition.
  CHECK(bf.o2_out / bf.n2_out ==
        doctest::Approx(st.c_o2_cgc / st.c_n2).epsilon(1e-12));
}
