#include <doctest.h>

#include <cmath>

#include "pemfc/errors.hpp"
#include "pemfc/solver.hpp"

using namespace pemfc;
using solver::SolverConfig;
using solver::Simulator;

namespace {

CellDefinition cell_no_internal_currents() {
  CellDefinition cell;
  cell.electro.enable_crossover = false;
  cell.electro.enable_short_circuit = false;
  return cell;
}

} // namespace

TEST_CASE("implicit Euler substep reproduces linear decay") {
  // dx/dt = -k x has the exact implicit-Euler update x0 / (1 + k dt).
  const double k = 37.0;
  auto rhs = [k](const std::vector<double>& x, std::vector<double>& out) {
    out.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = -k * x[i];
  };
  SolverConfig cfg;
  std::vector<double> x0{2.0, -1.0}, out;
  const std::vector<double> scale{1.0, 1.0};
  REQUIRE(solver::implicit_euler_substep(rhs, x0, 0.1, scale, {}, {}, cfg, out));
  CHECK(out[0] == doctest::Approx(2.0 / (1.0 + k * 0.1)).epsilon(1e-8));
  CHECK(out[1] == doctest::Approx(-1.0 / (1.0 + k * 0.1)).epsilon(1e-8));
}

TEST_CASE("implicit Euler is stable on the stiff phase-change relaxation") {
  // Condensation relaxes vapour at gamma_cond x_v ~ 1.5e3 1/s. The implicit
  // update contracts for any dt; explicit Euler at the same dt explodes.
  const double rate = 5e3 * 0.3;
  auto rhs = [rate](const std::vector<double>& x, std::vector<double>& out) {
    out.assign(1, -rate * (x[0] - 1.0));
  };
  SolverConfig cfg;
  std::vector<double> x{3.0}, out;
  for (int step = 0; step < 50; ++step) {
    REQUIRE(solver::implicit_euler_substep(rhs, x, 1e-2, {1.0}, {}, {}, cfg, out));
    CHECK(std::abs(out[0] - 1.0) <= std::abs(x[0] - 1.0));
    x = out;
  }
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-6));
  // Explicit reference with |1 - dt rate| = 14: divergence.
  double xe = 3.0;
  for (int step = 0; step < 50; ++step) xe = xe + 1e-2 * (-rate * (xe - 1.0));
  CHECK(std::abs(xe - 1.0) > 1e10);
}

TEST_CASE("rhs vanishes at a balanced equilibrated state") {
  Simulator sim(cell_no_internal_currents(), {10, 5, 5}, {});
  const StateVector st =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  CHECK(sim.residual_norm(st, {0.0, 0.0, 0.0}) < 1e-12);
}

TEST_CASE("rhs diagnostics name the offending entry") {
  Simulator sim(CellDefinition{}, {10, 5, 5}, {});
  StateVector st =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  st.lambda[3] = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x, dx;
  st.pack(x);
  CHECK_THROWS_AS(sim.rhs_flat(x, {0.0, 0.0, 0.0}, dx), NumericalError);
}

TEST_CASE("isolated condensation cell follows the saturation balance") {
  Simulator sim(cell_no_internal_currents(), {10, 5, 5}, {});
  const Mesh1D& m = sim.mesh();
  StateVector st =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  const int cell_i = 3; // anode GDL interior, s = 0 everywhere
  const int li = m.liquid_index(cell_i);
  st.c_v[li] = sim.context().csat * 1.3;

  const auto f = transport::evaluate(sim.context(), st, {0.0, 0.0, 0.0});
  std::vector<double> x, dx;
  st.pack(x);
  sim.rhs_flat(x, {0.0, 0.0, 0.0}, dx);
  const int s_slot = m.n_lambda() + li;
  const double expect = kMolarMassH2O * f.s_vl[cell_i] /
                        (sim.context().rho_l * sim.cell().gdl.eps);
  CHECK(dx[s_slot] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(dx[s_slot] > 0.0);
}

TEST_CASE("nitrogen balance is exactly inlet minus outlet") {
  Simulator sim(CellDefinition{}, {10, 5, 5}, {});
  StateVector st =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  st.c_n2 *= 1.05; // push the cathode over the set point so the outlet flows
  st.c_o2_cgc *= 1.05;
  const transport::TransportInputs in{4e3, 30.0, 10.0};
  const auto bf = transport::boundary_flows(sim.context(), st, in.i_fc, in.i_n);
  std::vector<double> x, dx;
  st.pack(x);
  sim.rhs_flat(x, in, dx);
  const double expect = (bf.n2_in - bf.n2_out) / sim.cell().geom.L_gc;
  CHECK(dx.back() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("total water bookkeeping collapses to production plus boundaries") {
  // Summed over every balance, sorption and phase change cancel pairwise;
  // what remains is production, channel flows and liquid drainage.
  Simulator sim(CellDefinition{}, {10, 5, 5}, {});
  const Mesh1D& m = sim.mesh();
  StateVector st =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.6});
  // Roughen the state so nothing cancels by accident.
  for (size_t i = 0; i < st.lambda.size(); ++i) st.lambda[i] = 5.0 + 0.4 * i;
  for (size_t i = 0; i < st.s.size(); ++i) st.s[i] = 0.02 * (i % 5);
  for (size_t i = 0; i < st.c_v.size(); ++i) st.c_v[i] *= 1.0 + 0.02 * (i % 7);
  st.c_v_cgc *= 1.04;
  st.c_o2_cgc *= 1.03;

  const transport::TransportInputs in{9e3, 40.0, 15.0};
  std::vector<double> x, dx;
  st.pack(x);
  sim.rhs_flat(x, in, dx);

  // d/dt of the stored-water integral, assembled from the time derivatives.
  const auto& ctx = sim.context();
  const CellDefinition& cell = sim.cell();
  const double rho_over_M = cell.mem.rho_mem / cell.mem.M_eq;
  StateVector d = StateVector::sized(m);
  d.unpack(dx);
  double dwater = 0.0;
  for (int i = 0; i < m.n_cells(); ++i) {
    const double w = m.width(i);
    if (m.in_ionomer(i)) {
      const double cap = m.region(i) == Region::MEM ? 1.0 : cell.cl.eps_mc;
      dwater += rho_over_M * cap * d.lambda[m.lambda_index(i)] * w;
    }
    if (m.region(i) == Region::MEM) continue;
    const int li = m.liquid_index(i);
    const double eps = ctx.porous(i).eps;
    // d/dt [eps s rho_l/M + eps (1-s) C_v]
    dwater += eps * (ctx.rho_l / kMolarMassH2O * d.s[li] +
                     (1.0 - st.s[li]) * d.c_v[li] - st.c_v[li] * d.s[li]) * w;
  }
  const double gc_vol = cell.geom.L_gc / ctx.area_ratio;
  dwater += (d.c_v_agc + d.c_v_cgc) * gc_vol;

  const auto f = transport::evaluate(ctx, st, in);
  double produced = 0.0;
  for (int i = 0; i < m.n_cells(); ++i) produced += f.s_prod[i] * m.width(i);
  const double gcf = 1.0 / ctx.area_ratio;
  const double boundary = (f.bc.v_in_a + f.bc.v_in_c) * gcf -
                          (f.bc.v_out_a + f.bc.v_out_c) * gcf -
                          (-f.j_cap.front() + f.j_cap.back()) / kMolarMassH2O;
  CHECK(dwater == doctest::Approx(produced + boundary)
                      .epsilon(1e-9)
                      .scale(std::abs(produced) + 1e-6));
}

TEST_CASE("zero-current transient holds an equilibrated state") {
  SolverConfig cfg;
  Simulator sim(cell_no_internal_currents(), {10, 5, 5}, cfg);
  const StateVector s0 =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  const auto res = sim.run_transient(s0, solver::CurrentProfile::constant(0.0),
                                     100.0, 25.0);
  std::vector<double> a, b;
  s0.pack(a);
  res.snapshots.back().pack(b);
  double dev = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    dev = std::max(dev, std::abs(a[i] - b[i]) / sim.scales()[i]);
  CHECK(dev < 1e-2);
  CHECK(res.ledger.back().water_rel_closure() < 1e-3);
}

TEST_CASE("current step drives oxygen down to a new steady level") {
  SolverConfig cfg;
  Simulator sim(CellDefinition{}, {10, 5, 5}, cfg);
  const StateVector s0 =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  solver::CurrentProfile profile;
  profile.points = {{0.0, 0.0}, {1.0, 1e4}};
  const auto res = sim.run_transient(s0, profile, 12.0, 1.0);
  REQUIRE(res.snapshots.size() >= 10);
  const Mesh1D& m = sim.mesh();
  auto o2_ccl = [&](const StateVector& st) {
    double sum = 0.0;
    int n = 0;
    for (int i = m.first_ccl(); i < m.first_cgdl(); ++i) {
      sum += st.c_o2[m.o2_index(i)];
      ++n;
    }
    return sum / n;
  };
  // Monotone decay toward the loaded level after the step at t = 1 s.
  double prev = o2_ccl(res.snapshots[1]);
  for (size_t k = 2; k < res.snapshots.size(); ++k) {
    const double cur = o2_ccl(res.snapshots[k]);
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }
  CHECK(o2_ccl(res.snapshots.back()) < 0.9 * o2_ccl(res.snapshots.front()));
  // Conservation audit over the transient.
  CHECK(res.ledger.back().water_rel_closure() < 1e-3);
  CHECK(res.ledger.back().h2_rel_closure() < 5e-3);
  CHECK(res.ledger.back().o2_rel_closure() < 5e-3);
}

TEST_CASE("steady state at zero current recovers the commanded humidity") {
  SolverConfig cfg;
  Simulator sim(cell_no_internal_currents(), {10, 5, 5}, cfg);
  const StateVector s0 =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  const StateVector st = sim.solve_steady(s0, 0.0);
  const Mesh1D& m = sim.mesh();
  const double leq =
      props::lambda_eq(0.5, sim.cell().op.T_fc, sim.cell().props);
  for (int i = m.first_mem(); i < m.first_ccl(); ++i)
    CHECK(st.lambda[m.lambda_index(i)] == doctest::Approx(leq).epsilon(0.02));
}

TEST_CASE("steady state satisfies the global hydrogen balance") {
  SolverConfig cfg;
  Simulator sim(CellDefinition{}, {10, 5, 5}, cfg);
  const StateVector s0 =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  const double i_fc = 5e3;
  const StateVector st = sim.solve_steady(s0, i_fc);
  const auto rep = sim.report(st, i_fc);
  const auto bf = transport::boundary_flows(sim.context(), st, i_fc, rep.i_n);
  const auto f = transport::evaluate(sim.context(), st,
                                     {i_fc, rep.i_n, rep.i_sc});
  const Geometry& g = sim.cell().geom;
  const double lhs = (bf.h2_in - bf.h2_out) * g.H_gc * g.W_gc;
  const double consumed =
      g.A_act * ((i_fc + rep.i_sc) / (2.0 * kFaraday) +
                 g.H_cl * (f.co.s_h2_co + 2.0 * f.co.s_o2_co));
  CHECK(lhs == doctest::Approx(consumed).epsilon(5e-3));
}

TEST_CASE("transient holds the steady state it is given") {
  SolverConfig cfg;
  Simulator sim(CellDefinition{}, {10, 5, 5}, cfg);
  const StateVector s0 =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  const StateVector st = sim.solve_steady(s0, 4e3);
  const auto res = sim.run_transient(st, solver::CurrentProfile::constant(4e3),
                                     20.0, 10.0);
  const auto rep = sim.report(res.snapshots.back(), 4e3);
  const double r = sim.steady_residual_norm(res.snapshots.back(),
                                            {4e3, rep.i_n, rep.i_sc});
  CHECK(r < 2.0 * cfg.steady_residual_tol);
}

TEST_CASE("polarization sweep is monotone and warm starts pay off") {
  std::vector<double> i_list{500, 2000, 4000, 6000, 8000, 10000};
  const auto rows = solver::polarization_sweep(CellDefinition{}, {10, 5, 5},
                                               {}, {}, i_list);
  REQUIRE(rows.size() == i_list.size());
  for (const auto& r : rows) CHECK(r.feasible);
  for (size_t k = 1; k < rows.size(); ++k)
    CHECK(rows[k].rep.U_cell < rows[k - 1].rep.U_cell);
}

TEST_CASE("parallel and serial sweeps agree bitwise") {
  std::vector<double> i_list{500, 1500, 3000, 4500, 6000, 7500, 9000, 10500};
  const auto a = solver::polarization_sweep(CellDefinition{}, {10, 5, 5}, {},
                                            {}, i_list, true);
  const auto b = solver::polarization_sweep(CellDefinition{}, {10, 5, 5}, {},
                                            {}, i_list, false);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].feasible == b[k].feasible);
    CHECK(a[k].rep.U_cell == b[k].rep.U_cell);
    std::vector<double> xa, xb;
    a[k].state.pack(xa);
    b[k].state.pack(xb);
    CHECK(xa == xb);
  }
}

TEST_CASE("transient integration is deterministic") {
  SolverConfig cfg;
  solver::CurrentProfile profile;
  profile.points = {{0.0, 0.0}, {0.5, 8e3}};
  std::vector<double> a, b;
  {
    Simulator sim(CellDefinition{}, {10, 5, 5}, cfg);
    const StateVector s0 =
        initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
    sim.run_transient(s0, profile, 3.0, 1.0).snapshots.back().pack(a);
  }
  {
    Simulator sim(CellDefinition{}, {10, 5, 5}, cfg);
    const StateVector s0 =
        initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
    sim.run_transient(s0, profile, 3.0, 1.0).snapshots.back().pack(b);
  }
  CHECK(a == b);
}

TEST_CASE("a fixed point is held by the stepper at any dt") {
  Simulator sim(cell_no_internal_currents(), {10, 5, 5}, {});
  const StateVector st =
      initial_state(sim.cell(), sim.mesh(), {InitKind::Equilibrated, 0.5});
  std::vector<double> x0, out;
  st.pack(x0);
  auto rhs = [&](const std::vector<double>& xx, std::vector<double>& dd) {
    sim.rhs_flat(xx, {0.0, 0.0, 0.0}, dd);
  };
  for (double dt : {1e-3, 1e-1, 10.0}) {
    REQUIRE(solver::implicit_euler_substep(rhs, x0, dt, sim.scales(), {}, {},
                                           sim.config(), out));
    double dev = 0.0;
    for (size_t i = 0; i < x0.size(); ++i)
      dev = std::max(dev, std::abs(out[i] - x0[i]) / sim.scales()[i]);
    CHECK(dev < 1e-7);
  }
}
