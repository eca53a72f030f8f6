#include <doctest.h>

#include <random>

#include "pemfc/errors.hpp"
#include "pemfc/mesh.hpp"
#include "pemfc/state.hpp"

using namespace pemfc;

TEST_CASE("mesh construction") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  CHECK(m.n_cells() == 35);
  CHECK(m.n_faces() == 36);
  // Uniform membrane spacing.
  for (int i = m.first_mem(); i < m.first_ccl(); ++i)
    CHECK(m.width(i) == doctest::Approx(cell.geom.H_mem / 5).epsilon(1e-14));
  // Total width equals the layer stack.
  double total = 0.0;
  for (int i = 0; i < m.n_cells(); ++i) total += m.width(i);
  const double expect = 2 * cell.geom.H_gdl + 2 * cell.geom.H_cl + cell.geom.H_mem;
  CHECK(total == doctest::Approx(expect).epsilon(1e-14));
  CHECK(m.face(m.n_faces() - 1) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mesh faces are strictly increasing and hit every interface") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {4, 2, 3});
  for (int f = 1; f < m.n_faces(); ++f) CHECK(m.face(f) > m.face(f - 1));
  // Layer interfaces coincide with faces.
  CHECK(m.face(m.first_acl()) == doctest::Approx(cell.geom.H_gdl).epsilon(1e-14));
  CHECK(m.face(m.first_mem()) ==
        doctest::Approx(cell.geom.H_gdl + cell.geom.H_cl).epsilon(1e-14));
  CHECK(m.face(m.first_ccl()) ==
        doctest::Approx(cell.geom.H_gdl + cell.geom.H_cl + cell.geom.H_mem).epsilon(1e-14));
}

TEST_CASE("mesh validation") {
  CellDefinition cell;
  CHECK_THROWS_AS(Mesh1D::build(cell, {1, 5, 5}), ValidationError);
  CHECK_THROWS_AS(Mesh1D::build(cell, {10, 1, 5}), ValidationError);
  CHECK_THROWS_AS(Mesh1D::build(cell, {10, 5, 2}), ValidationError);
  CellDefinition bad = cell;
  bad.geom.H_mem = 0.0;
  CHECK_THROWS_AS(Mesh1D::build(bad, {10, 5, 5}), ValidationError);
}

TEST_CASE("cell definition validation names the constraint") {
  CellDefinition cell;
  CHECK_NOTHROW(cell.validate());
  cell.geom.H_mem = -1.0;
  try {
    cell.validate();
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("geometry.H_mem > 0") != std::string::npos);
  }
}

TEST_CASE("field index maps are mutually inverse") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  for (int i = 0; i < m.n_cells(); ++i) {
    if (m.in_ionomer(i)) CHECK(m.lambda_cell(m.lambda_index(i)) == i);
    if (m.region(i) != Region::MEM) CHECK(m.liquid_cell(m.liquid_index(i)) == i);
    if (m.anode_side(i)) CHECK(m.h2_cell(m.h2_index(i)) == i);
    if (m.cathode_side(i)) CHECK(m.o2_cell(m.o2_index(i)) == i);
  }
}

TEST_CASE("initial state, equilibrated") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  const StateVector st = initial_state(cell, m, {InitKind::Equilibrated, 1.0});
  // lambda_eq(1) with the Hinatsu blend.
  for (double v : st.lambda) CHECK(v == doctest::Approx(9.2).epsilon(1e-6));
  for (double v : st.s) CHECK(v == 0.0);
  // Ideal-gas hydrogen at the dry partial pressure.
  const double psat = props::p_sat(cell.op.T_fc);
  const double expect =
      (cell.op.P_a_des - 1.0 * psat) / (kGasConst * cell.op.T_fc);
  CHECK(st.c_h2_agc == doctest::Approx(expect).epsilon(1e-12));
  CHECK(st.c_n2 == doctest::Approx((1.0 - cell.op.y_O2_ext) / cell.op.y_O2_ext *
                                   st.c_o2_cgc).epsilon(1e-12));
  CHECK_THROWS_AS(initial_state(cell, m, {InitKind::Equilibrated, 1.5}),
                  ValidationError);
  CHECK_THROWS_AS(initial_state(cell, m, {InitKind::Equilibrated, 0.0}),
                  ValidationError);
}

TEST_CASE("initial state worked example at 1.5 bar, phi 0.5") {
  CellDefinition cell;
  cell.op.P_a_des = 1.5e5;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  const StateVector st = initial_state(cell, m, {InitKind::Equilibrated, 0.5});
  CHECK(st.c_h2_agc == doctest::Approx(43.0).epsilon(2e-3));
}

TEST_CASE("dry start") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  const StateVector st = initial_state(cell, m, {InitKind::DryStart, 1.0});
  for (double v : st.lambda) CHECK(v == 2.0);
  const double csat = props::c_sat(cell.op.T_fc);
  for (double v : st.c_v) CHECK(v == doctest::Approx(0.1 * csat).epsilon(1e-12));
}

TEST_CASE("pack/unpack round-trip is exact") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  StateVector st = StateVector::sized(m);
  CHECK(st.size() == 110); // 15 + 30 + 32 + 16 + 16 + 1
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 40.0);
  for (int trial = 0; trial < 20; ++trial) {
    for (auto& v : st.lambda) v = dist(rng);
    for (auto& v : st.s) v = dist(rng) / 50.0;
    for (auto& v : st.c_v) v = dist(rng);
    for (auto& v : st.c_h2) v = dist(rng);
    for (auto& v : st.c_o2) v = dist(rng);
    st.c_v_agc = dist(rng);
    st.c_v_cgc = dist(rng);
    st.c_h2_agc = dist(rng);
    st.c_o2_cgc = dist(rng);
    st.c_n2 = dist(rng);

    std::vector<double> flat;
    st.pack(flat);
    CHECK(static_cast<int>(flat.size()) == st.size());
    StateVector back = StateVector::sized(m);
    back.unpack(flat);
    std::vector<double> flat2;
    back.pack(flat2);
    CHECK(flat == flat2);
    CHECK(back.c_n2 == st.c_n2);
  }
}

TEST_CASE("unpack rejects wrong lengths") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  StateVector st = StateVector::sized(m);
  std::vector<double> flat(st.size() - 1, 0.0);
  CHECK_THROWS_AS(st.unpack(flat), std::logic_error);
}

TEST_CASE("entry names carry region and local index") {
  CellDefinition cell;
  const Mesh1D m = Mesh1D::build(cell, {10, 5, 5});
  CHECK(StateVector::entry_name(m, 0) == "lambda[acl:0]");
  CHECK(StateVector::entry_name(m, m.n_lambda()) == "s[agdl:0]");
  const int n = StateVector::sized(m).size();
  CHECK(StateVector::entry_name(m, n - 1) == "C_N2");
}
