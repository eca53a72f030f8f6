#include "pemfc/state.hpp"

#include <stdexcept>

#include "pemfc/errors.hpp"
#include "pemfc/properties.hpp"

namespace pemfc {

StateVector StateVector::sized(const Mesh1D& mesh) {
  StateVector st;
  st.lambda.assign(mesh.n_lambda(), 0.0);
  st.s.assign(mesh.n_liquid(), 0.0);
  st.c_v.assign(mesh.n_liquid(), 0.0);
  st.c_h2.assign(mesh.n_anode_gas(), 0.0);
  st.c_o2.assign(mesh.n_cathode_gas(), 0.0);
  return st;
}

int StateVector::size() const {
  return static_cast<int>(lambda.size() + s.size() + c_v.size() + c_h2.size() +
                          c_o2.size()) +
         5; // c_v_agc, c_v_cgc, c_h2_agc, c_o2_cgc, c_n2
}

void StateVector::pack(std::vector<double>& out) const {
  out.clear();
  out.reserve(size());
  out.insert(out.end(), lambda.begin(), lambda.end());
  out.insert(out.end(), s.begin(), s.end());
  out.insert(out.end(), c_v.begin(), c_v.end());
  out.push_back(c_v_agc);
  out.push_back(c_v_cgc);
  out.insert(out.end(), c_h2.begin(), c_h2.end());
  out.push_back(c_h2_agc);
  out.insert(out.end(), c_o2.begin(), c_o2.end());
  out.push_back(c_o2_cgc);
  out.push_back(c_n2);
}

void StateVector::unpack(const std::vector<double>& in) {
  if (static_cast<int>(in.size()) != size())
    throw std::logic_error("StateVector::unpack: length mismatch");
  auto it = in.begin();
  auto take = [&](std::vector<double>& v) {
    std::copy(it, it + static_cast<long>(v.size()), v.begin());
    it += static_cast<long>(v.size());
  };
  take(lambda);
  take(s);
  take(c_v);
  c_v_agc = *it++;
  c_v_cgc = *it++;
  take(c_h2);
  c_h2_agc = *it++;
  take(c_o2);
  c_o2_cgc = *it++;
  c_n2 = *it++;
}

std::string StateVector::entry_name(const Mesh1D& mesh, int i) {
  auto local = [&](const char* field, int cell) {
    Region r = mesh.region(cell);
    int base = 0;
    for (int c = 0; c < cell; ++c)
      if (mesh.region(c) == r) ++base;
    return std::string(field) + "[" + region_name(r) + ":" +
           std::to_string(base) + "]";
  };
  int n = mesh.n_lambda();
  if (i < n) return local("lambda", mesh.lambda_cell(i));
  i -= n;
  n = mesh.n_liquid();
  if (i < n) return local("s", mesh.liquid_cell(i));
  i -= n;
  if (i < n) return local("C_v", mesh.liquid_cell(i));
  i -= n;
  if (i == 0) return "C_v[agc]";
  if (i == 1) return "C_v[cgc]";
  i -= 2;
  n = mesh.n_anode_gas();
  if (i < n) return local("C_H2", mesh.h2_cell(i));
  i -= n;
  if (i == 0) return "C_H2[agc]";
  i -= 1;
  n = mesh.n_cathode_gas();
  if (i < n) return local("C_O2", mesh.o2_cell(i));
  i -= n;
  if (i == 0) return "C_O2[cgc]";
  return "C_N2";
}

StateVector initial_state(const CellDefinition& cell, const Mesh1D& mesh,
                          const InitOptions& init) {
  const double T = cell.op.T_fc;
  double phi = init.phi;
  if (init.kind == InitKind::Equilibrated && (phi <= 0.0 || phi > 1.0))
    throw ValidationError("initial_state: phi must be in (0, 1]");
  if (init.kind == InitKind::DryStart) phi = 0.1;

  const double csat = props::c_sat(T);
  const double psat = props::p_sat(T);
  const double cv = phi * csat;
  const double lam = init.kind == InitKind::DryStart
                         ? 2.0
                         : props::lambda_eq(phi, T, cell.props);

  StateVector st = StateVector::sized(mesh);
  for (auto& v : st.lambda) v = lam;
  for (auto& v : st.s) v = 0.0;
  for (auto& v : st.c_v) v = cv;
  st.c_v_agc = cv;
  st.c_v_cgc = cv;

  const double ch2 = (cell.op.P_a_des - phi * psat) / (kGasConst * T);
  const double cdry_c = (cell.op.P_c_des - phi * psat) / (kGasConst * T);
  const double co2 = cell.op.y_O2_ext * cdry_c;
  if (ch2 <= 0.0 || co2 <= 0.0)
    throw ValidationError("initial_state: desired pressure below vapour pressure");
  for (auto& v : st.c_h2) v = ch2;
  st.c_h2_agc = ch2;
  for (auto& v : st.c_o2) v = co2;
  st.c_o2_cgc = co2;
  st.c_n2 = (1.0 - cell.op.y_O2_ext) / cell.op.y_O2_ext * co2;
  return st;
}

} // namespace pemfc
