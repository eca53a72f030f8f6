#pragma once

// Prognostic state of one cell: membrane water content, liquid saturation,
// and species concentrations, plus the lumped gas-channel scalars. Packs
// to/from a flat array with a stable index map (field order: lambda, s, C_v,
// C_H2, C_O2, C_N2; GC scalars trail their field block).

#include <string>
#include <vector>

#include "pemfc/mesh.hpp"

namespace pemfc {

struct StateVector {
  std::vector<double> lambda; // ACL, MEM, CCL cells
  std::vector<double> s;      // AGDL, ACL, CCL, CGDL cells
  std::vector<double> c_v;    // electrode cells
  std::vector<double> c_h2;   // AGDL, ACL cells
  std::vector<double> c_o2;   // CCL, CGDL cells
  double c_v_agc = 0.0;
  double c_v_cgc = 0.0;
  double c_h2_agc = 0.0;
  double c_o2_cgc = 0.0;
  double c_n2 = 0.0;

  static StateVector sized(const Mesh1D& mesh);

  int size() const;
  void pack(std::vector<double>& out) const;
  void unpack(const std::vector<double>& in);

  // Human-readable name of flat index i, e.g. "C_v[ccl:2]".
  static std::string entry_name(const Mesh1D& mesh, int i);
};

enum class InitKind { DryStart, Equilibrated };

struct InitOptions {
  InitKind kind = InitKind::Equilibrated;
  double phi = 1.0; // activity used by Equilibrated; must be in (0, 1]
};

// Uniform initial state: Equilibrated(phi) puts vapour at phi*C_sat, membrane
// water at lambda_eq(phi), no liquid, and gases at the dry partial pressure
// of P_des - phi*P_sat; DryStart uses lambda = 2 and 10% humidity.
StateVector initial_state(const CellDefinition& cell, const Mesh1D& mesh,
                          const InitOptions& init);

} // namespace pemfc
