#pragma once

// 1D finite-volume mesh across AGDL | ACL | MEM | CCL | CGDL. The two gas
// channels are lumped 0-D volumes and carry no cells. Uniform spacing inside
// each layer; every layer interface coincides with a face.

#include <cstddef>
#include <vector>

#include "pemfc/cell.hpp"

namespace pemfc {

enum class Region { AGC, AGDL, ACL, MEM, CCL, CGDL, CGC };

const char* region_name(Region r);

struct MeshResolution {
  int n_gdl = 10;
  int n_cl = 5;
  int n_mem = 5;
};

class Mesh1D {
public:
  // Throws ValidationError on zero thickness or on cell counts below the
  // minimum (2 per layer, 3 for the membrane).
  static Mesh1D build(const CellDefinition& cell, const MeshResolution& res);

  int n_cells() const { return static_cast<int>(width_.size()); }
  int n_faces() const { return n_cells() + 1; }

  Region region(int i) const { return region_[i]; }
  double width(int i) const { return width_[i]; }
  double center(int i) const { return center_[i]; }
  double face(int f) const { return face_[f]; }

  bool in_ionomer(int i) const {
    Region r = region_[i];
    return r == Region::ACL || r == Region::MEM || r == Region::CCL;
  }
  bool in_electrode(int i) const { return region_[i] != Region::MEM; }
  bool anode_side(int i) const { return i < first_mem_; }
  bool cathode_side(int i) const { return i >= first_ccl_; }

  // Layer start indices (cells).
  int first_acl() const { return first_acl_; }
  int first_mem() const { return first_mem_; }
  int first_ccl() const { return first_ccl_; }
  int first_cgdl() const { return first_cgdl_; }

  const MeshResolution& resolution() const { return res_; }

  // Counts per field of the state vector living on this mesh.
  int n_lambda() const { return 2 * res_.n_cl + res_.n_mem; }
  int n_liquid() const { return 2 * (res_.n_gdl + res_.n_cl); }
  int n_anode_gas() const { return res_.n_gdl + res_.n_cl; }
  int n_cathode_gas() const { return res_.n_gdl + res_.n_cl; }

  // Field-local index of a cell, or -1 where the field is not defined.
  int lambda_index(int i) const;
  int liquid_index(int i) const; // also indexes C_v on electrode cells
  int h2_index(int i) const;
  int o2_index(int i) const;

  // Inverse maps: global cell index of a field-local index.
  int lambda_cell(int j) const { return first_acl_ + j; }
  int liquid_cell(int j) const {
    return j < first_mem_ ? j : j + res_.n_mem;
  }
  int h2_cell(int j) const { return j; }
  int o2_cell(int j) const { return first_ccl_ + j; }

private:
  MeshResolution res_;
  std::vector<Region> region_;
  std::vector<double> width_, center_, face_;
  int first_acl_ = 0, first_mem_ = 0, first_ccl_ = 0, first_cgdl_ = 0;
};

} // namespace pemfc
