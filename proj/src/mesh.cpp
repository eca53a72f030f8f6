#include "pemfc/mesh.hpp"

#include <string>

#include "pemfc/errors.hpp"

namespace pemfc {

const char* region_name(Region r) {
  switch (r) {
    case Region::AGC: return "agc";
    case Region::AGDL: return "agdl";
    case Region::ACL: return "acl";
    case Region::MEM: return "mem";
    case Region::CCL: return "ccl";
    case Region::CGDL: return "cgdl";
    case Region::CGC: return "cgc";
  }
  return "?";
}

Mesh1D Mesh1D::build(const CellDefinition& cell, const MeshResolution& res) {
  if (res.n_gdl < 2) throw ValidationError("mesh: n_gdl >= 2 required");
  if (res.n_cl < 2) throw ValidationError("mesh: n_cl >= 2 required");
  if (res.n_mem < 3) throw ValidationError("mesh: n_mem >= 3 required");
  const double H[] = {cell.geom.H_gdl, cell.geom.H_cl, cell.geom.H_mem,
                      cell.geom.H_cl, cell.geom.H_gdl};
  const Region reg[] = {Region::AGDL, Region::ACL, Region::MEM, Region::CCL,
                        Region::CGDL};
  const int n[] = {res.n_gdl, res.n_cl, res.n_mem, res.n_cl, res.n_gdl};

  Mesh1D m;
  m.res_ = res;
  double x = 0.0;
  m.face_.push_back(0.0);
  for (int layer = 0; layer < 5; ++layer) {
    if (H[layer] <= 0.0)
      throw ValidationError(std::string("mesh: zero thickness for layer ") +
                            region_name(reg[layer]));
    const double dx = H[layer] / n[layer];
    for (int i = 0; i < n[layer]; ++i) {
      m.region_.push_back(reg[layer]);
      m.width_.push_back(dx);
      m.center_.push_back(x + (i + 0.5) * dx);
      m.face_.push_back(x + (i + 1) * dx);
    }
    x += H[layer];
  }
  m.first_acl_ = res.n_gdl;
  m.first_mem_ = res.n_gdl + res.n_cl;
  m.first_ccl_ = m.first_mem_ + res.n_mem;
  m.first_cgdl_ = m.first_ccl_ + res.n_cl;
  return m;
}

int Mesh1D::lambda_index(int i) const {
  if (!in_ionomer(i)) return -1;
  return i - first_acl_;
}

int Mesh1D::liquid_index(int i) const {
  if (region_[i] == Region::MEM) return -1;
  return i < first_mem_ ? i : i - res_.n_mem;
}

int Mesh1D::h2_index(int i) const { return i < first_mem_ ? i : -1; }

int Mesh1D::o2_index(int i) const { return i >= first_ccl_ ? i - first_ccl_ : -1; }

} // namespace pemfc
