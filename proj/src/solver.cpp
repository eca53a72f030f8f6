#include "pemfc/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pemfc/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pemfc::solver {

namespace {

constexpr double kFdEps = 1.4901161193847656e-08; // sqrt(machine epsilon)

double scaled_max(const std::vector<double>& v, const std::vector<double>& s) {
  double m = 0.0;
  for (size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]) / s[i]);
  return m;
}

} // namespace

double CurrentProfile::at(double t) const {
  double v = points.front().second;
  for (const auto& [tk, vk] : points) {
    if (tk <= t) v = vk;
    else break;
  }
  return v;
}

double CurrentProfile::next_change(double t) const {
  for (const auto& [tk, vk] : points)
    if (tk > t) return tk;
  return std::numeric_limits<double>::infinity();
}

CurrentProfile CurrentProfile::constant(double i_fc) {
  return CurrentProfile{{{0.0, i_fc}}};
}

double LedgerRow::water_rel_closure() const {
  const double scale = std::max({water_in, water_out, water_produced,
                                 water_drained, 1e-30});
  return std::abs(water_closure) / scale;
}
double LedgerRow::h2_rel_closure() const {
  const double scale = std::max({h2_in, h2_out, h2_reacted, 1e-30});
  return std::abs(h2_closure) / scale;
}
double LedgerRow::o2_rel_closure() const {
  const double scale = std::max({o2_in, o2_out, o2_reacted, 1e-30});
  return std::abs(o2_closure) / scale;
}

// ---------------------------------------------------------------------------
// Simulator construction

Simulator::Simulator(const CellDefinition& cell, const MeshResolution& res,
                     const SolverConfig& cfg, voltage::OverpotentialConfig vcfg)
    : cell_(cell), mesh_(Mesh1D::build(cell, res)), cfg_(cfg), vcfg_(vcfg) {
  cell_.validate();
  ctx_ = transport::RunContext::make(cell_, mesh_);
  StateVector probe = StateVector::sized(mesh_);
  const int n = probe.size();
  scale_.assign(n, 10.0);
  // Typical magnitudes per field for norms and perturbation sizing.
  const int n_lam = mesh_.n_lambda();
  const int n_liq = mesh_.n_liquid();
  for (int i = 0; i < n_lam; ++i) scale_[i] = 10.0;
  for (int i = 0; i < n_liq; ++i) scale_[n_lam + i] = 0.1;
  build_structure();
}

void Simulator::build_structure() {
  const Mesh1D& m = mesh_;
  const int nc = m.n_cells();
  StateVector probe = StateVector::sized(m);
  const int n = probe.size();

  // Position of each unknown along the layer line: cells keep their index,
  // the anode channel sits at -1, the cathode channel at nc, and C_N2 is
  // treated as global over the cathode.
  constexpr int kGlobal = -1000;
  std::vector<int> pos(n);
  std::vector<char> cross_col(n, 0), cross_row(n, 0);
  {
    int at = 0;
    for (int j = 0; j < m.n_lambda(); ++j, ++at) {
      const int c = m.lambda_cell(j);
      pos[at] = c;
      const Region r = m.region(c);
      if (r == Region::MEM) cross_col[at] = 1; // lambda governs permeation
      if (r == Region::ACL || r == Region::CCL) cross_row[at] = 1;
    }
    for (int j = 0; j < m.n_liquid(); ++j, ++at) pos[at] = m.liquid_cell(j);
    for (int j = 0; j < m.n_liquid(); ++j, ++at) pos[at] = m.liquid_cell(j);
    pos[at++] = -1; // C_v agc
    pos[at++] = nc; // C_v cgc
    for (int j = 0; j < m.n_anode_gas(); ++j, ++at) {
      const int c = m.h2_cell(j);
      pos[at] = c;
      if (m.region(c) == Region::ACL) cross_col[at] = cross_row[at] = 1;
    }
    pos[at++] = -1; // C_H2 agc
    for (int j = 0; j < m.n_cathode_gas(); ++j, ++at) {
      const int c = m.o2_cell(j);
      pos[at] = c;
      if (m.region(c) == Region::CCL) cross_col[at] = cross_row[at] = 1;
    }
    pos[at++] = nc;     // C_O2 cgc
    pos[at++] = kGlobal; // C_N2
  }

  const int first_ccl = m.first_ccl();
  auto couples = [&](int r, int c) {
    if (r == c) return true;
    const int pr = pos[r], pc = pos[c];
    if (pc == kGlobal) return pr >= first_ccl || pr == nc || pr == kGlobal;
    if (pr == kGlobal) return pc >= first_ccl || pc == nc;
    if (std::abs(pr - pc) <= 2) return true;
    return cross_row[r] && cross_col[c];
  };

  fd_rows_.assign(n, {});
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (couples(r, c)) fd_rows_[c].push_back(r);

  // Greedy coloring: two columns share a group only if no row sees both.
  std::vector<std::vector<char>> hit; // per group, rows already covered
  fd_groups_.clear();
  for (int c = 0; c < n; ++c) {
    bool placed = false;
    for (size_t g = 0; g < fd_groups_.size() && !placed; ++g) {
      bool conflict = false;
      for (int r : fd_rows_[c])
        if (hit[g][r]) { conflict = true; break; }
      if (!conflict) {
        fd_groups_[g].push_back(c);
        for (int r : fd_rows_[c]) hit[g][r] = 1;
        placed = true;
      }
    }
    if (!placed) {
      fd_groups_.push_back({c});
      hit.emplace_back(n, 0);
      for (int r : fd_rows_[c]) hit.back()[r] = 1;
    }
  }
}

// ---------------------------------------------------------------------------
// Right-hand side

void Simulator::rhs_flat(const std::vector<double>& x,
                         const transport::TransportInputs& in,
                         std::vector<double>& dxdt,
                         const transport::BranchState* frozen) const {
  const Mesh1D& m = mesh_;
  StateVector& st = scratch_st_;
  if (st.lambda.size() != static_cast<size_t>(m.n_lambda()))
    st = StateVector::sized(m);
  st.unpack(x);

  const transport::FluxSourceFields f = transport::evaluate(ctx_, st, in, frozen);
  const CellDefinition& cell = cell_;
  const double rho_over_M = cell.mem.rho_mem / cell.mem.M_eq;
  const double M_over_rho = 1.0 / rho_over_M;
  const double s_floor = cfg_.s_clip;

  StateVector& d = scratch_d_;
  if (d.lambda.size() != st.lambda.size()) d = StateVector::sized(m);

  for (int i = 0; i < m.n_cells(); ++i) {
    const double inv_dx = 1.0 / m.width(i);
    const Region r = m.region(i);
    // Dissolved water.
    if (m.in_ionomer(i)) {
      const int li = m.lambda_index(i);
      const double div = (f.j_mem[i + 1] - f.j_mem[i]) * inv_dx;
      if (r == Region::MEM) {
        d.lambda[li] = -div * M_over_rho;
      } else {
        d.lambda[li] = (-div + f.s_sorp[i] + f.s_prod[i]) * M_over_rho /
                       cell.cl.eps_mc;
      }
    }
    if (r == Region::MEM) continue;

    const int li = m.liquid_index(i);
    const props::PorousConstants& pc = ctx_.porous(i);
    const double eps = pc.eps;
    // Liquid saturation.
    const double div_cap = (f.j_cap[i + 1] - f.j_cap[i]) * inv_dx;
    const double ds =
        (-div_cap + kMolarMassH2O * f.s_vl[i]) / (ctx_.rho_l * eps);
    d.s[li] = ds;
    const double one_minus_s = std::max(1.0 - st.s[li], s_floor);
    // Vapour.
    {
      const double div = (f.j_v[i + 1] - f.j_v[i]) * inv_dx;
      const double rhs_tot = -div - f.s_sorp[i] - f.s_vl[i];
      d.c_v[li] = (rhs_tot / eps + st.c_v[li] * ds) / one_minus_s;
    }
    // Fuels.
    if (m.anode_side(i)) {
      const int gi = m.h2_index(i);
      const double div = (f.j_h2[i + 1] - f.j_h2[i]) * inv_dx;
      d.c_h2[gi] = ((-div + f.s_h2_cons[i]) / eps + st.c_h2[gi] * ds) /
                   one_minus_s;
    } else {
      const int gi = m.o2_index(i);
      const double div = (f.j_o2[i + 1] - f.j_o2[i]) * inv_dx;
      d.c_o2[gi] = ((-div + f.s_o2_cons[i]) / eps + st.c_o2[gi] * ds) /
                   one_minus_s;
    }
  }

  // Lumped channels: inlet/outlet flows act on the channel volume, the codi
  // exchange is per active area.
  const double inv_L = ctx_.inv_Lgc;
  const double codi_factor = ctx_.area_ratio * inv_L;
  d.c_v_agc = (f.bc.v_in_a - f.bc.v_out_a) * inv_L - f.j_codi_v_a * codi_factor;
  d.c_h2_agc = (f.bc.h2_in - f.bc.h2_out) * inv_L - f.j_codi_h2 * codi_factor;
  d.c_v_cgc = (f.bc.v_in_c - f.bc.v_out_c) * inv_L + f.j_codi_v_c * codi_factor;
  d.c_o2_cgc = (f.bc.o2_in - f.bc.o2_out) * inv_L + f.j_codi_o2 * codi_factor;
  d.c_n2 = (f.bc.n2_in - f.bc.n2_out) * inv_L;

  d.pack(dxdt);
  for (size_t j = 0; j < dxdt.size(); ++j)
    if (!std::isfinite(dxdt[j]))
      throw NumericalError("non-finite time derivative for " +
                           StateVector::entry_name(m, static_cast<int>(j)));
}

double Simulator::residual_norm(const StateVector& st,
                                const transport::TransportInputs& in) const {
  std::vector<double> x, dx;
  st.pack(x);
  rhs_flat(x, in, dx);
  return scaled_max(dx, scale_);
}

namespace {

// Relaxation rate per row: |diagonal| of the finite-difference Jacobian,
// floored at 1/s, evaluated with the same column groups used by the stepper.
void rate_weights(const std::function<void(const std::vector<double>&,
                                           std::vector<double>&)>& rhs,
                  const std::vector<double>& x, const std::vector<double>& f0,
                  const std::vector<double>& scale,
                  const std::vector<std::vector<int>>& groups,
                  std::vector<double>& w) {
  const int n = static_cast<int>(x.size());
  w.assign(n, 1.0);
  std::vector<double> xp, fp;
  for (const auto& grp : groups) {
    xp = x;
    for (int j : grp) xp[j] += kFdEps * (std::abs(x[j]) + 1e-3 * scale[j]);
    rhs(xp, fp);
    for (int j : grp) {
      const double h = kFdEps * (std::abs(x[j]) + 1e-3 * scale[j]);
      w[j] = std::max(1.0, std::abs((fp[j] - f0[j]) / h));
    }
  }
}

} // namespace

double Simulator::steady_residual_norm(
    const StateVector& st, const transport::TransportInputs& in) const {
  std::vector<double> x, f;
  st.pack(x);
  rhs_flat(x, in, f);
  auto rhs = [&](const std::vector<double>& xx, std::vector<double>& out) {
    rhs_flat(xx, in, out);
  };
  std::vector<double> w;
  rate_weights(rhs, x, f, scale_, fd_groups_, w);
  double m = 0.0;
  for (size_t i = 0; i < f.size(); ++i)
    m = std::max(m, std::abs(f[i]) / (scale_[i] * w[i]));
  return m;
}

voltage::VoltageReport Simulator::report(const StateVector& st,
                                         double i_fc) const {
  return voltage::cell_voltage(ctx_, st, i_fc, vcfg_);
}

// ---------------------------------------------------------------------------
// Damped-Newton implicit Euler

namespace {

using RhsFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct StepWorker {
  const RhsFn& rhs;
  const std::vector<double>& scale;
  const std::vector<std::vector<int>>& groups;
  const std::vector<std::vector<int>>& rows;
  const SolverConfig& cfg;
  int n;

  Eigen::MatrixXd Jf;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  bool have_J = false;
  bool have_lu = false;
  double lu_dt = -1.0;
  long newton_iters = 0;

  std::vector<double> f0, fp, xp, ftry, xtry, g;

  StepWorker(const RhsFn& r, const std::vector<double>& s,
             const std::vector<std::vector<int>>& gr,
             const std::vector<std::vector<int>>& ro, const SolverConfig& c)
      : rhs(r), scale(s), groups(gr), rows(ro), cfg(c),
        n(static_cast<int>(s.size())) {
    Jf.resize(n, n);
  }

  bool eval(const std::vector<double>& x, std::vector<double>& out) {
    try {
      rhs(x, out);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  bool build_jacobian(const std::vector<double>& x) {
    if (!eval(x, f0)) return false;
    Jf.setZero();
    xp.resize(n);
    if (groups.empty()) {
      for (int j = 0; j < n; ++j) {
        xp = x;
        const double h = kFdEps * (std::abs(x[j]) + 1e-3 * scale[j]);
        xp[j] += h;
        if (!eval(xp, fp)) return false;
        for (int r = 0; r < n; ++r) Jf(r, j) = (fp[r] - f0[r]) / h;
      }
    } else {
      for (const auto& grp : groups) {
        xp = x;
        for (int j : grp)
          xp[j] += kFdEps * (std::abs(x[j]) + 1e-3 * scale[j]);
        if (!eval(xp, fp)) return false;
        for (int j : grp) {
          const double h = kFdEps * (std::abs(x[j]) + 1e-3 * scale[j]);
          for (int r : rows[j]) Jf(r, j) = (fp[r] - f0[r]) / h;
        }
      }
    }
    have_J = true;
    have_lu = false;
    return true;
  }

  void factor(double dt) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - dt * Jf;
    lu.compute(A);
    have_lu = true;
    lu_dt = dt;
  }

  double scaled_l2(const std::vector<double>& v) const {
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = v[i] / scale[i];
      s2 += r * r;
    }
    return std::sqrt(s2 / n);
  }

  // One implicit-Euler substep x1 = x0 + dt f(x1). The branch structure of
  // the rhs (phase change, outlet valves, saturation clamps) invalidates a
  // frozen Jacobian whenever an iterate crosses a switch, so the Newton loop
  // may rebuild it several times, each time adopting the current iterate's
  // branch pattern.
  bool substep(const std::vector<double>& x0, double dt,
               std::vector<double>& out) {
    std::vector<double> x = x0, f(n);
    if (!eval(x, f)) return false;
    if (!have_J && !build_jacobian(x0)) return false;
    if (!have_lu || lu_dt != dt) factor(dt);

    bool fresh = false; // J built at the current iterate
    int overshoots_left = 3;
    Eigen::VectorXd rhs_v(n), delta(n);
    const int iter_budget = 3 * cfg.newton_max_iter;
    for (int iter = 0; iter < iter_budget; ++iter) {
      ++newton_iters;
      g.resize(n);
      for (int i = 0; i < n; ++i) g[i] = x[i] - x0[i] - dt * f[i];
      const double norm_g = scaled_l2(g);
      for (int i = 0; i < n; ++i) rhs_v(i) = -g[i];
      delta = lu.solve(rhs_v);

      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 8; ++ls) {
        xtry.resize(n);
        for (int i = 0; i < n; ++i) xtry[i] = x[i] + alpha * delta(i);
        ftry.resize(n);
        if (eval(xtry, ftry)) {
          g.resize(n);
          for (int i = 0; i < n; ++i)
            g[i] = xtry[i] - x0[i] - dt * ftry[i];
          if (scaled_l2(g) <= (1.0 - 1e-4 * alpha) * norm_g ||
              scaled_l2(g) < 1e-14) {
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved && !fresh) {
        // A stale Jacobian can point uphill once the iterate crossed a
        // branch switch; rebuild on the current branch pattern and retry.
        if (!build_jacobian(x)) return false;
        factor(dt);
        fresh = true;
        continue;
      }
      if (!moved) {
        // Fresh Jacobian and still no descent: the iterate sits on a crease
        // of the merit. Step across it once, within a bounded increase.
        if (overshoots_left-- <= 0) return false;
        xtry.resize(n);
        for (int i = 0; i < n; ++i) xtry[i] = x[i] + delta(i);
        ftry.resize(n);
        if (!eval(xtry, ftry)) return false;
        g.resize(n);
        for (int i = 0; i < n; ++i) g[i] = xtry[i] - x0[i] - dt * ftry[i];
        if (scaled_l2(g) > 10.0 * norm_g + 1e-12) return false;
        alpha = 1.0;
      }
      x = xtry;
      f = ftry;
      fresh = false;
      double step_norm = 0.0;
      for (int i = 0; i < n; ++i)
        step_norm = std::max(step_norm, std::abs(alpha * delta(i)) / scale[i]);
      if (step_norm < cfg.newton_tol) {
        out = x;
        return true;
      }
      // Any damping at all means the local model was off; track the branch
      // pattern of the new iterate before continuing.
      if (alpha < 1.0) {
        if (!build_jacobian(x)) return false;
        factor(dt);
        fresh = true;
      }
    }
    return false;
  }
};

} // namespace

bool implicit_euler_substep(const RhsFn& rhs, const std::vector<double>& x0,
                            double dt, const std::vector<double>& scale,
                            const std::vector<std::vector<int>>& groups,
                            const std::vector<std::vector<int>>& rows,
                            const SolverConfig& cfg, std::vector<double>& out,
                            long* newton_iters) {
  StepWorker w(rhs, scale, groups, rows, cfg);
  const bool ok = w.substep(x0, dt, out);
  if (newton_iters) *newton_iters += w.newton_iters;
  return ok;
}

// ---------------------------------------------------------------------------
// Conservation ledger

namespace {

struct StoredAmounts {
  double water = 0, h2 = 0, o2 = 0, n2 = 0;
};

StoredAmounts stored_amounts(const transport::RunContext& ctx,
                             const StateVector& st) {
  const Mesh1D& m = *ctx.mesh;
  const CellDefinition& cell = *ctx.cell;
  const double rho_over_M = cell.mem.rho_mem / cell.mem.M_eq;
  StoredAmounts a;
  for (int i = 0; i < m.n_cells(); ++i) {
    const double dx = m.width(i);
    const Region r = m.region(i);
    if (m.in_ionomer(i)) {
      const double cap = r == Region::MEM ? 1.0 : cell.cl.eps_mc;
      a.water += rho_over_M * cap * st.lambda[m.lambda_index(i)] * dx;
    }
    if (r == Region::MEM) continue;
    const int li = m.liquid_index(i);
    const double eps = ctx.porous(i).eps;
    const double s = st.s[li];
    a.water += eps * (s * ctx.rho_l / kMolarMassH2O + (1.0 - s) * st.c_v[li]) * dx;
    if (m.anode_side(i))
      a.h2 += eps * (1.0 - s) * st.c_h2[m.h2_index(i)] * dx;
    else
      a.o2 += eps * (1.0 - s) * st.c_o2[m.o2_index(i)] * dx;
  }
  const double gc_vol = cell.geom.L_gc / ctx.area_ratio; // per active area
  a.water += (st.c_v_agc + st.c_v_cgc) * gc_vol;
  a.h2 += st.c_h2_agc * gc_vol;
  a.o2 += st.c_o2_cgc * gc_vol;
  a.n2 += st.c_n2 * gc_vol;
  return a;
}

struct LedgerAccumulator {
  StoredAmounts base;
  double water_in = 0, water_out = 0, water_drained = 0, water_produced = 0,
         water_clipped = 0;
  double h2_in = 0, h2_out = 0, h2_reacted = 0, h2_clipped = 0;
  double o2_in = 0, o2_out = 0, o2_reacted = 0, o2_clipped = 0;
  double n2_in = 0, n2_out = 0, n2_clipped = 0;

  void add_flows(const transport::RunContext& ctx,
                 const transport::FluxSourceFields& f, double dt) {
    const Mesh1D& m = *ctx.mesh;
    const double gcf = dt / ctx.area_ratio; // channel section per active area
    water_in += (f.bc.v_in_a + f.bc.v_in_c) * gcf;
    water_out += (f.bc.v_out_a + f.bc.v_out_c) * gcf;
    water_drained +=
        (-f.j_cap.front() + f.j_cap.back()) / kMolarMassH2O * dt;
    h2_in += f.bc.h2_in * gcf;
    h2_out += f.bc.h2_out * gcf;
    o2_in += f.bc.o2_in * gcf;
    o2_out += f.bc.o2_out * gcf;
    n2_in += f.bc.n2_in * gcf;
    n2_out += f.bc.n2_out * gcf;
    for (int i = 0; i < m.n_cells(); ++i) {
      const double w = m.width(i) * dt;
      water_produced += f.s_prod[i] * w;
      h2_reacted -= f.s_h2_cons[i] * w;
      o2_reacted -= f.s_o2_cons[i] * w;
    }
  }

  LedgerRow row(const transport::RunContext& ctx, const StateVector& st,
                double t) const {
    const StoredAmounts now = stored_amounts(ctx, st);
    LedgerRow r;
    r.t = t;
    r.water_stored = now.water;
    r.water_in = water_in;
    r.water_out = water_out;
    r.water_drained = water_drained;
    r.water_produced = water_produced;
    r.water_clipped = water_clipped;
    r.water_closure = (now.water - base.water) -
                      (water_in - water_out - water_drained + water_produced +
                       water_clipped);
    r.h2_stored = now.h2;
    r.h2_in = h2_in;
    r.h2_out = h2_out;
    r.h2_reacted = h2_reacted;
    r.h2_clipped = h2_clipped;
    r.h2_closure = (now.h2 - base.h2) - (h2_in - h2_out - h2_reacted + h2_clipped);
    r.o2_stored = now.o2;
    r.o2_in = o2_in;
    r.o2_out = o2_out;
    r.o2_reacted = o2_reacted;
    r.o2_clipped = o2_clipped;
    r.o2_closure = (now.o2 - base.o2) - (o2_in - o2_out - o2_reacted + o2_clipped);
    r.n2_stored = now.n2;
    r.n2_in = n2_in;
    r.n2_out = n2_out;
    r.n2_clipped = n2_clipped;
    r.n2_closure = (now.n2 - base.n2) - (n2_in - n2_out + n2_clipped);
    return r;
  }
};

// Clip to the physical box; returns the ledger-visible added amounts.
void clip_state(const transport::RunContext& ctx, double s_clip,
                StateVector& st, LedgerAccumulator* led) {
  const Mesh1D& m = *ctx.mesh;
  const CellDefinition& cell = *ctx.cell;
  const double rho_over_M = cell.mem.rho_mem / cell.mem.M_eq;
  const double gc_vol = cell.geom.L_gc / ctx.area_ratio;
  double dw = 0, dh2 = 0, do2 = 0, dn2 = 0;
  for (int i = 0; i < m.n_cells(); ++i) {
    const double dx = m.width(i);
    const Region r = m.region(i);
    if (m.in_ionomer(i)) {
      double& lam = st.lambda[m.lambda_index(i)];
      if (lam < 0.0) {
        const double cap = r == Region::MEM ? 1.0 : cell.cl.eps_mc;
        dw += -lam * rho_over_M * cap * dx;
        lam = 0.0;
      }
    }
    if (r == Region::MEM) continue;
    const int li = m.liquid_index(i);
    const double eps = ctx.porous(i).eps;
    double& s = st.s[li];
    const double s_hi = 1.0 - s_clip;
    if (s < 0.0 || s > s_hi) {
      const double s_new = std::clamp(s, 0.0, s_hi);
      dw += (s_new - s) * eps * ctx.rho_l / kMolarMassH2O * dx;
      s = s_new;
    }
    double& cv = st.c_v[li];
    if (cv < 0.0) {
      dw += -cv * eps * (1.0 - s) * dx;
      cv = 0.0;
    }
    if (m.anode_side(i)) {
      double& c = st.c_h2[m.h2_index(i)];
      if (c < 0.0) {
        dh2 += -c * eps * (1.0 - s) * dx;
        c = 0.0;
      }
    } else {
      double& c = st.c_o2[m.o2_index(i)];
      if (c < 0.0) {
        do2 += -c * eps * (1.0 - s) * dx;
        c = 0.0;
      }
    }
  }
  auto clip_gc = [&](double& c, double& acc) {
    if (c < 0.0) {
      acc += -c * gc_vol;
      c = 0.0;
    }
  };
  clip_gc(st.c_v_agc, dw);
  clip_gc(st.c_v_cgc, dw);
  clip_gc(st.c_h2_agc, dh2);
  clip_gc(st.c_o2_cgc, do2);
  clip_gc(st.c_n2, dn2);
  if (led) {
    led->water_clipped += dw;
    led->h2_clipped += dh2;
    led->o2_clipped += do2;
    led->n2_clipped += dn2;
  }
}

} // namespace

// ---------------------------------------------------------------------------
// Transient integration

TransientResult Simulator::run_transient(const StateVector& s0,
                                         const CurrentProfile& profile,
                                         double t_end, double output_every) {
  TransientResult res;
  StateVector st = s0;
  std::vector<double> x;
  st.pack(x);
  const int n = st.size();

  transport::TransportInputs in;
  in.i_fc = profile.at(0.0);
  {
    const voltage::VoltageReport rep0 = report(st, in.i_fc);
    in.i_n = rep0.i_n;
    in.i_sc = rep0.i_sc;
    res.times.push_back(0.0);
    res.snapshots.push_back(st);
    res.reports.push_back(rep0);
  }

  LedgerAccumulator led;
  led.base = stored_amounts(ctx_, st);
  res.ledger.push_back(led.row(ctx_, st, 0.0));

  // One branch pattern per macro step: the step integrates a smooth system
  // and the pattern refreshes from the accepted state.
  transport::BranchState frozen = transport::branch_state(ctx_, st);
  RhsFn rhs = [&](const std::vector<double>& xx, std::vector<double>& out) {
    rhs_flat(xx, in, out, &frozen);
  };
  StepWorker worker(rhs, scale_, fd_groups_, fd_rows_, cfg_);

  double t = 0.0;
  double dt = std::min(cfg_.dt_init, cfg_.dt_max);
  double next_out = output_every > 0 ? output_every : t_end;
  const double t_eps = 1e-12 * std::max(t_end, 1.0);
  std::vector<double> xb, xh1, xh2, dum;

  while (t < t_end - t_eps) {
    if (res.steps_accepted + res.steps_rejected > cfg_.max_steps)
      throw NumericalError("run_transient: step budget exhausted at t = " +
                           std::to_string(t));
    in.i_fc = profile.at(t + t_eps);
    double dt_cap = std::min({dt, cfg_.dt_max, t_end - t});
    const double t_change = profile.next_change(t + t_eps);
    if (t_change - t > t_eps) dt_cap = std::min(dt_cap, t_change - t);
    if (next_out - t > t_eps) dt_cap = std::min(dt_cap, next_out - t);
    double h = std::max(dt_cap, cfg_.dt_min);

    const bool ok_big = worker.substep(x, h, xb);
    const bool ok_h1 = ok_big && worker.substep(x, 0.5 * h, xh1);
    const bool ok_h2 = ok_h1 && worker.substep(xh1, 0.5 * h, xh2);
    if (!ok_big || !ok_h1 || !ok_h2) {
      ++res.steps_rejected;
      if (h <= cfg_.dt_min * (1.0 + 1e-9)) {
        // Surface the underlying rhs failure, if any, for diagnostics.
        try {
          rhs(x, dum);
        } catch (const std::exception& e) {
          throw NumericalError(std::string("run_transient: Newton failed at "
                                           "dt_min; rhs reports: ") +
                               e.what());
        }
        throw NumericalError("run_transient: Newton failed at dt_min, t = " +
                             std::to_string(t));
      }
      dt = std::max(0.25 * h, cfg_.dt_min);
      continue;
    }

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = cfg_.time_error_tol *
                        std::max(scale_[i], std::abs(xh2[i]));
      err = std::max(err, std::abs(xb[i] - xh2[i]) / sc);
    }
    if (err > 1.0 && h > cfg_.dt_min * (1.0 + 1e-9)) {
      ++res.steps_rejected;
      dt = std::max(h * std::max(0.2, 0.9 / std::sqrt(err)), cfg_.dt_min);
      continue;
    }

    // Accepted: both half-steps are implicit-Euler solutions of the frozen
    // system, so their end-state fluxes integrate the ledger exactly.
    {
      StateVector tmp = StateVector::sized(mesh_);
      tmp.unpack(xh1);
      led.add_flows(ctx_, transport::evaluate(ctx_, tmp, in, &frozen), 0.5 * h);
      tmp.unpack(xh2);
      led.add_flows(ctx_, transport::evaluate(ctx_, tmp, in, &frozen), 0.5 * h);
    }
    st.unpack(xh2);
    clip_state(ctx_, cfg_.s_clip, st, &led);
    st.pack(x);
    t += h;
    ++res.steps_accepted;
    res.newton_iterations = worker.newton_iters;
    worker.have_J = false; // state moved; rebuild at next step
    frozen = transport::branch_state(ctx_, st);

    const voltage::VoltageReport rep = report(st, profile.at(t + t_eps));
    in.i_n = rep.i_n;
    in.i_sc = rep.i_sc;

    if (t >= next_out - t_eps || t >= t_end - t_eps) {
      res.times.push_back(t);
      res.snapshots.push_back(st);
      res.reports.push_back(rep);
      res.ledger.push_back(led.row(ctx_, st, t));
      while (next_out <= t + t_eps) next_out += output_every;
    }
    dt = h * std::clamp(0.9 / std::sqrt(std::max(err, 0.04)), 0.3, 2.0);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Steady state

StateVector Simulator::solve_steady(const StateVector& guess, double i_fc,
                                    SteadyStats* stats) {
  StateVector st = guess;
  std::vector<double> x;
  st.pack(x);

  transport::TransportInputs in;
  in.i_fc = i_fc;
  bool have_inputs = false;
  // The lagged voltage inputs relax under damping; the plain alternation
  // between the state solve and the voltage solve can settle into a tiny
  // limit cycle right above the residual tolerance.
  auto update_voltage = [&](double damping) -> bool {
    try {
      const voltage::VoltageReport rep = report(st, i_fc);
      if (!have_inputs) {
        in.i_n = rep.i_n;
        in.i_sc = rep.i_sc;
        have_inputs = true;
      } else {
        in.i_n += damping * (rep.i_n - in.i_n);
        in.i_sc += damping * (rep.i_sc - in.i_sc);
      }
      return true;
    } catch (const InfeasibleError&) {
      return false;
    }
  };
  if (!update_voltage(1.0))
    throw InfeasibleError("solve_steady: starved initial state at i_fc = " +
                          std::to_string(i_fc) + " A/m^2");

  transport::BranchState frozen = transport::branch_state(ctx_, st);
  RhsFn step_rhs = [&](const std::vector<double>& xx, std::vector<double>& out) {
    rhs_flat(xx, in, out, &frozen);
  };
  RhsFn true_rhs = [&](const std::vector<double>& xx, std::vector<double>& out) {
    rhs_flat(xx, in, out);
  };
  SolverConfig newton_cfg = cfg_;
  newton_cfg.newton_tol = std::min(cfg_.newton_tol, 1e-11);
  StepWorker worker(step_rhs, scale_, fd_groups_, fd_rows_, cfg_);
  StepWorker polisher(step_rhs, scale_, fd_groups_, fd_rows_, newton_cfg);

  auto starved = [&]() {
    const transport::StateAverages av = transport::compute_averages(ctx_, st);
    return av.c_h2_acl <= 1e-6 || av.c_o2_ccl <= 1e-6;
  };

  // Rate weights for the steady measure (true rhs, not the frozen one),
  // refreshed when the state has moved substantially; they only set scales,
  // so staleness within a phase is harmless.
  std::vector<double> w, f_res;
  auto refresh_weights = [&]() -> bool {
    try {
      true_rhs(x, f_res);
      rate_weights(true_rhs, x, f_res, scale_, fd_groups_, w);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  };
  auto weighted_res = [&]() -> double {
    try {
      true_rhs(x, f_res);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
    double m = 0.0;
    for (size_t i = 0; i < f_res.size(); ++i)
      m = std::max(m, std::abs(f_res[i]) / (scale_[i] * w[i]));
    return m;
  };
  if (!refresh_weights())
    throw NumericalError("solve_steady: state rejected by the transport "
                         "evaluation at i_fc = " + std::to_string(i_fc));

  // Pseudo-transient continuation walks the physical hydration transient;
  // once the residual is small enough, a direct Newton solve (a substep with
  // an effectively infinite dt) finishes quadratically.
  double dt = 1e-3;
  const double dt_ptc_cap = 20.0;
  double newton_threshold = std::max(1e-4, 100.0 * cfg_.steady_residual_tol);
  long accepted = 0;
  int voltage_failures = 0;
  bool was_newton = false;
  std::vector<double> x1;
  for (long iter = 0; iter < 800; ++iter) {
    const double res_norm = weighted_res();
    if (res_norm < cfg_.steady_residual_tol) {
      // Confirm against freshly computed weights before declaring victory.
      if (!refresh_weights() || weighted_res() >= cfg_.steady_residual_tol)
        continue;
      if (starved())
        throw InfeasibleError("solve_steady: converged to a starved state at "
                              "i_fc = " + std::to_string(i_fc) + " A/m^2");
      if (stats) {
        stats->residual = weighted_res();
        stats->steps = accepted;
      }
      return st;
    }

    const bool newton_mode = res_norm < newton_threshold;
    if (newton_mode && !was_newton) refresh_weights();
    was_newton = newton_mode;
    StepWorker& active = newton_mode ? polisher : worker;
    if (active.substep(x, newton_mode ? 1e12 : dt, x1)) {
      x = x1;
      st.unpack(x);
      // Keep saturation in its box; let concentrations roam so a negative
      // steady root is detected as starvation instead of being masked.
      for (auto& s : st.s) s = std::clamp(s, 0.0, 1.0 - cfg_.s_clip);
      for (auto& lam : st.lambda) lam = std::max(lam, 0.0);
      st.pack(x);
      ++accepted;
      worker.have_J = false;
      polisher.have_J = false;
      frozen = transport::branch_state(ctx_, st);
      if (!update_voltage(newton_mode ? 0.5 : 1.0)) {
        if (++voltage_failures > 4)
          throw InfeasibleError("solve_steady: starved at i_fc = " +
                                std::to_string(i_fc) + " A/m^2");
        dt = std::max(dt * 0.1, 1e-8);
        continue;
      }
      if (!newton_mode) dt = std::min(dt * 2.5, dt_ptc_cap);
    } else if (newton_mode) {
      // Not inside the Newton basin yet; demand a closer start.
      newton_threshold = std::max(res_norm * 0.3,
                                  2.0 * cfg_.steady_residual_tol);
    } else {
      dt *= 0.25;
      if (dt < 1e-10) {
        if (starved())
          throw InfeasibleError("solve_steady: starved at i_fc = " +
                                std::to_string(i_fc) + " A/m^2");
        throw NumericalError("solve_steady: Newton stalled at i_fc = " +
                             std::to_string(i_fc) + " A/m^2");
      }
    }
  }
  if (starved())
    throw InfeasibleError("solve_steady: starvation suspected at i_fc = " +
                          std::to_string(i_fc) + " A/m^2 (no convergence)");
  throw NumericalError("solve_steady: did not reach the residual tolerance "
                       "at i_fc = " + std::to_string(i_fc) + " A/m^2");
}

// ---------------------------------------------------------------------------
// Polarization sweep

std::vector<SweepRow> polarization_sweep(const CellDefinition& cell,
                                         const MeshResolution& res,
                                         const SolverConfig& cfg,
                                         const voltage::OverpotentialConfig& vcfg,
                                         const std::vector<double>& i_list,
                                         bool parallel) {
  const int n = static_cast<int>(i_list.size());
  std::vector<SweepRow> rows(n);
  constexpr int kChunk = 4; // warm starts stay inside a chunk
  const int n_chunks = (n + kChunk - 1) / kChunk;

  auto run_chunk = [&](int c) {
    Simulator sim(cell, res, cfg, vcfg);
    const double phi0 =
        std::clamp(0.5 * (cell.op.Phi_a_des + cell.op.Phi_c_des), 0.05, 1.0);
    StateVector st = initial_state(cell, sim.mesh(),
                                   {InitKind::Equilibrated, phi0});
    bool warm = false;
    for (int idx = c * kChunk; idx < std::min(n, (c + 1) * kChunk); ++idx) {
      SweepRow& row = rows[idx];
      row.i_fc = i_list[idx];
      try {
        SteadyStats stats;
        const StateVector sol = sim.solve_steady(st, i_list[idx], &stats);
        row.state = sol;
        row.rep = sim.report(sol, i_list[idx]);
        row.residual = stats.residual;
        row.feasible = true;
        st = sol;
        warm = true;
      } catch (const std::exception& e) {
        row.feasible = false;
        row.error = e.what();
        if (warm) continue; // keep the last good warm start
        st = initial_state(cell, sim.mesh(), {InitKind::Equilibrated, phi0});
      }
    }
  };

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
  }
  return rows;
}

} // namespace pemfc::solver
