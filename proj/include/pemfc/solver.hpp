#pragma once

// Method-of-lines integration of the semi-discrete balances: implicit Euler
// with damped Newton, finite-difference Jacobian (structurally colored for
// the 1D stencil), step-doubling error control, pseudo-transient steady
// solves, and polarization sweeps. One Simulator instance owns one state
// trajectory; sweep points run as independent instances.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pemfc/polarization.hpp"
#include "pemfc/transport.hpp"

namespace pemfc::solver {

struct SolverConfig {
  double dt_init = 1e-3;
  double dt_min = 1e-10;
  double dt_max = 0.1;
  double newton_tol = 1e-8;        // relative, scaled update norm
  int newton_max_iter = 20;
  double time_error_tol = 1e-5;    // relative, step-doubling estimate
  double steady_residual_tol = 1e-9; // scaled rhs norm
  long max_steps = 2000000;
  double s_clip = 1e-9;
};

// Piecewise-constant current profile: value of the last breakpoint <= t.
struct CurrentProfile {
  std::vector<std::pair<double, double>> points{{0.0, 0.0}}; // (t, i_fc)
  double at(double t) const;
  // First breakpoint strictly after t, or +inf.
  double next_change(double t) const;
  static CurrentProfile constant(double i_fc);
};

// Cumulative conservation ledger, per unit active area (mol/m^2). "reacted"
// is consumption for the fuels and production for water; "clipped" is mass
// added by post-step positivity clips.
struct LedgerRow {
  double t = 0;
  double water_stored = 0, water_in = 0, water_out = 0, water_drained = 0,
         water_produced = 0, water_clipped = 0, water_closure = 0;
  double h2_stored = 0, h2_in = 0, h2_out = 0, h2_reacted = 0,
         h2_clipped = 0, h2_closure = 0;
  double o2_stored = 0, o2_in = 0, o2_out = 0, o2_reacted = 0,
         o2_clipped = 0, o2_closure = 0;
  double n2_stored = 0, n2_in = 0, n2_out = 0, n2_clipped = 0,
         n2_closure = 0;
  // Closure error relative to the species throughput.
  double water_rel_closure() const;
  double h2_rel_closure() const;
  double o2_rel_closure() const;
};

struct TransientResult {
  std::vector<double> times;
  std::vector<StateVector> snapshots;
  std::vector<voltage::VoltageReport> reports;
  std::vector<LedgerRow> ledger;
  long steps_accepted = 0;
  long steps_rejected = 0;
  long newton_iterations = 0;
};

struct SweepRow {
  double i_fc = 0;
  bool feasible = false;
  voltage::VoltageReport rep;
  StateVector state;
  double residual = 0; // scaled rhs norm at the reported state
  std::string error;   // non-empty when infeasible/failed
};

struct SteadyStats {
  double residual = 0;
  long steps = 0;
};

class Simulator {
public:
  Simulator(const CellDefinition& cell, const MeshResolution& res,
            const SolverConfig& cfg,
            voltage::OverpotentialConfig vcfg = {});

  const Mesh1D& mesh() const { return mesh_; }
  const transport::RunContext& context() const { return ctx_; }
  const CellDefinition& cell() const { return cell_; }
  const SolverConfig& config() const { return cfg_; }

  // Time derivative of the flat state for given (lagged) current inputs and
  // optional frozen branch pattern. Throws NumericalError naming the entry
  // on a non-finite derivative.
  void rhs_flat(const std::vector<double>& x, const transport::TransportInputs& in,
                std::vector<double>& dxdt,
                const transport::BranchState* frozen = nullptr) const;

  // Scaled max-norm of the state derivative.
  double residual_norm(const StateVector& st,
                       const transport::TransportInputs& in) const;

  // Steady-state measure: per-row residuals are scaled by the row's own
  // relaxation rate (finite-difference Jacobian diagonal, floored at 1/s),
  // so every entry estimates the remaining state correction in units of the
  // state scale. The stiff rows (gas diffusion across CL-sized cells relaxes
  // at ~1e6/s) would otherwise demand sub-epsilon state resolution.
  double steady_residual_norm(const StateVector& st,
                              const transport::TransportInputs& in) const;

  voltage::VoltageReport report(const StateVector& st, double i_fc) const;

  TransientResult run_transient(const StateVector& s0,
                                const CurrentProfile& profile, double t_end,
                                double output_every);

  // Pseudo-transient continuation to a steady state with self-consistent
  // voltage. Throws InfeasibleError on starvation.
  StateVector solve_steady(const StateVector& guess, double i_fc,
                           SteadyStats* stats = nullptr);

  const std::vector<double>& scales() const { return scale_; }
  // Column groups and per-column row patterns of the structural Jacobian.
  const std::vector<std::vector<int>>& fd_groups() const { return fd_groups_; }
  const std::vector<std::vector<int>>& fd_rows() const { return fd_rows_; }

private:
  CellDefinition cell_;
  Mesh1D mesh_;
  transport::RunContext ctx_;
  SolverConfig cfg_;
  voltage::OverpotentialConfig vcfg_;
  std::vector<double> scale_;
  mutable StateVector scratch_st_, scratch_d_; // one owner per instance
  // Column groups for the finite-difference Jacobian and the row pattern of
  // every column, from the conservative 1D coupling structure.
  std::vector<std::vector<int>> fd_groups_;
  std::vector<std::vector<int>> fd_rows_;

  void build_structure();
  friend struct StepWorker;
};

// Warm-started steady solves over an increasing current list. Points are
// processed in fixed chunks (warm start within a chunk only), so results are
// byte-identical for any OpenMP thread count; infeasible points are flagged
// in their row and do not abort the sweep.
std::vector<SweepRow> polarization_sweep(const CellDefinition& cell,
                                         const MeshResolution& res,
                                         const SolverConfig& cfg,
                                         const voltage::OverpotentialConfig& vcfg,
                                         const std::vector<double>& i_list,
                                         bool parallel = true);

// Generic damped-Newton implicit-Euler substep on a flat system; exposed for
// the solver tests. Returns false when Newton fails. `groups`/`rows` may be
// empty for a dense one-column-at-a-time Jacobian.
bool implicit_euler_substep(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& rhs,
    const std::vector<double>& x0, double dt, const std::vector<double>& scale,
    const std::vector<std::vector<int>>& groups,
    const std::vector<std::vector<int>>& rows, const SolverConfig& cfg,
    std::vector<double>& out, long* newton_iters = nullptr);

} // namespace pemfc::solver
