#include "pemfc/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pemfc/errors.hpp"

namespace pemfc::calibration {

const char* param_name(Param p) {
  switch (p) {
    case Param::i0: return "i0";
    case Param::kappa_c: return "kappa_c";
    case Param::alpha_c: return "alpha_c";
    case Param::R_e: return "R_e";
    case Param::i_lim: return "i_lim";
  }
  return "?";
}

std::optional<Param> param_from_name(const std::string& name) {
  for (Param p : {Param::i0, Param::kappa_c, Param::alpha_c, Param::R_e,
                  Param::i_lim})
    if (name == param_name(p)) return p;
  return std::nullopt;
}

ParamSpec default_spec(Param p) {
  switch (p) {
    case Param::i0: return {p, 1e-3, 1e3, true};
    case Param::kappa_c: return {p, 0.25, 4.0, false};
    case Param::alpha_c: return {p, 0.05, 1.0, false};
    case Param::R_e: return {p, 0.0, 1e-4, false};
    case Param::i_lim: return {p, 1e3, 1e6, true};
  }
  return {p, 0, 1, false};
}

void apply_params(CellDefinition& cell, const std::vector<ParamSpec>& specs,
                  const std::vector<double>& values) {
  for (size_t j = 0; j < specs.size(); ++j) {
    const double v = values[j];
    switch (specs[j].which) {
      case Param::i0:
        cell.electro.i0_c_ref = v;
        cell.electro.i0_353_ref = v;
        break;
      case Param::kappa_c: cell.electro.kappa_c = v; break;
      case Param::alpha_c: cell.electro.alpha_c = v; break;
      case Param::R_e: cell.electro.R_e = v; break;
      case Param::i_lim: cell.electro.i_lim = v; break;
    }
  }
}

namespace {

double to_internal(const ParamSpec& s, double v) {
  return s.log_scale ? std::log(v) : v;
}
double to_natural(const ParamSpec& s, double t) {
  return s.log_scale ? std::exp(t) : t;
}

// Steady model voltages with per-point warm-start caching. Points are
// independent solves; results land in index-order slots, so evaluation is
// deterministic for any thread count.
struct Evaluator {
  const CalibrationProblem& pb;
  std::vector<StateVector> cache;
  std::vector<char> has_cache;
  int evals = 0;

  explicit Evaluator(const CalibrationProblem& p)
      : pb(p), cache(p.data.size()), has_cache(p.data.size(), 0) {}

  // Weighted residuals; infeasible points contribute the flat penalty.
  std::vector<double> residuals(const std::vector<double>& values,
                                int* n_feasible = nullptr) {
    ++evals;
    CellDefinition cell = pb.cell;
    apply_params(cell, pb.free_params, values);
    const int m = static_cast<int>(pb.data.size());
    std::vector<double> r(m);
    std::vector<char> ok(m, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int k = 0; k < m; ++k) {
      try {
        solver::Simulator sim(cell, pb.resolution, pb.solver_cfg,
                              pb.voltage_cfg);
        StateVector st0 =
            has_cache[k] ? cache[k]
                         : initial_state(cell, sim.mesh(),
                                         {InitKind::Equilibrated,
                                          std::clamp(0.5 * (cell.op.Phi_a_des +
                                                            cell.op.Phi_c_des),
                                                     0.05, 1.0)});
        const StateVector sol = sim.solve_steady(st0, pb.data[k].i_fc);
        const double U = sim.report(sol, pb.data[k].i_fc).U_cell;
        cache[k] = sol;
        has_cache[k] = 1;
        r[k] = pb.data[k].weight * (U - pb.data[k].U_meas);
        ok[k] = 1;
      } catch (const std::exception&) {
        r[k] = pb.data[k].weight * pb.penalty_residual;
      }
    }
    if (n_feasible)
      *n_feasible = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
    return r;
  }
};

double cost_of(const std::vector<double>& r) {
  double c = 0.0;
  for (double v : r) c += v * v;
  return 0.5 * c;
}

} // namespace

std::vector<double> model_voltages(const CalibrationProblem& problem,
                                   const std::vector<double>& values) {
  CellDefinition cell = problem.cell;
  apply_params(cell, problem.free_params, values);
  const int m = static_cast<int>(problem.data.size());
  std::vector<double> U(m, std::numeric_limits<double>::quiet_NaN());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int k = 0; k < m; ++k) {
    try {
      solver::Simulator sim(cell, problem.resolution, problem.solver_cfg,
                            problem.voltage_cfg);
      StateVector st0 = initial_state(
          cell, sim.mesh(),
          {InitKind::Equilibrated,
           std::clamp(0.5 * (cell.op.Phi_a_des + cell.op.Phi_c_des), 0.05,
                      1.0)});
      const StateVector sol = sim.solve_steady(st0, problem.data[k].i_fc);
      U[k] = sim.report(sol, problem.data[k].i_fc).U_cell;
    } catch (const std::exception&) {
      // leave NaN
    }
  }
  return U;
}

CalibrationResult fit(const CalibrationProblem& problem,
                      const std::vector<double>& initial_values) {
  const int p = static_cast<int>(problem.free_params.size());
  const int m = static_cast<int>(problem.data.size());
  if (p == 0) throw ValidationError("fit: no free parameters");
  if (static_cast<int>(initial_values.size()) != p)
    throw ValidationError("fit: initial value count mismatch");
  if (m < 2 * p)
    throw ValidationError("fit: need at least 2x more data points than free "
                          "parameters (" + std::to_string(m) + " points for " +
                          std::to_string(p) + " parameters)");
  for (const auto& s : problem.free_params) {
    if (!(s.lo < s.hi) || !std::isfinite(s.lo) || !std::isfinite(s.hi))
      throw ValidationError(std::string("fit: bad bounds for ") +
                            param_name(s.which));
    if (s.log_scale && s.lo <= 0.0)
      throw ValidationError(std::string("fit: log-scale bounds must be "
                                        "positive for ") +
                            param_name(s.which));
  }

  std::vector<double> lo(p), hi(p), theta(p);
  for (int j = 0; j < p; ++j) {
    const ParamSpec& s = problem.free_params[j];
    lo[j] = to_internal(s, s.lo);
    hi[j] = to_internal(s, s.hi);
    theta[j] = std::clamp(to_internal(s, initial_values[j]), lo[j], hi[j]);
  }
  auto naturals = [&](const std::vector<double>& th) {
    std::vector<double> v(p);
    for (int j = 0; j < p; ++j) v[j] = to_natural(problem.free_params[j], th[j]);
    return v;
  };

  Evaluator ev(problem);
  int feasible = 0;
  std::vector<double> r = ev.residuals(naturals(theta), &feasible);
  if (feasible == 0)
    throw ValidationError("fit: model infeasible at every data point for the "
                          "initial parameters");
  double cost = cost_of(r);

  CalibrationResult out;
  out.initial_rms = std::sqrt(2.0 * cost / m);
  out.trace.push_back({0, cost, 0.0, 0.0});

  Eigen::MatrixXd J(m, p);
  double mu = 1e-3;
  bool have_J_at_solution = false;

  for (int iter = 1; iter <= 60; ++iter) {
    // One-sided FD Jacobian on the transformed parameters; steps flip sign
    // at the upper bound.
    for (int j = 0; j < p; ++j) {
      double h = 1e-6 * std::max(std::abs(theta[j]), 1.0);
      if (theta[j] + h > hi[j]) h = -h;
      std::vector<double> th = theta;
      th[j] += h;
      const std::vector<double> rj = ev.residuals(naturals(th));
      for (int k = 0; k < m; ++k) J(k, j) = (rj[k] - r[k]) / h;
    }
    have_J_at_solution = true;

    Eigen::VectorXd rv(m);
    for (int k = 0; k < m; ++k) rv(k) = r[k];
    const Eigen::VectorXd g = J.transpose() * rv;
    if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd A = J.transpose() * J;

    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd Ad = A;
      for (int j = 0; j < p; ++j)
        Ad(j, j) += mu * std::max(A(j, j), 1e-12);
      const Eigen::VectorXd delta = Ad.ldlt().solve(-g);
      std::vector<double> th(p);
      double step = 0.0;
      for (int j = 0; j < p; ++j) {
        th[j] = std::clamp(theta[j] + delta(j), lo[j], hi[j]);
        step = std::max(step, std::abs(th[j] - theta[j]));
      }
      if (step < 1e-10) {
        out.converged = true;
        accepted = true;
        break;
      }
      const std::vector<double> r_new = ev.residuals(naturals(th));
      const double cost_new = cost_of(r_new);
      if (cost_new < cost) {
        theta = th;
        r = r_new;
        cost = cost_new;
        mu = std::max(mu / 3.0, 1e-14);
        out.trace.push_back({iter, cost, mu, step});
        accepted = true;
        have_J_at_solution = false;
      } else {
        mu *= 4.0;
      }
    }
    if (out.converged || !accepted) {
      if (!accepted) out.converged = true; // no descent direction left
      break;
    }
  }

  if (!have_J_at_solution) {
    for (int j = 0; j < p; ++j) {
      double h = 1e-6 * std::max(std::abs(theta[j]), 1.0);
      if (theta[j] + h > hi[j]) h = -h;
      std::vector<double> th = theta;
      th[j] += h;
      const std::vector<double> rj = ev.residuals(naturals(th));
      for (int k = 0; k < m; ++k) J(k, j) = (rj[k] - r[k]) / h;
    }
  }

  out.values = naturals(theta);
  out.bound_hit.resize(p);
  out.sensitivity.resize(p);
  for (int j = 0; j < p; ++j) {
    const double span = hi[j] - lo[j];
    out.bound_hit[j] = theta[j] <= lo[j] + 1e-9 * span ||
                       theta[j] >= hi[j] - 1e-9 * span;
    out.sensitivity[j] = J.col(j).norm();
  }
  out.rms = std::sqrt(2.0 * cost / m);
  out.residual_evaluations = ev.evals;
  return out;
}

} // namespace pemfc::calibration
