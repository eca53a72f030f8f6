// Benchmark: polarization sweep solved serially vs with OpenMP over chunks.
// The chunked warm-start scheme makes both paths produce identical rows, so
// this also double-checks that parallel and serial results agree bitwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pemfc/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pemfc;

namespace {

double run_once(const CellDefinition& cell, const MeshResolution& res,
                const solver::SolverConfig& cfg,
                const std::vector<double>& i_list, bool parallel,
                std::vector<solver::SweepRow>& rows) {
  const auto t0 = std::chrono::steady_clock::now();
  rows = solver::polarization_sweep(cell, res, cfg, {}, i_list, parallel);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

} // namespace

int main() {
  CellDefinition cell;
  MeshResolution res;
  solver::SolverConfig cfg;

  std::vector<double> i_list;
  for (int i = 0; i < 24; ++i) i_list.push_back(500.0 + i * 450.0);

  std::vector<solver::SweepRow> serial_rows, parallel_rows;
  const double t_serial = run_once(cell, res, cfg, i_list, false, serial_rows);
  const double t_warm = run_once(cell, res, cfg, i_list, true, parallel_rows);
  std::vector<solver::SweepRow> tmp;
  const double t_parallel = run_once(cell, res, cfg, i_list, true, tmp);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif

  double max_dev = 0.0;
  bool same = serial_rows.size() == parallel_rows.size();
  for (size_t i = 0; same && i < serial_rows.size(); ++i) {
    if (serial_rows[i].feasible != parallel_rows[i].feasible) same = false;
    if (serial_rows[i].feasible)
      max_dev = std::max(max_dev, std::abs(serial_rows[i].rep.U_cell -
                                           parallel_rows[i].rep.U_cell));
  }

  std::printf("sweep of %zu points on a %d-cell mesh\n", i_list.size(),
              2 * res.n_gdl + 2 * res.n_cl + res.n_mem);
  std::printf("  serial          : %8.3f s\n", t_serial);
  std::printf("  openmp (%2d thr) : %8.3f s  (first call %.3f s)\n", threads,
              t_parallel, t_warm);
  std::printf("  speedup         : %8.2fx\n", t_serial / t_parallel);
  std::printf("  serial/parallel U_cell agreement: %s (max |dU| = %.3g V)\n",
              same && max_dev == 0.0 ? "bitwise" : "DIFFERS", max_dev);
  return same ? 0 : 1;
}
