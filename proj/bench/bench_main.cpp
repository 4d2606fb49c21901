// Times the OpenMP kernels against their serial reference paths and checks
// that both produce identical results. Synthesizes a Rochdale-sized binary
// data set so there is nothing to stage.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "cggm/estimators.hpp"
#include "cggm/gwishart.hpp"
#include "cggm/sampler.hpp"

using namespace cggm;

namespace {

double time_of(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void row(const char* name, double serial_s, double parallel_s, bool equal) {
  std::printf("%-28s %9.3fs %9.3fs %7.2fx   %s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, equal ? "identical" : "MISMATCH");
}

ObservedData synth_binary(int n, int p, std::uint64_t seed) {
  Rng gen(seed);
  std::vector<std::vector<int>> rows(n, std::vector<int>(p));
  for (int j = 0; j < n; ++j) {
    const double f = gen.normal();
    for (int v = 0; v < p; ++v) {
      rows[j][v] = (0.6 * f + 0.8 * gen.normal() > 0.2 * v - 0.8) ? 1 : 0;
    }
  }
  return ObservedData::from_levels(rows, std::vector<int>(p, 2));
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "parallel",
              "speedup");

  const auto data = synth_binary(665, 8, 11);

  // Multi-chain sampler.
  SamplerConfig config;
  config.iterations = 6000;
  config.burn_in = 1000;
  config.thin = 10;
  config.chains = 4;
  config.master_seed = 3;
  RunResult serial_run, parallel_run;
  const double t_ser = time_of([&] { serial_run = run_chains(config, data, Exec::Serial); });
  const double t_par = time_of([&] { parallel_run = run_chains(config, data, Exec::Parallel); });
  bool same = serial_run.summary.edge_counts == parallel_run.summary.edge_counts &&
              serial_run.summary.upsilon_sum == parallel_run.summary.upsilon_sum &&
              serial_run.traces == parallel_run.traces;
  row("run_chains (4 chains)", t_ser, t_par, same);

  // Normalizing-constant Monte Carlo.
  Rng g_rng(5);
  const auto graph = random_graph(12, g_rng);
  LogNormEstimate nc_ser, nc_par;
  const double t_nc_ser =
      time_of([&] { nc_ser = log_norm_mc(graph, 3.0, 400000, 17, Exec::Serial); });
  const double t_nc_par =
      time_of([&] { nc_par = log_norm_mc(graph, 3.0, 400000, 17, Exec::Parallel); });
  row("log_norm_mc (4e5 samples)", t_nc_ser, t_nc_par,
      nc_ser.value == nc_par.value && nc_ser.std_error == nc_par.std_error);

  // Cell-probability tables over the stored samples.
  std::vector<double> cells_ser, cells_par;
  const double t_cells_ser = time_of([&] {
    cells_ser = expected_cell_counts(serial_run.summary, data, 10000, 7,
                                     Exec::Serial);
  });
  const double t_cells_par = time_of([&] {
    cells_par = expected_cell_counts(serial_run.summary, data, 10000, 7,
                                     Exec::Parallel);
  });
  row("expected_cell_counts", t_cells_ser, t_cells_par, cells_ser == cells_par);

  // Per-sample bivariate association tables.
  std::vector<PairAssociation> as_ser, as_par;
  const double t_as_ser = time_of([&] {
    as_ser = pair_associations(serial_run.summary, data, 0.1, Exec::Serial);
  });
  const double t_as_par = time_of([&] {
    as_par = pair_associations(serial_run.summary, data, 0.1, Exec::Parallel);
  });
  bool as_same = as_ser.size() == as_par.size();
  for (std::size_t k = 0; as_same && k < as_ser.size(); ++k) {
    as_same = as_ser[k].rho_mean == as_par[k].rho_mean &&
              as_ser[k].above == as_par[k].above;
  }
  row("pair_associations", t_as_ser, t_as_par, as_same);

  return 0;
}
