#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cggm/estimators.hpp"
#include "cggm/exec.hpp"
#include "cggm/graph.hpp"
#include "cggm/gwishart.hpp"
#include "cggm/rank_likelihood.hpp"

namespace cggm {

struct SamplerConfig {
  double delta = 3.0;
  double sigma_p = 0.1;
  double sigma_g = 0.1;
  long iterations = 10000;
  long burn_in = 1000;
  int thin = 25;
  int chains = 1;
  std::uint64_t master_seed = 42;
  long nc_samples = 2000;
  double epsilon = 0.1;
  // Scatter and K are rebuilt from scratch this often to stop float drift
  // from the incremental updates.
  long refresh_every = 500;

  void validate() const;
};

struct MoveStats {
  long diag_proposed = 0, diag_accepted = 0;
  long offdiag_proposed = 0, offdiag_accepted = 0;
  long add_proposed = 0, add_accepted = 0;
  long del_proposed = 0, del_accepted = 0;
  long completion_failures = 0;

  void merge(const MoveStats& o);
  static double rate(long acc, long prop) {
    return prop == 0 ? 0.0 : static_cast<double>(acc) / prop;
  }
};

struct ChainState {
  UndirectedGraph graph{1};
  Eigen::MatrixXd phi;  // upper triangular, K = phi' phi
  Eigen::MatrixXd K;
  LatentMatrix latents;
  long iteration = 0;
  Rng rng{0};
};

// Fresh state for one chain: graph Erdos-Renyi(1/2) from the chain's own
// seed stream, phi = K = I (the identity lies in every cone), latents from
// the midpoint normal scores.
ChainState init_chain_state(const SamplerConfig& config, const ObservedData& data,
                            int chain_index);

// MCMC step 2: Metropolis-Hastings sweep over the free Cholesky elements.
// Diagonals use a normal proposal truncated below zero with the ratio
// correction and the (gamma/phi_vv)^(delta+n+d_v-1) density-Jacobian term;
// off-diagonals use a symmetric normal proposal. scale_matrix = D + z'z.
void step2_resample_precision(ChainState& state,
                              const Eigen::MatrixXd& scale_matrix, long n,
                              double sigma_p, double delta, MoveStats& stats);

// MCMC step 3: reversible-jump edge add/delete on one uniformly chosen
// pair, with the prior normalizing-constant ratio from the cache.
void step3_resample_graph(ChainState& state, const Eigen::MatrixXd& scale_matrix,
                          NormConstCache& nc_cache, double sigma_g,
                          MoveStats& stats);

// Log acceptance ratios, exposed for the reciprocity and identity tests.
double log_ratio_diag(const ChainState& state, const Eigen::MatrixXd& scale_matrix,
                      long n, double sigma_p, double delta, int v, double gamma);
double log_ratio_graph(const ChainState& state, const Eigen::MatrixXd& scale_matrix,
                       NormConstCache& nc_cache, double sigma_g, int v1, int v2,
                       double new_value);

struct ChainResult {
  int chain_index = 0;
  PosteriorSummary summary;
  MoveStats moves;
  std::vector<int> edge_trace;  // one entry per iteration
  double mean_edge_count = 0.0;  // post burn-in
  std::string error;             // nonempty if the chain failed
};

using IterationCallback = std::function<void(const ChainState&)>;

// One full chain: per iteration, step 1 (latents), step 2 (precision),
// step 3 (graph). Emits the streamed summary, the thinned correlation
// samples, per-iteration edge counts, and acceptance diagnostics.
// Deterministic given (master_seed, chain_index).
ChainResult run_chain(const SamplerConfig& config, const ObservedData& data,
                      int chain_index, NormConstCache& nc_cache,
                      const IterationCallback* callback = nullptr);

struct RunResult {
  PosteriorSummary summary;
  MoveStats moves;
  std::vector<std::vector<int>> traces;     // per chain
  std::vector<double> chain_mean_edges;     // per chain
  std::size_t nc_cache_entries = 0;
};

// Independent chains (parallel across chains under Exec::Parallel) pooled
// by merging accumulators in chain order. A failed chain surfaces its own
// error without corrupting the others.
RunResult run_chains(const SamplerConfig& config, const ObservedData& data,
                     Exec exec = Exec::Parallel);

// Fixed full graph, no step 3, and step 2 replaced by direct draws from the
// conjugate Wishart posterior. Same summary surface as run_chains.
RunResult copula_full_baseline(const SamplerConfig& config,
                               const ObservedData& data,
                               Exec exec = Exec::Parallel);

// Bartlett draw from the Wishart with density proportional to
// det(K)^((nu-p-1)/2) exp(-tr(V^{-1} K)/2).
Eigen::MatrixXd wishart_draw(double nu, const Eigen::MatrixXd& V, Rng& rng);

}  // namespace cggm
