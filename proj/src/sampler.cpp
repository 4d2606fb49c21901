#include "cggm/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "cggm/chol.hpp"
#include "cggm/mvn.hpp"

namespace cggm {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SamplerConfig::validate() const {
  if (delta <= 2.0) throw std::invalid_argument("config: delta must exceed 2");
  if (sigma_p <= 0.0 || sigma_g <= 0.0) {
    throw std::invalid_argument("config: sigma_p and sigma_g must be > 0");
  }
  if (iterations < 0 || burn_in < 0 || burn_in > iterations) {
    throw std::invalid_argument("config: need 0 <= burn_in <= iterations");
  }
  if (thin < 1) throw std::invalid_argument("config: thin must be >= 1");
  if (chains < 1) throw std::invalid_argument("config: chains must be >= 1");
  if (nc_samples < 1) throw std::invalid_argument("config: nc_samples must be >= 1");
  if (epsilon <= 0.0) throw std::invalid_argument("config: epsilon must be > 0");
}

void MoveStats::merge(const MoveStats& o) {
  diag_proposed += o.diag_proposed;
  diag_accepted += o.diag_accepted;
  offdiag_proposed += o.offdiag_proposed;
  offdiag_accepted += o.offdiag_accepted;
  add_proposed += o.add_proposed;
  add_accepted += o.add_accepted;
  del_proposed += o.del_proposed;
  del_accepted += o.del_accepted;
  completion_failures += o.completion_failures;
}

ChainState init_chain_state(const SamplerConfig& config, const ObservedData& data,
                            int chain_index) {
  if (data.p < 1) throw std::invalid_argument("sampler: data has no variables");
  ChainState state;
  state.rng = Rng(mix_seed(config.master_seed, static_cast<std::uint64_t>(chain_index)));
  state.graph = random_graph(data.p, state.rng);
  // The identity factor is already complete with respect to any graph and
  // puts K = I inside every cone.
  state.phi = Eigen::MatrixXd::Identity(data.p, data.p);
  state.K = Eigen::MatrixXd::Identity(data.p, data.p);
  state.latents = init_latents(data);
  return state;
}

namespace {

struct Proposal {
  double log_ratio = -kInf;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd K;
  bool valid = false;
};

double trace_inner_diff(const Eigen::MatrixXd& K_new, const Eigen::MatrixXd& K_old,
                        const Eigen::MatrixXd& M) {
  return ((K_new - K_old).cwiseProduct(M)).sum();
}

// Perturbation of one free element (v1,v2) of phi to value gamma, completed
// with respect to the current graph.
Proposal propose_free_element(const ChainState& state, const Eigen::MatrixXd& M,
                              long n, double sigma_p, double delta, int v1,
                              int v2, double gamma) {
  Proposal prop;
  prop.phi = state.phi;
  prop.phi(v1, v2) = gamma;
  complete_in_place(prop.phi, state.graph, v2);
  prop.K = prop.phi.transpose() * prop.phi;
  if (!prop.K.allFinite()) return prop;
  const double delta_trace = trace_inner_diff(prop.K, state.K, M);
  if (v1 == v2) {
    if (gamma <= 0.0) return prop;
    const double cur = state.phi(v1, v1);
    const double d_v = state.graph.later_degree(v1);
    prop.log_ratio = std::log(std_normal_cdf(cur / sigma_p)) -
                     std::log(std_normal_cdf(gamma / sigma_p)) +
                     (delta + n + d_v - 1.0) * (std::log(gamma) - std::log(cur)) -
                     0.5 * delta_trace;
  } else {
    prop.log_ratio = -0.5 * delta_trace;
  }
  prop.valid = std::isfinite(prop.log_ratio);
  return prop;
}

// Reversible-jump move on the pair (v1,v2). When the edge is absent it is
// added with the new free value gamma; when present it is deleted and gamma
// is ignored (completion determines the entry).
Proposal propose_graph_move(const ChainState& state, const Eigen::MatrixXd& M,
                            NormConstCache& nc_cache, double sigma_g, int v1,
                            int v2, double gamma) {
  const bool adding = !state.graph.has_edge(v1, v2);
  const UndirectedGraph new_graph = state.graph.toggled(v1, v2);

  Proposal prop;
  prop.phi = state.phi;
  if (adding) prop.phi(v1, v2) = gamma;
  complete_in_place(prop.phi, new_graph, v2);
  prop.K = prop.phi.transpose() * prop.phi;
  if (!prop.K.allFinite()) return prop;

  const double delta_trace = trace_inner_diff(prop.K, state.K, M);
  const double log_nc_ratio =
      nc_cache.log_norm(state.graph) - nc_cache.log_norm(new_graph);
  const double shift = prop.phi(v1, v2) - state.phi(v1, v2);
  const double dim_term = std::log(sigma_g) + kHalfLog2Pi +
                          std::log(state.phi(v1, v1));
  const double sign = adding ? 1.0 : -1.0;
  prop.log_ratio = sign * dim_term + log_nc_ratio - 0.5 * delta_trace +
                   sign * shift * shift / (2.0 * sigma_g * sigma_g);
  prop.valid = std::isfinite(prop.log_ratio);
  return prop;
}

}  // namespace

double log_ratio_diag(const ChainState& state, const Eigen::MatrixXd& M, long n,
                      double sigma_p, double delta, int v, double gamma) {
  return propose_free_element(state, M, n, sigma_p, delta, v, v, gamma).log_ratio;
}

double log_ratio_graph(const ChainState& state, const Eigen::MatrixXd& M,
                       NormConstCache& nc_cache, double sigma_g, int v1, int v2,
                       double new_value) {
  return propose_graph_move(state, M, nc_cache, sigma_g, v1, v2, new_value)
      .log_ratio;
}

void step2_resample_precision(ChainState& state, const Eigen::MatrixXd& M,
                              long n, double sigma_p, double delta,
                              MoveStats& stats) {
  for (const auto& [v1, v2] : free_elements(state.graph)) {
    const bool diag = (v1 == v2);
    double gamma;
    if (diag) {
      gamma = sample_truncated_normal(state.phi(v1, v1), sigma_p, 0.0, kInf,
                                      state.rng);
      ++stats.diag_proposed;
    } else {
      gamma = state.phi(v1, v2) + sigma_p * state.rng.normal();
      ++stats.offdiag_proposed;
    }
    Proposal prop =
        propose_free_element(state, M, n, sigma_p, delta, v1, v2, gamma);
    const double log_u = std::log(state.rng.uniform());
    if (!prop.valid) {
      ++stats.completion_failures;
      continue;
    }
    if (log_u < prop.log_ratio) {
      state.phi.swap(prop.phi);
      state.K.swap(prop.K);
      if (diag) {
        ++stats.diag_accepted;
      } else {
        ++stats.offdiag_accepted;
      }
    }
  }
}

void step3_resample_graph(ChainState& state, const Eigen::MatrixXd& M,
                          NormConstCache& nc_cache, double sigma_g,
                          MoveStats& stats) {
  const int idx = static_cast<int>(
      state.rng.below(static_cast<std::uint64_t>(state.graph.pair_count())));
  const auto [v1, v2] = state.graph.pair_at(idx);
  const bool adding = !state.graph.has_edge(v1, v2);

  double gamma = 0.0;
  if (adding) {
    gamma = state.phi(v1, v2) + sigma_g * state.rng.normal();
    ++stats.add_proposed;
  } else {
    ++stats.del_proposed;
  }

  Proposal prop =
      propose_graph_move(state, M, nc_cache, sigma_g, v1, v2, gamma);
  const double log_u = std::log(state.rng.uniform());
  if (!prop.valid) {
    ++stats.completion_failures;
    return;
  }
  if (log_u < prop.log_ratio) {
    state.graph.toggle_edge(v1, v2);
    state.phi.swap(prop.phi);
    state.K.swap(prop.K);
    if (adding) {
      ++stats.add_accepted;
    } else {
      ++stats.del_accepted;
    }
  }
}

namespace {

ChainResult run_single_chain(const SamplerConfig& config, const ObservedData& data,
                             int chain_index, NormConstCache* nc_cache,
                             bool full_graph_direct,
                             const IterationCallback* callback) {
  config.validate();
  ChainState state = init_chain_state(config, data, chain_index);
  if (full_graph_direct) {
    state.graph = UndirectedGraph::complete(data.p);
  }

  ChainResult out;
  out.chain_index = chain_index;
  out.summary = PosteriorSummary(data.p, config.epsilon);
  out.edge_trace.reserve(config.iterations);

  const long n = data.n;
  const double nu = config.delta + n + data.p - 1.0;
  Eigen::MatrixXd M(data.p, data.p);
  double edge_sum = 0.0;
  long post = 0;

  for (long s = 0; s < config.iterations; ++s) {
    state.iteration = s;
    if (n > 0) {
      step1_resample_latents(data, state.graph, state.K, state.latents,
                             state.rng);
    }
    M = state.latents.scatter();
    M.diagonal().array() += 1.0;  // D = I

    if (full_graph_direct) {
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      const Eigen::MatrixXd V =
          llt.solve(Eigen::MatrixXd::Identity(data.p, data.p));
      state.K = wishart_draw(nu, V, state.rng);
      state.phi = Eigen::LLT<Eigen::MatrixXd>(state.K)
                      .matrixU();  // keep K = phi' phi
    } else {
      step2_resample_precision(state, M, n, config.sigma_p, config.delta,
                               out.moves);
      step3_resample_graph(state, M, *nc_cache, config.sigma_g, out.moves);
    }

    out.edge_trace.push_back(state.graph.edge_count());
    if (s >= config.burn_in) {
      const Eigen::MatrixXd upsilon = correlation_from_precision(state.K);
      const bool store = ((s - config.burn_in) % config.thin == 0);
      out.summary.add(state.graph, upsilon, store);
      edge_sum += state.graph.edge_count();
      ++post;
    }
    if (config.refresh_every > 0 && (s + 1) % config.refresh_every == 0) {
      state.latents.refresh(data);
      if (!full_graph_direct) state.K = assemble_precision(state.phi);
    }
    if (callback) (*callback)(state);
  }
  out.mean_edge_count = post > 0 ? edge_sum / post : 0.0;
  return out;
}

RunResult pool_chains(const SamplerConfig& config, const ObservedData& data,
                      Exec exec, NormConstCache* nc_cache,
                      bool full_graph_direct) {
  config.validate();
  std::vector<ChainResult> results(config.chains);

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int c = 0; c < config.chains; ++c) {
      try {
        results[c] = run_single_chain(config, data, c, nc_cache,
                                      full_graph_direct, nullptr);
      } catch (const std::exception& e) {
        results[c].chain_index = c;
        results[c].error = e.what();
      }
    }
  } else {
    for (int c = 0; c < config.chains; ++c) {
      try {
        results[c] = run_single_chain(config, data, c, nc_cache,
                                      full_graph_direct, nullptr);
      } catch (const std::exception& e) {
        results[c].chain_index = c;
        results[c].error = e.what();
      }
    }
  }

  RunResult out;
  out.summary = PosteriorSummary(data.p, config.epsilon);
  std::string errors;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      errors += "chain " + std::to_string(r.chain_index) + ": " + r.error + "; ";
      continue;
    }
    out.summary.merge(r.summary);
    out.moves.merge(r.moves);
    out.traces.push_back(r.edge_trace);
    out.chain_mean_edges.push_back(r.mean_edge_count);
  }
  if (!errors.empty()) {
    throw std::runtime_error("run_chains: " + errors);
  }
  if (nc_cache) out.nc_cache_entries = nc_cache->size();
  return out;
}

}  // namespace

ChainResult run_chain(const SamplerConfig& config, const ObservedData& data,
                      int chain_index, NormConstCache& nc_cache,
                      const IterationCallback* callback) {
  return run_single_chain(config, data, chain_index, &nc_cache, false, callback);
}

RunResult run_chains(const SamplerConfig& config, const ObservedData& data,
                     Exec exec) {
  NormConstCache cache(config.delta, config.nc_samples, config.master_seed);
  return pool_chains(config, data, exec, &cache, false);
}

RunResult copula_full_baseline(const SamplerConfig& config,
                               const ObservedData& data, Exec exec) {
  return pool_chains(config, data, exec, nullptr, true);
}

Eigen::MatrixXd wishart_draw(double nu, const Eigen::MatrixXd& V, Rng& rng) {
  const int p = static_cast<int>(V.rows());
  if (nu <= p - 1) throw std::invalid_argument("wishart_draw: nu must exceed p-1");
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("wishart_draw: scale matrix not positive definite");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
    A(i, i) = rng.chi(nu - i);
  }
  const Eigen::MatrixXd L = llt.matrixL() * A;
  return L * L.transpose();
}

}  // namespace cggm
