#pragma once

#include <cstdint>
#include <mutex>
#include <unordered_map>

#include <Eigen/Dense>

#include "cggm/exec.hpp"
#include "cggm/graph.hpp"

namespace cggm {

// Unnormalized log density of the G-Wishart W_G(delta, D) at K:
// ((delta-2)/2) log det K - (1/2) <K, D>. Throws if K is outside the cone.
double log_density_unnorm(const Eigen::MatrixXd& K, double delta,
                          const Eigen::MatrixXd& D, const UndirectedGraph& g);

// Closed-form log normalizing constant for the complete graph.
double log_norm_complete(int p, double delta, const Eigen::MatrixXd& D);

struct LogNormEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

// Monte Carlo estimate of log I_G(delta, I_p): the closed-form factor
// prod_v 2^((delta+d_v)/2) Gamma((delta+d_v)/2) * (2 pi)^(|E|/2) times the
// sampled expectation E[exp(-1/2 sum_nonfree phi_ij^2)] under chi/normal
// draws of the free elements. Exact (zero variance) when no non-free
// entries exist. Deterministic given (seed, mc_samples) for either Exec.
LogNormEstimate log_norm_mc(const UndirectedGraph& g, double delta,
                            long mc_samples, std::uint64_t seed,
                            Exec exec = Exec::Parallel);

// Variant that accepts D; anything other than the identity is unsupported
// and throws. The sampler only ever needs prior constants at D = I.
LogNormEstimate log_norm_mc(const UndirectedGraph& g, double delta,
                            const Eigen::MatrixXd& D, long mc_samples,
                            std::uint64_t seed, Exec exec = Exec::Parallel);

// Thread-safe cache of log I_G(delta, I) keyed by the canonical graph key.
// Each graph's estimate uses a seed derived from (master seed, graph key),
// so a given graph maps to one value per run no matter which chain asks
// first or how threads interleave.
class NormConstCache {
 public:
  NormConstCache(double delta, long mc_samples, std::uint64_t master_seed)
      : delta_(delta), mc_samples_(mc_samples), master_seed_(master_seed) {}

  double log_norm(const UndirectedGraph& g);

  std::size_t size() const;
  long hits() const { return hits_; }
  double delta() const { return delta_; }

 private:
  double delta_;
  long mc_samples_;
  std::uint64_t master_seed_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, double> table_;
  long hits_ = 0;
};

}  // namespace cggm
