#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cggm/exec.hpp"
#include "cggm/graph.hpp"
#include "cggm/rank_likelihood.hpp"

namespace cggm {

// Streaming accumulators over the post-burn-in sample stream plus the
// thinned correlation samples needed by the table-based estimators.
// Merging is associative and commutative apart from the thinned sample
// order, which is concatenation order (chains merge in index order).
struct PosteriorSummary {
  int p = 0;
  double epsilon = 0.1;
  long S = 0;                        // streamed sample count
  std::vector<long> edge_counts;     // per pair, row-major
  Eigen::MatrixXd upsilon_sum;       // p x p
  std::vector<long> ups_above;       // tallies of |Upsilon| >= epsilon
  std::vector<Eigen::MatrixXd> thinned;
  std::vector<std::string> thinned_graphs;  // hex edge bitsets, same order

  PosteriorSummary() = default;
  PosteriorSummary(int p_, double epsilon_);
  void add(const UndirectedGraph& g, const Eigen::MatrixXd& upsilon,
           bool store_thinned);
  void merge(const PosteriorSummary& other);
};

// Proportion of sampled graphs containing each edge; symmetric, zero diag.
Eigen::MatrixXd edge_inclusion_probs(const PosteriorSummary& summary);

// Mean of the sampled correlation matrices.
Eigen::MatrixXd mean_correlation(const PosteriorSummary& summary);

struct BayesFactor {
  double value = 0.0;  // +inf reported via infinite flag
  long above = 0;
  long below = 0;
  bool infinite = false;
  double posterior_h1() const {
    return above + below == 0 ? 0.0
                              : static_cast<double>(above) / (above + below);
  }
};

// Interval-null test |Upsilon_v1v2| < epsilon from the streamed tallies.
// epsilon must equal the epsilon the summary accumulated at.
BayesFactor bayes_factor_upsilon(const PosteriorSummary& summary, int v1,
                                 int v2, double epsilon);

// Empirical CDF of one variable over its level codes; u0/u1 are the upper
// and lower copula arguments for a level.
struct EmpiricalMarginal {
  std::vector<double> cum;  // size d, nondecreasing, ends at 1
  int levels() const { return static_cast<int>(cum.size()); }
  double u0(int level) const { return cum[level]; }
  double u1(int level) const { return level > 0 ? cum[level - 1] : 0.0; }
  double mass(int level) const { return u0(level) - u1(level); }
};

std::vector<EmpiricalMarginal> empirical_marginals(const ObservedData& data);

// Joint probability of one cell by inclusion-exclusion over 2^p copula
// evaluations. p <= 12 enforced (cost doubles per variable). Tiny negative
// results are clamped to zero.
double cell_probability_exact(const std::vector<int>& cell,
                              const Eigen::MatrixXd& upsilon,
                              const std::vector<EmpiricalMarginal>& marginals,
                              double tol = 1e-4,
                              std::uint64_t seed = 0xCE11ull);

// Full cell-probability vector by forward simulation of the copula: draw
// latent normals, push through the empirical quantiles, bin. Cells are in
// lexicographic order with the last variable fastest. Nonnegative and sums
// to one (bit-exact when draws is a power of two).
std::vector<double> table_probabilities_mc(
    const Eigen::MatrixXd& upsilon,
    const std::vector<EmpiricalMarginal>& marginals, long draws, Rng& rng);

// n * posterior-mean cell probabilities averaged over the thinned samples.
// The MC path is the default; exact=true switches to inclusion-exclusion
// (p <= 12 regime only).
std::vector<double> expected_cell_counts(const PosteriorSummary& summary,
                                         const ObservedData& data, long draws,
                                         std::uint64_t seed,
                                         Exec exec = Exec::Parallel,
                                         bool exact = false);

std::vector<long> observed_cell_counts(const ObservedData& data);

// Mean-square contingency in [0,1]; zero iff the table factorizes. Follows
// the no-square-root form: (sum p^2/(p1 p2) - 1) / (min(d1,d2) - 1).
// Throws on a zero marginal cell.
double cramers_v(const Eigen::MatrixXd& joint, const std::vector<double>& marg1,
                 const std::vector<double>& marg2);

struct PairAssociation {
  int v1 = 0, v2 = 0;     // 0-based pair
  double rho_mean = 0.0;  // posterior mean Cramer's V
  long above = 0, below = 0;  // tallies of rho^s >= / < epsilon
  BayesFactor bayes_factor() const;
};

// Per-pair Cramer's V across the thinned samples: each sample's bivariate
// table comes from the exact p=2 inclusion-exclusion at that sample's
// correlation. Only discrete-discrete pairs appear.
std::vector<PairAssociation> pair_associations(const PosteriorSummary& summary,
                                               const ObservedData& data,
                                               double epsilon,
                                               Exec exec = Exec::Parallel);

struct VariableImportance {
  double expected_degree = 0.0;
  double cumulative_association = 0.0;
};

// Expected degree (sum of incident inclusion probabilities) and cumulative
// Cramer's V with pairs under the Bayes-factor threshold zeroed out.
std::vector<VariableImportance> degree_and_association_summary(
    const PosteriorSummary& summary,
    const std::vector<PairAssociation>& associations,
    double bf_threshold = 100.0);

// Helpers shared with I/O: mixed-radix cell decoding, last variable fastest.
std::vector<int> cell_levels(long index, const ObservedData& data);
long cell_index(const std::vector<int>& levels, const ObservedData& data);

}  // namespace cggm
