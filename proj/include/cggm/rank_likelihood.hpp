#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cggm/graph.hpp"
#include "cggm/rng.hpp"

namespace cggm {

enum class VarKind { Binary, Ordinal, Continuous };

// One observed column reduced to rank structure: rows carry level codes
// 0..d-1 in increasing value order (-1 for missing). Only these codes ever
// reach the sampler, so the chain depends on the data through ranks alone.
struct ColumnInfo {
  VarKind kind = VarKind::Ordinal;
  int d = 0;
  std::vector<int> level_of_row;                // size n; -1 = missing
  std::vector<std::vector<int>> rows_of_level;  // size d
  std::vector<std::string> label_of_level;      // original labels, size d
  int n_nonmissing = 0;
  // Nearest occupied level below/above each level (-1 / d when none);
  // declared levels can be empty in table data, and bounds must skip them.
  std::vector<int> prev_occupied;
  std::vector<int> next_occupied;

  void index_levels();  // rebuilds rows_of_level and the occupancy maps
};

struct ObservedData {
  int n = 0;
  int p = 0;
  std::vector<ColumnInfo> cols;
  std::vector<std::string> var_names;

  bool all_discrete() const;
  long cell_count() const;  // product of level counts (discrete data only)

  // Builders used by tests and the parsers. Discrete: integer level codes,
  // -1 for missing. Continuous: values are ranked, ties share a level,
  // NaN marks missing.
  static ObservedData from_levels(const std::vector<std::vector<int>>& rows,
                                  const std::vector<int>& level_counts);
  static ObservedData from_continuous(const std::vector<std::vector<double>>& rows);
};

void append_continuous_column(ObservedData& data,
                              const std::vector<double>& values);
void append_discrete_column(ObservedData& data, const std::vector<int>& codes,
                            int levels, VarKind kind);

// Latent n x p matrix constrained to the rank event of the data, with the
// scatter z'z maintained incrementally and per-level z extremes that make
// bound queries O(1).
class LatentMatrix {
 public:
  LatentMatrix() = default;
  LatentMatrix(const ObservedData& data, Eigen::MatrixXd z);

  const Eigen::MatrixXd& z() const { return z_; }
  const Eigen::MatrixXd& scatter() const { return scatter_; }

  // (L, U) for cell (row j, column v) under the current latent state.
  std::pair<double, double> bounds(const ObservedData& data, int v, int j) const;

  // Replaces z(j, v), updating scatter and level extremes.
  void set(const ObservedData& data, int v, int j, double value);

  // Recomputes scatter and extremes from scratch (kills float drift).
  void refresh(const ObservedData& data);

  bool satisfies_constraints(const ObservedData& data) const;
  double scatter_drift() const;  // max |scatter - z'z|

 private:
  void rebuild_extremes(const ObservedData& data, int v);
  Eigen::MatrixXd z_;
  Eigen::MatrixXd scatter_;
  std::vector<std::vector<double>> lvl_min_, lvl_max_;  // [v][level]
};

// Reference evaluation of the rank bounds for cell j of one column:
// L = max z over rows with smaller observed value, U = min z over rows with
// larger observed value; missing cells are unconstrained. O(n); the
// LatentMatrix fast path must agree with this exactly.
std::pair<double, double> latent_bounds(const std::vector<int>& level_of_row,
                                        const Eigen::VectorXd& z_col, int j);

// Midpoint normal scores: discrete cells get the quantile of the midpoint
// of their level's empirical CDF band; continuous cells (rank-0.5)/n with
// average ranks for ties (which is the same formula applied to tie groups).
// Missing cells start at zero.
LatentMatrix init_latents(const ObservedData& data);

// Draw from N(mu, sigma^2) conditioned on (lo, hi); +-inf allowed. Inverse
// CDF in the body, Robert's one-sided exponential rejection when the
// interval lies beyond 4 sigma. The result is strictly inside (lo, hi).
double sample_truncated_normal(double mu, double sigma, double lo, double hi,
                               Rng& rng);

// MCMC step 1: one Gibbs sweep over all cells (column-major, v outer and
// j inner) from the full conditionals N(mu_vj, 1/K_vv) truncated to the
// rank bounds, where mu depends only on the neighbors of v in g.
void step1_resample_latents(const ObservedData& data, const UndirectedGraph& g,
                            const Eigen::MatrixXd& K, LatentMatrix& latents,
                            Rng& rng);

}  // namespace cggm
