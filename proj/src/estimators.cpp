#include "cggm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "cggm/mvn.hpp"

namespace cggm {

PosteriorSummary::PosteriorSummary(int p_, double epsilon_)
    : p(p_), epsilon(epsilon_) {
  const int pairs = p * (p - 1) / 2;
  edge_counts.assign(pairs, 0);
  ups_above.assign(pairs, 0);
  upsilon_sum = Eigen::MatrixXd::Zero(p, p);
}

void PosteriorSummary::add(const UndirectedGraph& g,
                           const Eigen::MatrixXd& upsilon, bool store_thinned) {
  ++S;
  upsilon_sum += upsilon;
  int idx = 0;
  for (int v1 = 0; v1 < p; ++v1) {
    for (int v2 = v1 + 1; v2 < p; ++v2, ++idx) {
      if (g.has_edge(v1, v2)) ++edge_counts[idx];
      if (std::fabs(upsilon(v1, v2)) >= epsilon) ++ups_above[idx];
    }
  }
  if (store_thinned) {
    thinned.push_back(upsilon);
    thinned_graphs.push_back(g.key_hex());
  }
}

void PosteriorSummary::merge(const PosteriorSummary& other) {
  if (p == 0) {
    *this = other;
    return;
  }
  if (other.p != p || other.epsilon != epsilon) {
    throw std::invalid_argument("PosteriorSummary::merge: incompatible summaries");
  }
  S += other.S;
  upsilon_sum += other.upsilon_sum;
  for (std::size_t i = 0; i < edge_counts.size(); ++i) {
    edge_counts[i] += other.edge_counts[i];
    ups_above[i] += other.ups_above[i];
  }
  thinned.insert(thinned.end(), other.thinned.begin(), other.thinned.end());
  thinned_graphs.insert(thinned_graphs.end(), other.thinned_graphs.begin(),
                        other.thinned_graphs.end());
}

namespace {

void require_samples(const PosteriorSummary& s) {
  if (s.S < 1) throw std::invalid_argument("estimator: empty posterior summary");
}

int pair_index_of(int p, int v1, int v2) {
  if (v1 > v2) std::swap(v1, v2);
  return v1 * p - v1 * (v1 + 1) / 2 + (v2 - v1 - 1);
}

}  // namespace

Eigen::MatrixXd edge_inclusion_probs(const PosteriorSummary& summary) {
  require_samples(summary);
  const int p = summary.p;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  int idx = 0;
  for (int v1 = 0; v1 < p; ++v1) {
    for (int v2 = v1 + 1; v2 < p; ++v2, ++idx) {
      out(v1, v2) = out(v2, v1) =
          static_cast<double>(summary.edge_counts[idx]) / summary.S;
    }
  }
  return out;
}

Eigen::MatrixXd mean_correlation(const PosteriorSummary& summary) {
  require_samples(summary);
  Eigen::MatrixXd out = summary.upsilon_sum / static_cast<double>(summary.S);
  out.diagonal().setOnes();
  return out;
}

BayesFactor bayes_factor_upsilon(const PosteriorSummary& summary, int v1,
                                 int v2, double epsilon) {
  require_samples(summary);
  if (epsilon <= 0.0) {
    throw std::invalid_argument("bayes_factor_upsilon: epsilon must be > 0");
  }
  if (epsilon != summary.epsilon) {
    throw std::invalid_argument(
        "bayes_factor_upsilon: tallies were accumulated at epsilon = " +
        std::to_string(summary.epsilon));
  }
  BayesFactor bf;
  bf.above = summary.ups_above[pair_index_of(summary.p, v1, v2)];
  bf.below = summary.S - bf.above;
  if (bf.below == 0) {
    bf.infinite = true;
    bf.value = std::numeric_limits<double>::infinity();
  } else {
    bf.value = static_cast<double>(bf.above) / static_cast<double>(bf.below);
  }
  return bf;
}

std::vector<EmpiricalMarginal> empirical_marginals(const ObservedData& data) {
  std::vector<EmpiricalMarginal> out(data.p);
  for (int v = 0; v < data.p; ++v) {
    const ColumnInfo& col = data.cols[v];
    EmpiricalMarginal m;
    m.cum.resize(col.d);
    long running = 0;
    for (int l = 0; l < col.d; ++l) {
      running += static_cast<long>(col.rows_of_level[l].size());
      m.cum[l] = static_cast<double>(running) / col.n_nonmissing;
    }
    m.cum.back() = 1.0;
    out[v] = std::move(m);
  }
  return out;
}

double cell_probability_exact(const std::vector<int>& cell,
                              const Eigen::MatrixXd& upsilon,
                              const std::vector<EmpiricalMarginal>& marginals,
                              double tol, std::uint64_t seed) {
  const int p = static_cast<int>(cell.size());
  if (p > 12) {
    throw std::invalid_argument(
        "cell_probability_exact: p > 12 needs the Monte Carlo path");
  }
  Eigen::VectorXd u(p);
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    bool zero = false;
    int parity = 0;
    for (int v = 0; v < p && !zero; ++v) {
      const bool take_lower = (mask >> v) & 1u;
      const double uv = take_lower ? marginals[v].u1(cell[v])
                                   : marginals[v].u0(cell[v]);
      if (uv <= 0.0) {
        zero = true;
        break;
      }
      parity ^= take_lower ? 1 : 0;
      u[v] = uv;
    }
    if (zero) continue;
    const double c = gaussian_copula(u, upsilon, tol, mix_seed(seed, mask)).prob;
    sum += (parity ? -1.0 : 1.0) * c;
  }
  if (sum < 0.0) {
    if (sum < -tol * static_cast<double>(1u << p)) {
      std::fprintf(stderr,
                   "warning: inclusion-exclusion cell probability %.3e below "
                   "zero beyond tolerance; clamping\n",
                   sum);
    }
    sum = 0.0;
  }
  return std::min(sum, 1.0);
}

std::vector<double> table_probabilities_mc(
    const Eigen::MatrixXd& upsilon,
    const std::vector<EmpiricalMarginal>& marginals, long draws, Rng& rng) {
  if (draws < 1) throw std::invalid_argument("table_probabilities_mc: draws < 1");
  const int p = static_cast<int>(marginals.size());
  long cells = 1;
  for (const auto& m : marginals) cells *= m.levels();

  bool clamped = false;
  const Eigen::MatrixXd L = psd_cholesky(upsilon, &clamped);
  // Row-major copy of the factor keeps the per-draw dot products on
  // contiguous memory; this loop is the estimator hot path.
  std::vector<double> lrow(p * p);
  std::vector<double> inv_sd(p);
  for (int v = 0; v < p; ++v) {
    for (int m = 0; m < p; ++m) lrow[v * p + m] = L(v, m);
    inv_sd[v] = 1.0 / L.row(v).norm();
  }

  std::vector<long> counts(cells, 0);
  std::vector<double> xi(p);
  for (long d = 0; d < draws; ++d) {
    for (int v = 0; v < p; ++v) xi[v] = rng.normal();
    long idx = 0;
    for (int v = 0; v < p; ++v) {
      const double* row = &lrow[v * p];
      double zv = 0.0;
      for (int m = 0; m <= v; ++m) zv += row[m] * xi[m];
      const double uv = std_normal_cdf(zv * inv_sd[v]);
      const auto& cum = marginals[v].cum;
      int level = 0;
      while (uv > cum[level]) ++level;  // first level with F(level) >= u
      idx = idx * marginals[v].levels() + level;
    }
    ++counts[idx];
  }
  std::vector<double> probs(cells);
  for (long c = 0; c < cells; ++c) {
    probs[c] = static_cast<double>(counts[c]) / static_cast<double>(draws);
  }
  return probs;
}

std::vector<int> cell_levels(long index, const ObservedData& data) {
  std::vector<int> levels(data.p);
  for (int v = data.p - 1; v >= 0; --v) {
    levels[v] = static_cast<int>(index % data.cols[v].d);
    index /= data.cols[v].d;
  }
  return levels;
}

long cell_index(const std::vector<int>& levels, const ObservedData& data) {
  long idx = 0;
  for (int v = 0; v < data.p; ++v) idx = idx * data.cols[v].d + levels[v];
  return idx;
}

std::vector<long> observed_cell_counts(const ObservedData& data) {
  const long cells = data.cell_count();
  std::vector<long> counts(cells, 0);
  std::vector<int> levels(data.p);
  for (int j = 0; j < data.n; ++j) {
    for (int v = 0; v < data.p; ++v) {
      const int l = data.cols[v].level_of_row[j];
      if (l < 0) throw std::invalid_argument("observed_cell_counts: missing cell");
      levels[v] = l;
    }
    ++counts[cell_index(levels, data)];
  }
  return counts;
}

namespace {

constexpr long kSampleBlock = 64;

// Ordered block reduction: blocks of thinned samples are processed
// independently (possibly in parallel) and combined in block order, so the
// result does not depend on the thread count.
template <typename BlockFn>
void for_sample_blocks(long nsamples, Exec exec, const BlockFn& fn) {
  const long nblocks = (nsamples + kSampleBlock - 1) / kSampleBlock;
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < nblocks; ++b) {
      fn(b, b * kSampleBlock, std::min(nsamples, (b + 1) * kSampleBlock));
    }
  } else {
    for (long b = 0; b < nblocks; ++b) {
      fn(b, b * kSampleBlock, std::min(nsamples, (b + 1) * kSampleBlock));
    }
  }
}

}  // namespace

std::vector<double> expected_cell_counts(const PosteriorSummary& summary,
                                         const ObservedData& data, long draws,
                                         std::uint64_t seed, Exec exec,
                                         bool exact) {
  if (summary.thinned.empty()) {
    throw std::invalid_argument("expected_cell_counts: no stored thinned samples");
  }
  if (!data.all_discrete()) {
    throw std::invalid_argument("expected_cell_counts: continuous column present");
  }
  const long cells = data.cell_count();
  const long S = static_cast<long>(summary.thinned.size());
  const auto marginals = empirical_marginals(data);

  const long nblocks = (S + kSampleBlock - 1) / kSampleBlock;
  std::vector<std::vector<double>> block_sums(
      nblocks, std::vector<double>(cells, 0.0));

  for_sample_blocks(S, exec, [&](long b, long begin, long end) {
    auto& acc = block_sums[b];
    for (long s = begin; s < end; ++s) {
      if (exact) {
        for (long c = 0; c < cells; ++c) {
          acc[c] += cell_probability_exact(cell_levels(c, data),
                                           summary.thinned[s], marginals, 1e-4,
                                           mix_seed(seed, s));
        }
      } else {
        Rng rng(mix_seed(seed, s));
        const auto probs =
            table_probabilities_mc(summary.thinned[s], marginals, draws, rng);
        for (long c = 0; c < cells; ++c) acc[c] += probs[c];
      }
    }
  });

  std::vector<double> out(cells, 0.0);
  for (long b = 0; b < nblocks; ++b) {
    for (long c = 0; c < cells; ++c) out[c] += block_sums[b][c];
  }
  const double scale = static_cast<double>(data.n) / static_cast<double>(S);
  for (long c = 0; c < cells; ++c) out[c] *= scale;
  return out;
}

double cramers_v(const Eigen::MatrixXd& joint, const std::vector<double>& marg1,
                 const std::vector<double>& marg2) {
  const int d1 = static_cast<int>(joint.rows());
  const int d2 = static_cast<int>(joint.cols());
  if (static_cast<int>(marg1.size()) != d1 ||
      static_cast<int>(marg2.size()) != d2) {
    throw std::invalid_argument("cramers_v: marginal sizes do not match table");
  }
  double sum = 0.0;
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d2; ++j) {
      if (marg1[i] <= 0.0 || marg2[j] <= 0.0) {
        throw std::invalid_argument("cramers_v: zero marginal cell");
      }
      sum += joint(i, j) * joint(i, j) / (marg1[i] * marg2[j]);
    }
  }
  const double v = (sum - 1.0) / (std::min(d1, d2) - 1);
  return std::max(v, 0.0);
}

BayesFactor PairAssociation::bayes_factor() const {
  BayesFactor bf;
  bf.above = above;
  bf.below = below;
  if (below == 0) {
    bf.infinite = true;
    bf.value = std::numeric_limits<double>::infinity();
  } else {
    bf.value = static_cast<double>(above) / static_cast<double>(below);
  }
  return bf;
}

namespace {

// Bivariate cell table for one pair at one sampled correlation, via the
// exact two-dimensional inclusion-exclusion on the copula CDF grid.
Eigen::MatrixXd bivariate_table(double rho, const EmpiricalMarginal& m1,
                                const EmpiricalMarginal& m2,
                                const std::vector<double>& q1,
                                const std::vector<double>& q2) {
  const int d1 = m1.levels();
  const int d2 = m2.levels();
  Eigen::MatrixXd grid(d1 + 1, d2 + 1);
  for (int i = 0; i <= d1; ++i) {
    for (int j = 0; j <= d2; ++j) {
      if (i == 0 || j == 0) {
        grid(i, j) = 0.0;
      } else {
        grid(i, j) = bivariate_normal_cdf(q1[i - 1], q2[j - 1], rho);
      }
    }
  }
  Eigen::MatrixXd table(d1, d2);
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d2; ++j) {
      table(i, j) = std::max(0.0, grid(i + 1, j + 1) - grid(i, j + 1) -
                                      grid(i + 1, j) + grid(i, j));
    }
  }
  return table;
}

}  // namespace

std::vector<PairAssociation> pair_associations(const PosteriorSummary& summary,
                                               const ObservedData& data,
                                               double epsilon, Exec exec) {
  if (epsilon <= 0.0) {
    throw std::invalid_argument("pair_associations: epsilon must be > 0");
  }
  if (summary.thinned.empty()) {
    throw std::invalid_argument("pair_associations: no stored thinned samples");
  }
  const auto marginals = empirical_marginals(data);

  // Quantiles of the cumulative marginal levels; shared by every sample.
  std::vector<std::vector<double>> quant(data.p);
  for (int v = 0; v < data.p; ++v) {
    quant[v].resize(marginals[v].levels());
    for (int l = 0; l < marginals[v].levels(); ++l) {
      quant[v][l] = std_normal_quantile(marginals[v].cum[l]);
    }
  }

  std::vector<std::pair<int, int>> pairs;
  for (int v1 = 0; v1 < data.p; ++v1) {
    for (int v2 = v1 + 1; v2 < data.p; ++v2) {
      if (data.cols[v1].kind != VarKind::Continuous &&
          data.cols[v2].kind != VarKind::Continuous) {
        pairs.emplace_back(v1, v2);
      }
    }
  }

  const long S = static_cast<long>(summary.thinned.size());
  const long nblocks = (S + kSampleBlock - 1) / kSampleBlock;
  std::vector<std::vector<double>> rho_sums(nblocks,
                                            std::vector<double>(pairs.size(), 0.0));
  std::vector<std::vector<long>> above(nblocks,
                                       std::vector<long>(pairs.size(), 0));

  for_sample_blocks(S, exec, [&](long b, long begin, long end) {
    for (long s = begin; s < end; ++s) {
      const Eigen::MatrixXd& ups = summary.thinned[s];
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [v1, v2] = pairs[k];
        const auto table = bivariate_table(ups(v1, v2), marginals[v1],
                                           marginals[v2], quant[v1], quant[v2]);
        // Levels with zero empirical mass carry no probability; drop them
        // so the marginals stay strictly positive.
        std::vector<int> keep1, keep2;
        for (int l = 0; l < marginals[v1].levels(); ++l) {
          if (marginals[v1].mass(l) > 0.0) keep1.push_back(l);
        }
        for (int l = 0; l < marginals[v2].levels(); ++l) {
          if (marginals[v2].mass(l) > 0.0) keep2.push_back(l);
        }
        double rho = 0.0;
        if (keep1.size() >= 2 && keep2.size() >= 2) {
          Eigen::MatrixXd sub(keep1.size(), keep2.size());
          std::vector<double> m1(keep1.size()), m2(keep2.size());
          for (std::size_t i = 0; i < keep1.size(); ++i) {
            m1[i] = marginals[v1].mass(keep1[i]);
            for (std::size_t j = 0; j < keep2.size(); ++j) {
              sub(i, j) = table(keep1[i], keep2[j]);
            }
          }
          for (std::size_t j = 0; j < keep2.size(); ++j) {
            m2[j] = marginals[v2].mass(keep2[j]);
          }
          rho = cramers_v(sub, m1, m2);
        }
        rho_sums[b][k] += rho;
        if (rho >= epsilon) ++above[b][k];
      }
    }
  });

  std::vector<PairAssociation> out(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[k].v1 = pairs[k].first;
    out[k].v2 = pairs[k].second;
    double sum = 0.0;
    long ab = 0;
    for (long b = 0; b < nblocks; ++b) {
      sum += rho_sums[b][k];
      ab += above[b][k];
    }
    out[k].rho_mean = sum / static_cast<double>(S);
    out[k].above = ab;
    out[k].below = S - ab;
  }
  return out;
}

std::vector<VariableImportance> degree_and_association_summary(
    const PosteriorSummary& summary,
    const std::vector<PairAssociation>& associations, double bf_threshold) {
  require_samples(summary);
  const Eigen::MatrixXd probs = edge_inclusion_probs(summary);
  std::vector<VariableImportance> out(summary.p);
  for (int v = 0; v < summary.p; ++v) {
    out[v].expected_degree = probs.row(v).sum();
  }
  for (const auto& a : associations) {
    const BayesFactor bf = a.bayes_factor();
    const bool keep = bf.infinite || bf.value >= bf_threshold;
    if (!keep) continue;
    out[a.v1].cumulative_association += a.rho_mean;
    out[a.v2].cumulative_association += a.rho_mean;
  }
  return out;
}

}  // namespace cggm
