#include "cggm/gwishart.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cggm/chol.hpp"
#include "cggm/rng.hpp"

namespace cggm {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kLog2Pi = 1.8378770664093454836;

double log_multi_gamma(int p, double a) {
  double out = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int i = 0; i < p; ++i) out += std::lgamma(a - 0.5 * i);
  return out;
}

void require_prior_params(double delta, const Eigen::MatrixXd& D) {
  if (delta <= 2.0) {
    throw std::invalid_argument("gwishart: delta must exceed 2");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gwishart: D must be positive definite");
  }
}

}  // namespace

double log_density_unnorm(const Eigen::MatrixXd& K, double delta,
                          const Eigen::MatrixXd& D, const UndirectedGraph& g) {
  const ConeCheck chk = in_cone(K, g);
  if (!chk) {
    throw std::invalid_argument("log_density_unnorm: K outside cone: " +
                                chk.reason);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double trace_kd = (K.array() * D.array()).sum();
  return 0.5 * (delta - 2.0) * log_det - 0.5 * trace_kd;
}

double log_norm_complete(int p, double delta, const Eigen::MatrixXd& D) {
  require_prior_params(delta, D);
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  const double log_det_d =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double a = 0.5 * (delta + p - 1);
  return a * p * kLog2 + log_multi_gamma(p, a) - a * log_det_d;
}

namespace {

constexpr long kBlock = 256;

// Graph structure flattened for the sampling loop: free positions with
// their chi degrees, non-free positions in completion order.
struct McPlan {
  int p;
  std::vector<std::pair<int, int>> free;
  std::vector<double> chi_dof;                  // per free element; 0 = normal
  std::vector<std::pair<int, int>> nonfree;     // column-major completion order
  std::vector<std::uint8_t> is_free;            // p*p row-major mask

  McPlan(const UndirectedGraph& g, double delta) : p(g.vertex_count()) {
    free = free_elements(g);
    is_free.assign(p * p, 0);
    for (const auto& [v1, v2] : free) is_free[v1 * p + v2] = 1;
    for (const auto& [v1, v2] : free) {
      chi_dof.push_back(v1 == v2 ? delta + g.later_degree(v1) : 0.0);
    }
    for (int v2 = 1; v2 < p; ++v2) {
      for (int v1 = 0; v1 < v2; ++v1) {
        if (!is_free[v1 * p + v2]) nonfree.emplace_back(v1, v2);
      }
    }
  }
};

// Fills log-weights for one block of samples; phi is zeroed scratch.
void mc_block(const McPlan& plan, long block_index, long begin, long end,
              std::uint64_t seed, Eigen::MatrixXd& phi, double* weights) {
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(block_index)));
  for (long i = begin; i < end; ++i) {
    for (std::size_t k = 0; k < plan.free.size(); ++k) {
      const auto [v1, v2] = plan.free[k];
      phi(v1, v2) = plan.chi_dof[k] > 0.0 ? rng.chi(plan.chi_dof[k])
                                          : rng.normal();
    }
    double ssq = 0.0;
    for (const auto& [v1, v2] : plan.nonfree) {
      double value = 0.0;
      if (v1 > 0) {
        double s = 0.0;
        for (int v = 0; v < v1; ++v) s += phi(v, v1) * phi(v, v2);
        value = -s / phi(v1, v1);
      }
      phi(v1, v2) = value;
      ssq += value * value;
    }
    weights[i] = -0.5 * ssq;
  }
}

}  // namespace

LogNormEstimate log_norm_mc(const UndirectedGraph& g, double delta,
                            long mc_samples, std::uint64_t seed, Exec exec) {
  if (mc_samples < 1) {
    throw std::invalid_argument("log_norm_mc: need at least one sample");
  }
  if (delta <= 2.0) throw std::invalid_argument("log_norm_mc: delta must exceed 2");

  const int p = g.vertex_count();
  double det_part = 0.5 * g.edge_count() * kLog2Pi;
  for (int v = 0; v < p; ++v) {
    const double a = 0.5 * (delta + g.later_degree(v));
    det_part += a * kLog2 + std::lgamma(a);
  }

  LogNormEstimate est;
  est.samples = mc_samples;

  // Complete graphs have no non-free entries: the expectation term is
  // exactly one and the estimate is the closed form.
  if (g.edge_count() == g.pair_count()) {
    est.value = det_part;
    return est;
  }

  const McPlan plan(g, delta);
  std::vector<double> weights(mc_samples);
  const long nblocks = (mc_samples + kBlock - 1) / kBlock;

  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(p, p);
#pragma omp for schedule(static)
      for (long b = 0; b < nblocks; ++b) {
        mc_block(plan, b, b * kBlock, std::min(mc_samples, (b + 1) * kBlock),
                 seed, phi, weights.data());
      }
    }
  } else {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(p, p);
    for (long b = 0; b < nblocks; ++b) {
      mc_block(plan, b, b * kBlock, std::min(mc_samples, (b + 1) * kBlock),
               seed, phi, weights.data());
    }
  }

  double wmax = weights[0];
  for (double w : weights) wmax = std::max(wmax, w);
  double mean = 0.0, m2 = 0.0;
  long cnt = 0;
  for (double w : weights) {
    const double y = std::exp(w - wmax);
    ++cnt;
    const double d = y - mean;
    mean += d / static_cast<double>(cnt);
    m2 += d * (y - mean);
  }
  est.value = det_part + wmax + std::log(mean);
  if (mc_samples > 1) {
    const double sd = std::sqrt(m2 / (mc_samples - 1.0));
    est.std_error = sd / (mean * std::sqrt(static_cast<double>(mc_samples)));
  }
  return est;
}

LogNormEstimate log_norm_mc(const UndirectedGraph& g, double delta,
                            const Eigen::MatrixXd& D, long mc_samples,
                            std::uint64_t seed, Exec exec) {
  require_prior_params(delta, D);
  if (!D.isIdentity(1e-12)) {
    throw std::invalid_argument(
        "log_norm_mc: only D = I is supported; prior constants never need "
        "another D here");
  }
  return log_norm_mc(g, delta, mc_samples, seed, exec);
}

double NormConstCache::log_norm(const UndirectedGraph& g) {
  const std::string key = g.key();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = table_.find(key);
    if (it != table_.end()) {
      ++hits_;
      return it->second;
    }
  }
  // Computed outside the lock; concurrent duplicates produce the same value
  // because the seed depends only on (master seed, key).
  const std::uint64_t seed = mix_seed(
      master_seed_,
      hash_bytes(reinterpret_cast<const unsigned char*>(key.data()), key.size()));
  const double value = log_norm_mc(g, delta_, mc_samples_, seed, Exec::Serial).value;
  std::lock_guard<std::mutex> lock(mu_);
  table_.emplace(key, value);
  return value;
}

std::size_t NormConstCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return table_.size();
}

}  // namespace cggm
