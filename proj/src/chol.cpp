#include "cggm/chol.hpp"

#include <cmath>
#include <stdexcept>

namespace cggm {

std::vector<std::pair<int, int>> free_elements(const UndirectedGraph& g) {
  const int p = g.vertex_count();
  std::vector<std::pair<int, int>> out;
  out.reserve(p + g.edge_count());
  for (int v = 0; v < p; ++v) out.emplace_back(v, v);
  for (int v1 = 0; v1 < p; ++v1) {
    for (int v2 = v1 + 1; v2 < p; ++v2) {
      if (g.has_edge(v1, v2)) out.emplace_back(v1, v2);
    }
  }
  return out;
}

void complete_in_place(Eigen::MatrixXd& phi, const UndirectedGraph& g,
                       int from_col) {
  const int p = g.vertex_count();
  for (int v2 = std::max(from_col, 1); v2 < p; ++v2) {
    if (!g.has_edge(0, v2)) phi(0, v2) = 0.0;
    for (int v1 = 1; v1 < v2; ++v1) {
      if (g.has_edge(v1, v2)) continue;
      double s = 0.0;
      for (int v = 0; v < v1; ++v) s += phi(v, v1) * phi(v, v2);
      phi(v1, v2) = -s / phi(v1, v1);
    }
  }
}

Eigen::MatrixXd complete(const std::vector<double>& free_values,
                         const UndirectedGraph& g) {
  const auto free = free_elements(g);
  if (free_values.size() != free.size()) {
    throw std::invalid_argument("complete: expected " +
                                std::to_string(free.size()) + " free values");
  }
  const int p = g.vertex_count();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t i = 0; i < free.size(); ++i) {
    const auto [v1, v2] = free[i];
    if (v1 == v2 && free_values[i] <= 0.0) {
      throw std::invalid_argument("complete: diagonal free value must be > 0");
    }
    phi(v1, v2) = free_values[i];
  }
  complete_in_place(phi, g);
  return phi;
}

Eigen::MatrixXd assemble_precision(const Eigen::MatrixXd& phi) {
  return phi.transpose() * phi;
}

double log_jacobian(const Eigen::MatrixXd& phi, const UndirectedGraph& g) {
  const int p = g.vertex_count();
  double out = p * std::log(2.0);
  for (int v = 0; v < p; ++v) {
    if (phi(v, v) <= 0.0) {
      throw std::invalid_argument("log_jacobian: nonpositive diagonal");
    }
    out += (g.later_degree(v) + 1) * std::log(phi(v, v));
  }
  return out;
}

Eigen::MatrixXd correlation_from_precision(const Eigen::MatrixXd& K) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("correlation_from_precision: K not positive definite");
  }
  const int p = static_cast<int>(K.rows());
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd ups = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  ups.diagonal().setOnes();
  // Symmetrize away solver round-off.
  return 0.5 * (ups + ups.transpose());
}

ConeCheck in_cone(const Eigen::MatrixXd& K, const UndirectedGraph& g,
                  double tol) {
  const int p = g.vertex_count();
  if (K.rows() != p || K.cols() != p) {
    return {false, "dimension mismatch"};
  }
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (std::fabs(K(i, j) - K(j, i)) > tol) {
        return {false, "not symmetric at (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ")"};
      }
      if (!g.has_edge(i, j) && std::fabs(K(i, j)) > tol) {
        return {false, "nonzero at non-edge (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ")"};
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    return {false, "not positive definite"};
  }
  return {};
}

std::vector<double> extract_free(const Eigen::MatrixXd& K,
                                 const UndirectedGraph& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("extract_free: K not positive definite");
  }
  Eigen::MatrixXd phi = llt.matrixU();
  std::vector<double> out;
  for (const auto& [v1, v2] : free_elements(g)) out.push_back(phi(v1, v2));
  return out;
}

}  // namespace cggm
