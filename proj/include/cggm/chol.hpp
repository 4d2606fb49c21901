#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cggm/graph.hpp"

namespace cggm {

// Free positions of the upper-triangular Cholesky factor: the diagonal in
// vertex order, then the edge pairs (v1 < v2) in row-major order. All
// indices 0-based.
std::vector<std::pair<int, int>> free_elements(const UndirectedGraph& g);

// Fills the non-free entries of an upper-triangular phi so that phi'*phi
// lands in the cone of G: first-row non-edges are zero, and for v1 >= 1,
// phi[v1][v2] = -(1/phi[v1][v1]) * sum_{v<v1} phi[v][v1]*phi[v][v2].
// Columns left of from_col are assumed already consistent.
void complete_in_place(Eigen::MatrixXd& phi, const UndirectedGraph& g,
                       int from_col = 0);

// Builds the completed factor from values on free_elements(g).
// Throws if a diagonal value is not strictly positive.
Eigen::MatrixXd complete(const std::vector<double>& free_values,
                         const UndirectedGraph& g);

// K = phi' * phi.
Eigen::MatrixXd assemble_precision(const Eigen::MatrixXd& phi);

// log of the Jacobian |d K_free / d phi_free| = 2^p prod_v phi_vv^(d_v + 1).
double log_jacobian(const Eigen::MatrixXd& phi, const UndirectedGraph& g);

// Correlation matrix of K^{-1}: entries (K^-1)_ij / sqrt((K^-1)_ii (K^-1)_jj).
Eigen::MatrixXd correlation_from_precision(const Eigen::MatrixXd& K);

struct ConeCheck {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

// Symmetric within tol, positive definite (Cholesky succeeds), and zero at
// every non-edge within tol.
ConeCheck in_cone(const Eigen::MatrixXd& K, const UndirectedGraph& g,
                  double tol = 1e-10);

// Free entries of the upper Cholesky factor of K, ordered as
// free_elements(g). K must lie in the cone of g for the round trip
// complete(extract_free(K)) to reproduce chol(K).
std::vector<double> extract_free(const Eigen::MatrixXd& K,
                                 const UndirectedGraph& g);

}  // namespace cggm
