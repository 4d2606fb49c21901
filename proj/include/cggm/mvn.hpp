#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace cggm {

// Standard normal CDF. Accurate to full double precision via erfc.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

// Standard normal quantile, Wichura's AS 241 (PPND16), |error| ~ 1e-15.
// Conventions: u <= 0 -> -inf, u >= 1 -> +inf.
double std_normal_quantile(double u);

// Bivariate standard normal CDF P(X <= h, Y <= k) for correlation rho.
// Gauss-Legendre evaluation of Drezner-Wesolowsky's single integral, with
// the transformed form for |rho| > 0.925; absolute error below 5e-15.
double bivariate_normal_cdf(double h, double k, double rho);

struct MvnResult {
  double prob = 0.0;
  double error = 0.0;   // conservative (3 sigma) error estimate
  bool converged = true;
  bool clamped = false;  // Sigma needed eigenvalue clamping
  operator double() const { return prob; }
};

// P(Z <= upper) for Z ~ N(0, Sigma); entries of upper may be +-inf.
// Separation-of-variables transform integrated with a randomly shifted
// Richtmyer sequence; point count grows until the error estimate meets tol.
// Deterministic for a given seed.
MvnResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& Sigma,
                  double tol = 1e-4, std::uint64_t seed = 0x5EEDCDFull);

// Gaussian copula C(u | Sigma) = Phi_p(quantile(u_1),...,quantile(u_p) | Sigma).
// Components equal to 1 marginalize out; any component equal to 0 gives 0.
MvnResult gaussian_copula(const Eigen::VectorXd& u, const Eigen::MatrixXd& Sigma,
                          double tol = 1e-4, std::uint64_t seed = 0x5EEDC09ull);

// Lower Cholesky factor of Sigma; near-singular matrices get their
// eigenvalues clamped at 1e-12 first (posterior correlation samples can
// approach singularity). *clamped reports whether that happened.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& Sigma, bool* clamped);

}  // namespace cggm
