#include "cggm/mvn.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "cggm/rng.hpp"

namespace cggm {

double std_normal_quantile(double u) {
  if (u <= 0.0) return -std::numeric_limits<double>::infinity();
  if (u >= 1.0) return std::numeric_limits<double>::infinity();

  const double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }

  double r = (q < 0.0) ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1], 20 points (half listed, symmetric).
constexpr double kGlx[10] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
    0.9931285991850949};
constexpr double kGlw[10] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
    0.0176140071391521};

constexpr double kTwoPi = 6.283185307179586476925286766559;

double bvn_moderate_rho(double h, double k, double rho) {
  // Phi2(h,k,rho) = Phi(h)Phi(k) + (1/2pi) int_0^asin(rho)
  //   exp(-(h^2+k^2-2hk sin t)/(2 cos^2 t)) dt
  const double hk = h * k;
  const double hs = 0.5 * (h * h + k * k);
  const double asr = std::asin(rho);
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      const double sn = std::sin(0.5 * asr * (1.0 + sgn * kGlx[i]));
      sum += kGlw[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
  }
  sum *= 0.5 * asr / kTwoPi;
  return std_normal_cdf(h) * std_normal_cdf(k) + sum;
}

double bvn_extreme_rho(double h, double k, double rho) {
  // Genz's transformed integrand for |rho| near 1: integrate over
  // s = sqrt(1 - rho^2) to tame the singularity, then add the limit term.
  // Works in terms of the upper-orthant L(h,k) = P(X > h, Y > k).
  double bvn = 0.0;
  const double s = (rho > 0.0) ? 1.0 : -1.0;
  double hh = -h;
  double kk = -k * s;
  const double hk = hh * kk;
  const double as = (1.0 - rho) * (1.0 + rho);
  const double a = std::sqrt(as);
  const double bs = (hh - kk) * (hh - kk);
  const double c = (4.0 - hk) / 8.0;
  const double d = (12.0 - hk) / 16.0;
  const double asr0 = -0.5 * (bs / as + hk);
  if (asr0 > -100.0) {
    bvn = a * std::exp(asr0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
           c * d * as * as / 5.0);
  }
  if (-hk < 100.0) {
    const double b = std::sqrt(bs);
    bvn -= std::exp(-0.5 * hk) * std::sqrt(kTwoPi) * std_normal_cdf(-b / a) *
           b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
  }
  // Remaining integral over [0, a] by 20-point Gauss-Legendre.
  const double half = 0.5 * a;
  for (int i = 0; i < 10; ++i) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      const double x = half * (1.0 + sgn * kGlx[i]);
      const double xs = x * x;
      const double rs = std::sqrt(1.0 - xs);
      const double asr = -0.5 * (bs / xs + hk);
      if (asr > -100.0) {
        bvn += half * kGlw[i] * std::exp(asr) *
               (std::exp(-0.5 * hk * (1.0 - rs) / (1.0 + rs)) / rs -
                (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
  }
  bvn /= -kTwoPi;
  // Add the |rho| = 1 limit; the negative-rho flip undoes itself here, and
  // the result is already P(X > -h, Y > -k) = Phi2(h, k).
  if (rho > 0.0) {
    bvn += std_normal_cdf(-std::max(hh, kk));
  } else {
    bvn = -bvn;
    if (kk > hh) {
      bvn += std_normal_cdf(kk) - std_normal_cdf(hh);
    }
  }
  return bvn;
}

}  // namespace

double bivariate_normal_cdf(double h, double k, double rho) {
  if (std::isnan(h) || std::isnan(k)) throw std::invalid_argument("bvn: NaN limit");
  if (rho < -1.0 || rho > 1.0) throw std::invalid_argument("bvn: |rho| > 1");
  if (std::isinf(h) || std::isinf(k)) {
    if (h == -std::numeric_limits<double>::infinity() ||
        k == -std::numeric_limits<double>::infinity()) {
      return 0.0;
    }
    if (std::isinf(h) && std::isinf(k)) return 1.0;
    return std::isinf(h) ? std_normal_cdf(k) : std_normal_cdf(h);
  }
  if (rho == 0.0) return std_normal_cdf(h) * std_normal_cdf(k);
  if (rho == 1.0) return std_normal_cdf(std::min(h, k));
  if (rho == -1.0) {
    const double v = std_normal_cdf(h) + std_normal_cdf(k) - 1.0;
    return std::max(v, 0.0);
  }
  if (std::fabs(rho) <= 0.925) return bvn_moderate_rho(h, k, rho);
  return bvn_extreme_rho(h, k, rho);
}

namespace {

// First 32 primes; sqrt(prime) fractional parts are the Richtmyer generators.
constexpr int kPrimes[32] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                             37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                             83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

}  // namespace

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& Sigma, bool* clamped) {
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() == Eigen::Success) {
    *clamped = false;
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sigma);
  if (es.eigenvalues().minCoeff() < -1e-8 * es.eigenvalues().cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("psd_cholesky: matrix is not positive semidefinite");
  }
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-12);
  Eigen::MatrixXd fixed =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  *clamped = true;
  Eigen::LLT<Eigen::MatrixXd> llt2(fixed);
  if (llt2.info() != Eigen::Success) {
    throw std::runtime_error("psd_cholesky: factorization failed after clamping");
  }
  return llt2.matrixL();
}

MvnResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& Sigma,
                  double tol, std::uint64_t seed) {
  const auto inf = std::numeric_limits<double>::infinity();
  const int p_in = static_cast<int>(upper.size());
  if (Sigma.rows() != p_in || Sigma.cols() != p_in) {
    throw std::invalid_argument("mvn_cdf: dimension mismatch");
  }

  // -inf limit forces probability zero; +inf limits marginalize out.
  std::vector<int> keep;
  keep.reserve(p_in);
  for (int i = 0; i < p_in; ++i) {
    if (upper[i] == -inf) return {0.0, 0.0, true, false};
    if (upper[i] < inf) keep.push_back(i);
  }
  const int p = static_cast<int>(keep.size());
  if (p == 0) return {1.0, 0.0, true, false};
  if (p == 1) return {std_normal_cdf(upper[keep[0]]), 0.0, true, false};
  if (p == 2) {
    const double r = Sigma(keep[0], keep[1]) /
                     std::sqrt(Sigma(keep[0], keep[0]) * Sigma(keep[1], keep[1]));
    const double h = upper[keep[0]] / std::sqrt(Sigma(keep[0], keep[0]));
    const double k = upper[keep[1]] / std::sqrt(Sigma(keep[1], keep[1]));
    return {bivariate_normal_cdf(h, k, r), 1e-14, true, false};
  }

  // Order variables by increasing truncation mass (smallest limit first);
  // the early coordinates then absorb most of the variance.
  std::vector<int> order(keep.begin(), keep.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return upper[a] / std::sqrt(Sigma(a, a)) < upper[b] / std::sqrt(Sigma(b, b));
  });

  Eigen::MatrixXd S(p, p);
  Eigen::VectorXd b(p);
  for (int i = 0; i < p; ++i) {
    b[i] = upper[order[i]];
    for (int j = 0; j < p; ++j) S(i, j) = Sigma(order[i], order[j]);
  }

  MvnResult res;
  Eigen::MatrixXd L = psd_cholesky(S, &res.clamped);

  const int ndim = p - 1;
  std::vector<double> q(ndim);
  for (int i = 0; i < ndim; ++i) {
    const double s = std::sqrt(static_cast<double>(kPrimes[i % 32]));
    q[i] = s - std::floor(s);
  }

  constexpr int kShifts = 10;
  constexpr long kMaxPoints = 1 << 21;
  long npts = 1 << 11;
  Rng shift_rng(seed);

  std::vector<double> y(ndim);
  const double e1 = std_normal_cdf(b[0] / L(0, 0));

  for (;;) {
    double mean = 0.0, m2 = 0.0;
    Rng rng = shift_rng;  // same shifts for each refinement level
    for (int sh = 0; sh < kShifts; ++sh) {
      std::vector<double> delta(ndim);
      for (int i = 0; i < ndim; ++i) delta[i] = rng.uniform();
      double acc = 0.0;
      for (long j = 1; j <= npts; ++j) {
        double prod = e1;
        double w_prev = prod;
        for (int i = 0; i < ndim && prod > 0.0; ++i) {
          double w = j * q[i] + delta[i];
          w -= std::floor(w);
          w = std::fabs(2.0 * w - 1.0);  // baker's transform
          const double u = std::min(std::max(w * w_prev, 1e-300), 1.0 - 1e-16);
          y[i] = std_normal_quantile(u);
          double t = b[i + 1];
          for (int m = 0; m <= i; ++m) t -= L(i + 1, m) * y[m];
          w_prev = std_normal_cdf(t / L(i + 1, i + 1));
          prod *= w_prev;
        }
        acc += (prod - acc) / static_cast<double>(j);
      }
      const double dmean = (acc - mean) / static_cast<double>(sh + 1);
      mean += dmean;
      m2 += static_cast<double>(sh) * dmean * (acc - mean);
    }
    res.prob = mean;
    res.error = 3.0 * std::sqrt(m2 / (kShifts * (kShifts - 1.0)));
    if (res.error <= tol) {
      res.converged = true;
      return res;
    }
    if (2 * npts > kMaxPoints) {
      res.converged = false;
      return res;
    }
    npts *= 2;
  }
}

MvnResult gaussian_copula(const Eigen::VectorXd& u, const Eigen::MatrixXd& Sigma,
                          double tol, std::uint64_t seed) {
  const int p = static_cast<int>(u.size());
  Eigen::VectorXd upper(p);
  for (int i = 0; i < p; ++i) {
    if (u[i] < 0.0 || u[i] > 1.0) {
      throw std::invalid_argument("gaussian_copula: u outside [0,1]");
    }
    if (u[i] == 0.0) return {0.0, 0.0, true, false};
    upper[i] = std_normal_quantile(u[i]);  // u = 1 maps to +inf
  }
  return mvn_cdf(upper, Sigma, tol, seed);
}

}  // namespace cggm
