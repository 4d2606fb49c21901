#include <doctest.h>

#include <cmath>

#include "cggm/gwishart.hpp"
#include "cggm/rng.hpp"
#include "oracles.hpp"

using namespace cggm;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("unnormalized log density") {
  const int p = 3;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
  const auto full = UndirectedGraph::complete(p);
  CHECK(log_density_unnorm(eye, 3.0, eye, full) == doctest::Approx(-p / 2.0));

  const Eigen::MatrixXd two = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  const auto full2 = UndirectedGraph::complete(2);
  CHECK(log_density_unnorm(two, 3.0, Eigen::MatrixXd::Identity(2, 2), full2) ==
        doctest::Approx(std::log(2.0) - 2.0));

  // Posterior form is the same kernel at shifted parameters.
  const double post = log_density_unnorm(eye, 3.0 + 10.0, eye + 2.0 * eye, full);
  CHECK(post == doctest::Approx(0.5 * (13.0 - 2.0) * 0.0 - 0.5 * 3.0 * p));

  Eigen::MatrixXd off(2, 2);
  off << 1.0, 0.5, 0.5, 1.0;
  CHECK_THROWS(log_density_unnorm(off, 3.0, Eigen::MatrixXd::Identity(2, 2),
                                  UndirectedGraph(2)));
}

TEST_CASE("complete-graph constant closed forms") {
  const Eigen::MatrixXd eye2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK(log_norm_complete(2, 3.0, eye2) == doctest::Approx(std::log(8.0 * kPi)).epsilon(1e-14));

  // p = 1 from the direct 1-d integral: int k^{1/2} e^{-k/2} dk = sqrt(2 pi).
  const Eigen::MatrixXd eye1 = Eigen::MatrixXd::Identity(1, 1);
  CHECK(log_norm_complete(1, 3.0, eye1) ==
        doctest::Approx(0.5 * std::log(2.0 * kPi)).epsilon(1e-14));

  // D -> cD scales I_G by c^{-(delta+p-1)p/2}.
  const double c = 2.5;
  const int p = 3;
  const double delta = 3.4;
  const Eigen::MatrixXd eye3 = Eigen::MatrixXd::Identity(3, 3);
  const double base = log_norm_complete(p, delta, eye3);
  const double scaled = log_norm_complete(p, delta, c * eye3);
  CHECK(scaled - base ==
        doctest::Approx(-0.5 * (delta + p - 1) * p * std::log(c)).epsilon(1e-12));

  CHECK_THROWS(log_norm_complete(2, 1.5, eye2));
}

TEST_CASE("mc estimator: complete graphs recover the closed form exactly") {
  for (int p = 2; p <= 6; ++p) {
    const auto g = UndirectedGraph::complete(p);
    const auto est = log_norm_mc(g, 3.0, 100, 42);
    const double want =
        log_norm_complete(p, 3.0, Eigen::MatrixXd::Identity(p, p));
    CHECK(est.value == doctest::Approx(want).epsilon(1e-12));
    CHECK(est.std_error == 0.0);
  }
}

TEST_CASE("mc estimator: empty graph is analytic") {
  for (int p : {1, 3, 5}) {
    const UndirectedGraph g(p);
    const auto est = log_norm_mc(g, 3.0, 50, 7);
    CHECK(est.value == doctest::Approx(p * 0.5 * std::log(2.0 * kPi)).epsilon(1e-12));
  }
}

TEST_CASE("mc estimator: nontrivial graph matches quadrature") {
  // p=3 with edges {(1,2),(1,3)}: the only graph shape on 3 vertices whose
  // completion produces a nonzero non-free entry.
  const auto vee = make_graph(3, {{1, 2}, {1, 3}});
  const auto est = log_norm_mc(vee, 3.0, 100000, 1234);
  const double want = oracles::log_norm_quadrature_p3_vee();
  CHECK(std::fabs(est.value - want) < 3.0 * est.std_error + 1e-6);
  CHECK(std::fabs(est.value - want) / std::fabs(want) < 0.01);
  CHECK(est.std_error > 0.0);
  CHECK(est.std_error < 0.01);
}

TEST_CASE("mc estimator: deterministic and exec-independent") {
  const auto g = make_graph(4, {{1, 2}, {1, 3}, {2, 4}});
  const auto a = log_norm_mc(g, 3.0, 4096, 99, Exec::Parallel);
  const auto b = log_norm_mc(g, 3.0, 4096, 99, Exec::Parallel);
  const auto c = log_norm_mc(g, 3.0, 4096, 99, Exec::Serial);
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.std_error == c.std_error);
  const auto d = log_norm_mc(g, 3.0, 4096, 100);
  CHECK(a.value != d.value);
}

TEST_CASE("mc estimator: standard error shrinks like sqrt(n)") {
  const auto vee = make_graph(3, {{1, 2}, {1, 3}});
  const auto small = log_norm_mc(vee, 3.0, 4000, 5);
  const auto big = log_norm_mc(vee, 3.0, 16000, 5);
  CHECK(big.std_error < small.std_error);
  CHECK(big.std_error == doctest::Approx(0.5 * small.std_error).epsilon(0.35));
}

TEST_CASE("mc estimator: neighbor prior ratios are finite and positive") {
  Rng rng(61);
  for (int rep = 0; rep < 10; ++rep) {
    const auto g = random_graph(5, rng);
    const int v1 = static_cast<int>(rng.below(5));
    const int v2 = (v1 + 1 + static_cast<int>(rng.below(4))) % 5;
    const auto h = g.toggled(std::min(v1, v2), std::max(v1, v2));
    const double ratio = log_norm_mc(g, 3.0, 2000, rep).value -
                         log_norm_mc(h, 3.0, 2000, rep + 1000).value;
    CHECK(std::isfinite(ratio));
  }
}

TEST_CASE("mc estimator: non-identity D is rejected") {
  const auto g = make_graph(2, {{1, 2}});
  Eigen::MatrixXd d(2, 2);
  d << 2.0, 0.0, 0.0, 1.0;
  CHECK_THROWS(log_norm_mc(g, 3.0, d, 100, 1));
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  CHECK_NOTHROW(log_norm_mc(g, 3.0, eye, 100, 1));
}

TEST_CASE("normalizing-constant cache") {
  NormConstCache cache(3.0, 1000, 424242);
  const auto g = make_graph(4, {{1, 2}, {3, 4}});
  const double first = cache.log_norm(g);
  const double second = cache.log_norm(g);
  CHECK(first == second);
  CHECK(cache.size() == 1);
  CHECK(cache.hits() == 1);

  // Same value with or without the cache, given the derived seed contract.
  NormConstCache other(3.0, 1000, 424242);
  CHECK(other.log_norm(g) == first);

  const auto h = g.toggled(0, 2);
  CHECK(cache.log_norm(h) != first);
  CHECK(cache.size() == 2);
}
