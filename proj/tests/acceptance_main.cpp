// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fail. Run from the repository root (data/rochdale.tab is read relative to
// it). The Rochdale reproduction dominates the runtime; expect on the order
// of ten minutes on two cores.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "cggm/chol.hpp"
#include "cggm/estimators.hpp"
#include "cggm/gwishart.hpp"
#include "cggm/io.hpp"
#include "cggm/sampler.hpp"
#include "oracles.hpp"

using namespace cggm;

namespace {

int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[768];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

ObservedData prior_only(int p) {
  ObservedData data;
  data.n = 0;
  data.p = p;
  for (int v = 0; v < p; ++v) {
    ColumnInfo col;
    col.kind = VarKind::Binary;
    col.d = 2;
    col.index_levels();
    data.cols.push_back(col);
    data.var_names.push_back("x" + std::to_string(v + 1));
  }
  return data;
}

// ---------------------------------------------------------------------------
// 1. Normalizing constants: closed form on complete graphs for p = 2..6;
//    quadrature oracles for both p=2 graphs and the p=3 path (the vee is
//    included as the only p=3 shape with a nonzero completion term).
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  for (int p = 2; p <= 6; ++p) {
    const auto est =
        log_norm_mc(UndirectedGraph::complete(p), 3.0, 100000, 1000 + p);
    const double want =
        log_norm_complete(p, 3.0, Eigen::MatrixXd::Identity(p, p));
    const double rel = std::fabs(est.value - want) / std::fabs(want);
    if (rel > 0.01) {
      ok = false;
      detail += fmt("complete p=%d rel err %.2e; ", p, rel);
    }
  }

  struct Case {
    const char* name;
    UndirectedGraph g;
    double want;
  };
  const std::vector<Case> cases = {
      {"p2 empty", UndirectedGraph(2), oracles::log_norm_quadrature_p2_empty()},
      {"p2 complete", UndirectedGraph::complete(2),
       oracles::log_norm_quadrature_p2_complete()},
      {"p3 path", make_graph(3, {{1, 2}, {2, 3}}),
       oracles::log_norm_quadrature_p3_path()},
      {"p3 vee", make_graph(3, {{1, 2}, {1, 3}}),
       oracles::log_norm_quadrature_p3_vee()},
  };
  for (const auto& c : cases) {
    const auto est = log_norm_mc(c.g, 3.0, 100000, 77);
    const double rel = std::fabs(est.value - c.want) / std::fabs(c.want);
    if (rel > 0.01) {
      ok = false;
      detail += fmt("%s rel err %.2e; ", c.name, rel);
    }
  }

  const double secs = seconds_since(t0);
  if (secs > 60.0) {
    ok = false;
    detail += fmt("runtime %.1fs exceeds 60s; ", secs);
  }
  if (detail.empty()) detail = fmt("all constants within 1%% (%.1fs)", secs);
  report("criterion 1: normalizing constants", ok, detail);
}

// ---------------------------------------------------------------------------
// 2. Completion round trip and analytic Jacobian vs finite differences on
//    100 random instances with p <= 4.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240);
  double max_round = 0.0, max_jac = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 2 + static_cast<int>(rng.below(3));
    const auto g = random_graph(p, rng);
    std::vector<double> vals;
    for (const auto& [v1, v2] : free_elements(g)) {
      vals.push_back(v1 == v2 ? 0.4 + std::fabs(rng.normal()) : rng.normal());
    }
    const auto phi = complete(vals, g);
    const auto K = assemble_precision(phi);
    const auto back = complete(extract_free(K, g), g);
    max_round = std::max(max_round, (back - phi).cwiseAbs().maxCoeff());

    const double analytic = log_jacobian(phi, g);
    const double fd = oracles::fd_log_jacobian(g, vals);
    max_jac = std::max(max_jac, std::fabs(analytic - fd) / std::fabs(fd));
  }
  const bool ok = max_round <= 1e-10 && max_jac <= 1e-4;
  report("criterion 2: completion/jacobian", ok,
         fmt("round trip %.2e (<=1e-10), jacobian rel %.2e (<=1e-4), %.1fs",
             max_round, max_jac, seconds_since(t0)));
}

// ---------------------------------------------------------------------------
// 3. Prior recovery: with no data the posterior over the 8 graphs on p=3 is
//    uniform. Frequencies use every post-burn-in iteration; the GOF test
//    uses every 25th draw so the chi-square calibration is not distorted by
//    the chain's autocorrelation.
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = prior_only(3);

  SamplerConfig config;
  config.iterations = 210000;
  config.burn_in = 10000;
  config.master_seed = 20250809;
  NormConstCache cache(config.delta, config.nc_samples, config.master_seed);

  std::vector<long> freq(8, 0);
  std::vector<long> thinned(8, 0);
  long post = 0, thin_count = 0;
  IterationCallback cb = [&](const ChainState& st) {
    if (st.iteration < config.burn_in) return;
    int code = 0;
    code |= st.graph.has_edge(0, 1) ? 1 : 0;
    code |= st.graph.has_edge(0, 2) ? 2 : 0;
    code |= st.graph.has_edge(1, 2) ? 4 : 0;
    ++freq[code];
    ++post;
    if ((st.iteration - config.burn_in) % 25 == 0) {
      ++thinned[code];
      ++thin_count;
    }
  };
  run_chain(config, data, 0, cache, &cb);

  double max_dev = 0.0;
  for (int code = 0; code < 8; ++code) {
    const double f = static_cast<double>(freq[code]) / post;
    max_dev = std::max(max_dev, std::fabs(f - 0.125));
  }
  const double expect = thin_count / 8.0;
  double x2 = 0.0;
  for (long c : thinned) x2 += (c - expect) * (c - expect) / expect;
  const double pval = oracles::chi2_sf(x2, 7);

  const double secs = seconds_since(t0);
  const bool ok = (pval > 0.01) && (max_dev < 0.015) && (secs < 120.0);
  report("criterion 3: prior recovery", ok,
         fmt("max |freq-0.125| = %.4f (<0.015), GOF X2 = %.2f p = %.3f (>0.01) "
             "on %ld thinned draws, %.0fs (<120)",
             max_dev, x2, pval, thin_count, secs));
}

// ---------------------------------------------------------------------------
// 4 & 5. Rochdale reproduction and the Copula-Full baseline comparison.
// Variables a..h map to 0..7.
void criteria_4_and_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data =
      parse_contingency_table("data/rochdale.tab", std::vector<int>(8, 2));

  SamplerConfig config;
  config.iterations = 250000;
  config.burn_in = 25000;
  config.thin = 25;
  config.chains = 4;
  config.master_seed = 8025;

  const RunResult run = run_chains(config, data, Exec::Parallel);
  const double sample_secs = seconds_since(t0);

  const auto probs = edge_inclusion_probs(run.summary);
  const auto mean_ups = mean_correlation(run.summary);
  const double mean_edges = 0.5 * probs.sum();

  // 4a. Pooled mean edge count.
  report("criterion 4a: mean edge count", std::fabs(mean_edges - 16.5) <= 1.0,
         fmt("pooled mean %.2f (want 16.5 +- 1.0); per chain %s",
             mean_edges,
             fmt("[%.2f %.2f %.2f %.2f]", run.chain_mean_edges[0],
                 run.chain_mean_edges[1], run.chain_mean_edges[2],
                 run.chain_mean_edges[3])
                 .c_str()));

  // 4b. Edge inclusion probabilities for the four headline pairs.
  const double p_bd = probs(1, 3), p_ag = probs(0, 6), p_ef = probs(4, 5),
               p_bh = probs(1, 7);
  report("criterion 4b: edge probabilities",
         p_bd >= 0.97 && p_ag >= 0.97 && p_ef >= 0.90 && p_ef <= 1.0 &&
             p_bh >= 0.88 && p_bh <= 1.0,
         fmt("(b,d)=%.3f (>=0.97), (a,g)=%.3f (>=0.97), (e,f)=%.3f "
             "([0.90,1]), (b,h)=%.3f ([0.88,1])",
             p_bd, p_ag, p_ef, p_bh));

  // 4c. Posterior mean latent correlations.
  report("criterion 4c: mean correlations",
         std::fabs(mean_ups(0, 6) + 0.71) <= 0.07 &&
             std::fabs(mean_ups(1, 3) + 0.79) <= 0.07,
         fmt("Ups(a,g) = %.3f (want -0.71 +- 0.07), Ups(b,d) = %.3f "
             "(want -0.79 +- 0.07)",
             mean_ups(0, 6), mean_ups(1, 3)));

  // 4d. Posterior mean Cramer's V for (a,g) and (b,d).
  const auto assoc = pair_associations(run.summary, data, config.epsilon);
  double rho_ag = 0.0, rho_bd = 0.0;
  std::vector<double> p_h1(assoc.size());
  double max_h1_full = 0.0;
  for (std::size_t k = 0; k < assoc.size(); ++k) {
    if (assoc[k].v1 == 0 && assoc[k].v2 == 6) rho_ag = assoc[k].rho_mean;
    if (assoc[k].v1 == 1 && assoc[k].v2 == 3) rho_bd = assoc[k].rho_mean;
  }
  report("criterion 4d: Cramer's V",
         std::fabs(rho_ag - 0.12) <= 0.03 && std::fabs(rho_bd - 0.24) <= 0.04,
         fmt("rho(a,g) = %.3f (want 0.12 +- 0.03), rho(b,d) = %.3f "
             "(want 0.24 +- 0.04)",
             rho_ag, rho_bd));

  // 4e. Expected counts: headline cell and total squared error.
  const auto observed = observed_cell_counts(data);
  const auto expected =
      expected_cell_counts(run.summary, data, 10000, config.master_seed);
  double sse = 0.0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double diff = expected[c] - observed[c];
    sse += diff * diff;
  }
  const double top_cell = expected[140];  // cell 2 1 1 1 2 2 1 1
  const double total_secs = seconds_since(t0);
  report("criterion 4e: expected cell counts",
         std::fabs(top_cell - 56.80) <= 6.0 && sse >= 300.0 && sse <= 550.0,
         fmt("cell '2 1 1 1 2 2 1 1' = %.2f (want 56.80 +- 6), SSE = %.2f "
             "(want [300,550]); sampling %.0fs, total %.0fs",
             top_cell, sse, sample_secs, total_secs));

  // Acceptance rates must be strictly inside (0,1) on real data.
  const double r_diag =
      MoveStats::rate(run.moves.diag_accepted, run.moves.diag_proposed);
  const double r_off =
      MoveStats::rate(run.moves.offdiag_accepted, run.moves.offdiag_proposed);
  if (!(r_diag > 0.0 && r_diag < 1.0 && r_off > 0.0 && r_off < 1.0)) {
    report("criterion 4 (diagnostics)", false,
           fmt("degenerate acceptance rates diag=%.3f offdiag=%.3f", r_diag,
               r_off));
  }

  // 5. Copula-Full baseline on the same data.
  const auto t5 = std::chrono::steady_clock::now();
  SamplerConfig full_config;
  full_config.iterations = 100000;
  full_config.burn_in = 10000;
  full_config.thin = 25;
  full_config.chains = 1;
  full_config.master_seed = 905;
  const RunResult full = copula_full_baseline(full_config, data, Exec::Parallel);

  const auto full_assoc = pair_associations(full.summary, data, 0.1);
  for (const auto& a : full_assoc) {
    max_h1_full = std::max(max_h1_full, a.bayes_factor().posterior_h1());
  }
  const auto full_expected =
      expected_cell_counts(full.summary, data, 10000, full_config.master_seed);
  double full_sse = 0.0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double diff = full_expected[c] - observed[c];
    full_sse += diff * diff;
  }
  report("criterion 5: copula-full baseline",
         max_h1_full <= 0.05 && full_sse >= 3.0 * sse,
         fmt("max p(H1,rho) = %.3f (<=0.05), SSE = %.2f (>= 3 x %.2f); %.0fs",
             max_h1_full, full_sse, sse, seconds_since(t5)));
}

// ---------------------------------------------------------------------------
// 6. Estimator normalization: MC tables sum to one exactly (power-of-two
//    draw counts make every partial sum representable); exact tables on
//    p <= 4 sum to 1 within 1e-3 and agree with the MC oracle.
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(606);
  bool ok = true;
  std::string detail;

  for (int rep = 0; rep < 3; ++rep) {
    const int p = 2 + rep;
    Eigen::MatrixXd A(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) A(i, j) = rng.normal();
    Eigen::MatrixXd sigma = A * A.transpose() +
                            p * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd isd = sigma.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd ups = isd.asDiagonal() * sigma * isd.asDiagonal();
    ups.diagonal().setOnes();

    std::vector<std::vector<int>> rows;
    std::vector<int> levels(p, 2);
    levels[p - 1] = 3;
    for (int j = 0; j < 60; ++j) {
      std::vector<int> r(p);
      for (int v = 0; v < p; ++v) {
        r[v] = static_cast<int>(rng.below(levels[v]));
      }
      rows.push_back(r);
    }
    const auto data = ObservedData::from_levels(rows, levels);
    const auto marg = empirical_marginals(data);

    Rng mc_rng(900 + rep);
    const long draws = 1 << 16;
    const auto mc = table_probabilities_mc(ups, marg, draws, mc_rng);
    double mc_total = 0.0;
    for (double q : mc) mc_total += q;
    if (mc_total != 1.0) {
      ok = false;
      detail += fmt("MC total %.17g != 1 (p=%d); ", mc_total, p);
    }

    double exact_total = 0.0;
    for (long c = 0; c < data.cell_count(); ++c) {
      const double e =
          cell_probability_exact(cell_levels(c, data), ups, marg, 1e-5);
      exact_total += e;
      const double se = std::sqrt(std::max(e, 1e-4) / draws);
      if (std::fabs(e - mc[c]) > 3.5 * se + 5e-5) {
        ok = false;
        detail += fmt("cell %ld exact %.5f vs mc %.5f (p=%d); ", c, e, mc[c], p);
      }
    }
    if (std::fabs(exact_total - 1.0) > 1e-3) {
      ok = false;
      detail += fmt("exact total %.5f (p=%d); ", exact_total, p);
    }
  }
  if (detail.empty()) {
    detail = fmt("MC sums exact, inclusion-exclusion within 1e-3, %.0fs",
                 seconds_since(t0));
  }
  report("criterion 6: estimator normalization", ok, detail);
}

// ---------------------------------------------------------------------------
// 7. NLTCS-scale smoke: parse a synthetic 2^16 table in the survey layout,
//    subsample 5000 cases, run a short chain with every state invariant
//    checked each iteration, and require all posterior mean correlations
//    positive (the generator has a single positive factor).
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const int p = 16;
  const long n_total = 21574;

  // One-factor binary generator with spread prevalences.
  Rng gen(1982);
  std::vector<long> counts(1L << p, 0);
  std::vector<double> tau(p);
  for (int v = 0; v < p; ++v) {
    const double prevalence = 0.10 + 0.55 * v / (p - 1.0);
    tau[v] = std_normal_quantile(1.0 - prevalence);
  }
  const double load = 0.65;
  const double resid = std::sqrt(1.0 - load * load);
  for (long j = 0; j < n_total; ++j) {
    const double f = gen.normal();
    long cell = 0;
    for (int v = 0; v < p; ++v) {
      const double z = load * f + resid * gen.normal();
      cell = (cell << 1) | (z > tau[v] ? 1 : 0);
    }
    ++counts[cell];
  }
  const auto table_path =
      (std::filesystem::temp_directory_path() / "cggm_nltcs_synth.tab").string();
  {
    std::ofstream out(table_path);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      out << counts[c] << ((c % 16 == 15) ? '\n' : ' ');
    }
  }

  const auto data =
      parse_contingency_table(table_path, std::vector<int>(p, 2));
  bool ok = data.n == n_total && data.p == p;
  std::string detail = fmt("parsed n=%d p=%d; ", data.n, data.p);

  const auto sub = subsample_cases(data, 5000, 424242);

  SamplerConfig config;
  config.iterations = 2000;
  config.burn_in = 500;
  config.master_seed = 1607;
  NormConstCache cache(config.delta, config.nc_samples, config.master_seed);

  long invariant_violations = 0;
  IterationCallback cb = [&](const ChainState& st) {
    if (!in_cone(st.K, st.graph).ok) ++invariant_violations;
    if ((st.K - assemble_precision(st.phi)).cwiseAbs().maxCoeff() > 1e-8) {
      ++invariant_violations;
    }
    if (!st.latents.satisfies_constraints(sub)) ++invariant_violations;
    if (st.latents.scatter_drift() > 1e-6) ++invariant_violations;
  };
  const auto result = run_chain(config, sub, 0, cache, &cb);

  const auto mean_ups = mean_correlation(result.summary);
  double min_corr = 1.0;
  for (int v1 = 0; v1 < p; ++v1) {
    for (int v2 = v1 + 1; v2 < p; ++v2) {
      min_corr = std::min(min_corr, mean_ups(v1, v2));
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && invariant_violations == 0 && min_corr > 0.0 && secs < 600.0;
  detail += fmt("invariant violations %ld, min pairwise correlation %.3f "
                "(>0), %.0fs (<600)",
                invariant_violations, min_corr, secs);
  report("criterion 7: NLTCS-scale smoke", ok, detail);
  std::filesystem::remove(table_path);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criteria_4_and_5();
  criterion_6();
  criterion_7();
  std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                    : "acceptance: FAILURES present");
  return failures == 0 ? 0 : 1;
}
