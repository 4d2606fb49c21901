#include "cggm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "cggm/io.hpp"

namespace cggm {

namespace {

nlohmann::json move_rates(const MoveStats& m) {
  return {
      {"step2_diag", {{"proposed", m.diag_proposed},
                      {"accepted", m.diag_accepted},
                      {"rate", MoveStats::rate(m.diag_accepted, m.diag_proposed)}}},
      {"step2_offdiag",
       {{"proposed", m.offdiag_proposed},
        {"accepted", m.offdiag_accepted},
        {"rate", MoveStats::rate(m.offdiag_accepted, m.offdiag_proposed)}}},
      {"step3_add", {{"proposed", m.add_proposed},
                     {"accepted", m.add_accepted},
                     {"rate", MoveStats::rate(m.add_accepted, m.add_proposed)}}},
      {"step3_delete", {{"proposed", m.del_proposed},
                        {"accepted", m.del_accepted},
                        {"rate", MoveStats::rate(m.del_accepted, m.del_proposed)}}},
      {"completion_failures", m.completion_failures},
  };
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"Copula Gaussian graphical model sampler and estimators"};

  std::string data_path;
  std::string format = "table";
  std::string levels_spec;
  std::string out_dir = "out";
  std::string baseline = "cggm";
  SamplerConfig config;
  long draws = 10000;
  double bf_threshold = 100.0;
  int threads = 0;

  app.add_option("--data", data_path, "Input data file")->required();
  app.add_option("--format", format, "Input format")
      ->check(CLI::IsMember({"table", "cases"}))
      ->capture_default_str();
  app.add_option("--levels", levels_spec,
                 "Levels per variable for table input: '2,2,3' or '2x8'");
  app.add_option("--iters", config.iterations, "MCMC iterations per chain")
      ->capture_default_str();
  app.add_option("--burnin", config.burn_in, "Burn-in iterations")
      ->capture_default_str();
  app.add_option("--thin", config.thin, "Thinning for stored correlation samples")
      ->capture_default_str();
  app.add_option("--chains", config.chains, "Independent chains")
      ->capture_default_str();
  app.add_option("--seed", config.master_seed, "Master RNG seed")
      ->capture_default_str();
  app.add_option("--sigma-p", config.sigma_p, "Precision proposal scale")
      ->capture_default_str();
  app.add_option("--sigma-g", config.sigma_g, "Graph-move proposal scale")
      ->capture_default_str();
  app.add_option("--delta", config.delta, "G-Wishart degrees of freedom")
      ->capture_default_str();
  app.add_option("--nc-samples", config.nc_samples,
                 "Monte Carlo samples per normalizing constant")
      ->capture_default_str();
  app.add_option("--epsilon", config.epsilon,
                 "Interval-null threshold for the Bayes factor tests")
      ->capture_default_str();
  app.add_option("--draws", draws, "Monte Carlo draws per stored sample "
                                   "for the cell-probability tables")
      ->capture_default_str();
  app.add_option("--baseline", baseline, "Sampler variant")
      ->check(CLI::IsMember({"cggm", "copula-full"}))
      ->capture_default_str();
  app.add_option("--bf-threshold", bf_threshold,
                 "Bayes-factor cutoff for the cumulative association summary")
      ->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP threads (0 = library default)")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);

    ObservedData data;
    if (format == "table") {
      if (levels_spec.empty()) {
        throw std::invalid_argument("table input needs --levels");
      }
      data = parse_contingency_table(data_path, parse_levels_spec(levels_spec));
    } else {
      data = parse_case_data(data_path);
    }

    std::printf("data: %s  n=%d  p=%d  (%s)\n", data_path.c_str(), data.n,
                data.p, format.c_str());
    std::printf("sampler: %s, %d chain(s) x %ld iterations, burn-in %ld, thin %d\n",
                baseline.c_str(), config.chains, config.iterations,
                config.burn_in, config.thin);

    const RunResult result = (baseline == "copula-full")
                                 ? copula_full_baseline(config, data)
                                 : run_chains(config, data);

    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* name) {
      return (std::filesystem::path(out_dir) / name).string();
    };

    write_trace_csv(path("trace.csv"), result.traces);

    nlohmann::json summary_json = {
        {"schema_version", 1},
        {"config",
         {{"data", data_path},
          {"format", format},
          {"baseline", baseline},
          {"iterations", config.iterations},
          {"burn_in", config.burn_in},
          {"thin", config.thin},
          {"chains", config.chains},
          {"seed", config.master_seed},
          {"sigma_p", config.sigma_p},
          {"sigma_g", config.sigma_g},
          {"delta", config.delta},
          {"nc_samples", config.nc_samples},
          {"epsilon", config.epsilon},
          {"draws", draws},
          {"bf_threshold", bf_threshold}}},
        {"data", {{"n", data.n}, {"p", data.p}}},
        {"samples", result.summary.S},
        {"thinned_samples", result.summary.thinned.size()},
        {"chain_mean_edge_counts", result.chain_mean_edges},
        {"acceptance", move_rates(result.moves)},
        {"nc_cache_entries", result.nc_cache_entries},
    };

    double pooled_mean_edges = 0.0;
    if (result.summary.S > 0) {
      const auto probs = edge_inclusion_probs(result.summary);
      pooled_mean_edges = 0.5 * probs.sum();
      summary_json["mean_edge_count"] = pooled_mean_edges;

      write_edges_csv(path("edges.csv"), data, result.summary);
      write_correlation_csv(path("correlation.csv"), data, result.summary);
      write_samples_csv(path("samples.csv"), data, result.summary, config);

      const auto associations =
          pair_associations(result.summary, data, config.epsilon);
      write_cramers_csv(path("cramers_v.csv"), data, associations);
      write_degrees_csv(
          path("degrees.csv"), data,
          degree_and_association_summary(result.summary, associations,
                                         bf_threshold));

      if (data.all_discrete() && data.cell_count() <= (1L << 20)) {
        const auto observed = observed_cell_counts(data);
        const auto expected = expected_cell_counts(
            result.summary, data, draws, config.master_seed);
        write_cells_csv(path("cells.csv"), data, observed, expected);
        double sse = 0.0;
        for (std::size_t c = 0; c < observed.size(); ++c) {
          const double diff = expected[c] - observed[c];
          sse += diff * diff;
        }
        summary_json["cells_sse"] = sse;
        std::printf("expected cell counts: SSE vs observed = %.2f\n", sse);
      }

      std::printf("pooled mean edge count: %.2f\n", pooled_mean_edges);
      std::printf("acceptance rates: diag %.3f, offdiag %.3f, add %.3f, delete %.3f\n",
                  MoveStats::rate(result.moves.diag_accepted,
                                  result.moves.diag_proposed),
                  MoveStats::rate(result.moves.offdiag_accepted,
                                  result.moves.offdiag_proposed),
                  MoveStats::rate(result.moves.add_accepted,
                                  result.moves.add_proposed),
                  MoveStats::rate(result.moves.del_accepted,
                                  result.moves.del_proposed));
    } else {
      std::printf("no post-burn-in samples; writing trace and summary only\n");
    }

    std::ofstream js(path("summary.json"));
    js << summary_json.dump(2) << '\n';
    std::printf("outputs written to %s\n", out_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace cggm
