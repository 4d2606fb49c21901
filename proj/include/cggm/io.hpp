#pragma once

#include <string>
#include <vector>

#include "cggm/estimators.hpp"
#include "cggm/rank_likelihood.hpp"
#include "cggm/sampler.hpp"

namespace cggm {

// "2,2,3" as an explicit per-variable list, or "2x8" for eight binary
// variables.
std::vector<int> parse_levels_spec(const std::string& spec);

// Whitespace-separated nonnegative integer counts, one per cell, in
// lexicographic order with the LAST variable varying fastest. Cells expand
// to case rows in that same order; the grand total is preserved.
ObservedData parse_contingency_table(const std::string& path,
                                     const std::vector<int>& levels);

// CSV with a header row of variable names; `NA` marks missing. A column
// whose non-missing values are all integers becomes ordinal with codes
// remapped to 0..d-1; anything else is continuous and enters via ranks.
ObservedData parse_case_data(const std::string& path);

// Uniform subsample of m cases without replacement (deterministic in seed).
ObservedData subsample_cases(const ObservedData& data, int m,
                             std::uint64_t seed);

// Output files. All numeric formatting is fixed so byte-identical runs
// reproduce byte-identical files.
void write_edges_csv(const std::string& path, const ObservedData& data,
                     const PosteriorSummary& summary);
void write_correlation_csv(const std::string& path, const ObservedData& data,
                           const PosteriorSummary& summary);
void write_cramers_csv(const std::string& path, const ObservedData& data,
                       const std::vector<PairAssociation>& associations);
void write_cells_csv(const std::string& path, const ObservedData& data,
                     const std::vector<long>& observed,
                     const std::vector<double>& expected);
void write_degrees_csv(const std::string& path, const ObservedData& data,
                       const std::vector<VariableImportance>& importance);
void write_trace_csv(const std::string& path,
                     const std::vector<std::vector<int>>& traces);
void write_samples_csv(const std::string& path, const ObservedData& data,
                       const PosteriorSummary& summary,
                       const SamplerConfig& config);

}  // namespace cggm
