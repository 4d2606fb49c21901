#include "cggm/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cggm {

namespace {

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) {
      f.erase(f.begin());
    }
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) {
      f.pop_back();
    }
  }
  return fields;
}

}  // namespace

std::vector<int> parse_levels_spec(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("levels: empty specification");
  std::vector<int> levels;
  const auto x = spec.find('x');
  if (x != std::string::npos) {
    const int d = std::stoi(spec.substr(0, x));
    const int p = std::stoi(spec.substr(x + 1));
    if (d < 2 || p < 1) {
      throw std::invalid_argument("levels: bad shorthand '" + spec + "'");
    }
    levels.assign(p, d);
    return levels;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const int d = std::stoi(tok);
    if (d < 2) {
      throw std::invalid_argument("levels: discrete variables need >= 2 levels");
    }
    levels.push_back(d);
  }
  if (levels.empty()) throw std::invalid_argument("levels: empty specification");
  return levels;
}

ObservedData parse_contingency_table(const std::string& path,
                                     const std::vector<int>& levels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const int p = static_cast<int>(levels.size());
  long cells = 1;
  for (int d : levels) cells *= d;

  std::vector<long> counts;
  counts.reserve(cells);
  long value;
  while (in >> value) {
    if (value < 0) {
      throw std::invalid_argument(path + ": negative cell count");
    }
    counts.push_back(value);
  }
  if (!in.eof()) throw std::invalid_argument(path + ": non-numeric cell entry");
  if (static_cast<long>(counts.size()) != cells) {
    throw std::invalid_argument(
        path + ": expected " + std::to_string(cells) + " cell counts, found " +
        std::to_string(counts.size()));
  }
  long total = 0;
  for (long c : counts) total += c;
  if (total == 0) throw std::invalid_argument(path + ": table has no observations");

  // Expand cells to cases in table order, last variable fastest.
  std::vector<std::vector<int>> rows;
  rows.reserve(total);
  std::vector<int> lev(p);
  for (long cell = 0; cell < cells; ++cell) {
    long rem = cell;
    for (int v = p - 1; v >= 0; --v) {
      lev[v] = static_cast<int>(rem % levels[v]);
      rem /= levels[v];
    }
    for (long r = 0; r < counts[cell]; ++r) rows.push_back(lev);
  }
  return ObservedData::from_levels(rows, levels);
}

ObservedData parse_case_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  const auto names = split_csv_line(line);
  const int p = static_cast<int>(names.size());

  std::vector<std::vector<std::string>> raw(p);
  long n = 0;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != p) {
      throw std::invalid_argument(path + ": line " + std::to_string(lineno) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(p));
    }
    for (int v = 0; v < p; ++v) raw[v].push_back(fields[v]);
    ++n;
  }
  if (n == 0) throw std::invalid_argument(path + ": no data rows");
  if (n == 1) {
    std::fprintf(stderr,
                 "warning: %s has a single case; rank constraints are vacuous\n",
                 path.c_str());
  }

  ObservedData data;
  data.n = static_cast<int>(n);
  for (int v = 0; v < p; ++v) {
    bool integral = true;
    std::vector<double> values(n);
    for (long j = 0; j < n; ++j) {
      const std::string& s = raw[v][j];
      if (s == "NA" || s.empty()) {
        values[j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      std::size_t used = 0;
      double x;
      try {
        x = std::stod(s, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ": column " + names[v] +
                                    ": non-numeric value '" + s + "'");
      }
      if (used != s.size()) {
        throw std::invalid_argument(path + ": column " + names[v] +
                                    ": non-numeric value '" + s + "'");
      }
      values[j] = x;
      if (x != std::floor(x)) integral = false;
    }
    if (integral) {
      // Integer-valued columns are ordinal; remap observed values to 0..d-1.
      std::vector<double> distinct;
      for (double x : values) {
        if (!std::isnan(x)) distinct.push_back(x);
      }
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()),
                     distinct.end());
      if (distinct.empty()) {
        throw std::invalid_argument(path + ": column " + names[v] +
                                    " is entirely missing");
      }
      std::vector<int> codes(n);
      for (long j = 0; j < n; ++j) {
        if (std::isnan(values[j])) {
          codes[j] = -1;
          continue;
        }
        codes[j] = static_cast<int>(
            std::lower_bound(distinct.begin(), distinct.end(), values[j]) -
            distinct.begin());
      }
      const int d = std::max<int>(2, static_cast<int>(distinct.size()));
      append_discrete_column(data, codes, d,
                             distinct.size() == 2 ? VarKind::Binary
                                                  : VarKind::Ordinal);
      auto& col = data.cols.back();
      for (std::size_t l = 0; l < distinct.size(); ++l) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", distinct[l]);
        col.label_of_level[l] = buf;
      }
    } else {
      append_continuous_column(data, values);
    }
    data.var_names[v] = names[v];
  }
  return data;
}

ObservedData subsample_cases(const ObservedData& data, int m,
                             std::uint64_t seed) {
  if (m < 1 || m > data.n) {
    throw std::invalid_argument("subsample_cases: need 1 <= m <= n");
  }
  std::vector<int> rows(data.n);
  for (int j = 0; j < data.n; ++j) rows[j] = j;
  Rng rng(seed);
  for (int j = 0; j < m; ++j) {
    const int k = j + static_cast<int>(rng.below(data.n - j));
    std::swap(rows[j], rows[k]);
  }
  rows.resize(m);
  std::sort(rows.begin(), rows.end());

  ObservedData out;
  out.n = m;
  out.p = data.p;
  out.var_names = data.var_names;
  for (int v = 0; v < data.p; ++v) {
    ColumnInfo col;
    col.kind = data.cols[v].kind;
    col.d = data.cols[v].d;
    col.label_of_level = data.cols[v].label_of_level;
    col.level_of_row.resize(m);
    for (int j = 0; j < m; ++j) {
      col.level_of_row[j] = data.cols[v].level_of_row[rows[j]];
    }
    col.index_levels();
    if (col.n_nonmissing == 0) {
      throw std::invalid_argument("subsample_cases: column " +
                                  data.var_names[v] + " entirely missing");
    }
    out.cols.push_back(std::move(col));
  }
  return out;
}

void write_edges_csv(const std::string& path, const ObservedData& data,
                     const PosteriorSummary& summary) {
  auto out = open_out(path);
  const Eigen::MatrixXd probs = edge_inclusion_probs(summary);
  const Eigen::MatrixXd mean_ups = mean_correlation(summary);
  out << "v1,v2,name1,name2,inclusion_prob,mean_upsilon,bf_upsilon,above,below\n";
  for (int v1 = 0; v1 < summary.p; ++v1) {
    for (int v2 = v1 + 1; v2 < summary.p; ++v2) {
      const BayesFactor bf =
          bayes_factor_upsilon(summary, v1, v2, summary.epsilon);
      out << (v1 + 1) << ',' << (v2 + 1) << ',' << data.var_names[v1] << ','
          << data.var_names[v2] << ',' << fmt(probs(v1, v2)) << ','
          << fmt(mean_ups(v1, v2)) << ','
          << (bf.infinite ? "inf" : fmt(bf.value)) << ',' << bf.above << ','
          << bf.below << '\n';
    }
  }
}

void write_correlation_csv(const std::string& path, const ObservedData& data,
                           const PosteriorSummary& summary) {
  auto out = open_out(path);
  const Eigen::MatrixXd mean_ups = mean_correlation(summary);
  out << "variable";
  for (int v = 0; v < summary.p; ++v) out << ',' << data.var_names[v];
  out << '\n';
  for (int v1 = 0; v1 < summary.p; ++v1) {
    out << data.var_names[v1];
    for (int v2 = 0; v2 < summary.p; ++v2) out << ',' << fmt(mean_ups(v1, v2));
    out << '\n';
  }
}

void write_cramers_csv(const std::string& path, const ObservedData& data,
                       const std::vector<PairAssociation>& associations) {
  auto out = open_out(path);
  out << "v1,v2,name1,name2,rho_mean,p_h1,bayes_factor,above,below\n";
  for (const auto& a : associations) {
    const BayesFactor bf = a.bayes_factor();
    out << (a.v1 + 1) << ',' << (a.v2 + 1) << ',' << data.var_names[a.v1] << ','
        << data.var_names[a.v2] << ',' << fmt(a.rho_mean) << ','
        << fmt(bf.posterior_h1()) << ',' << (bf.infinite ? "inf" : fmt(bf.value))
        << ',' << a.above << ',' << a.below << '\n';
  }
}

void write_cells_csv(const std::string& path, const ObservedData& data,
                     const std::vector<long>& observed,
                     const std::vector<double>& expected) {
  auto out = open_out(path);
  out << "cell,observed,expected\n";
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const auto levels = cell_levels(static_cast<long>(c), data);
    std::string label;
    for (int v = 0; v < data.p; ++v) {
      if (v) label += ' ';
      label += data.cols[v].label_of_level[levels[v]];
    }
    out << label << ',' << observed[c] << ',' << fmt(expected[c]) << '\n';
  }
}

void write_degrees_csv(const std::string& path, const ObservedData& data,
                       const std::vector<VariableImportance>& importance) {
  auto out = open_out(path);
  out << "variable,name,expected_degree,cumulative_cramers_v\n";
  for (std::size_t v = 0; v < importance.size(); ++v) {
    out << (v + 1) << ',' << data.var_names[v] << ','
        << fmt(importance[v].expected_degree) << ','
        << fmt(importance[v].cumulative_association) << '\n';
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<std::vector<int>>& traces) {
  auto out = open_out(path);
  out << "iteration,chain,edge_count\n";
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (std::size_t s = 0; s < traces[c].size(); ++s) {
      out << s << ',' << c << ',' << traces[c][s] << '\n';
    }
  }
}

void write_samples_csv(const std::string& path, const ObservedData& data,
                       const PosteriorSummary& summary,
                       const SamplerConfig& config) {
  auto out = open_out(path);
  out << "iteration,chain,graph";
  for (int v1 = 0; v1 < summary.p; ++v1) {
    for (int v2 = v1 + 1; v2 < summary.p; ++v2) {
      out << ",u_" << (v1 + 1) << '_' << (v2 + 1);
    }
  }
  out << '\n';
  // Thinned samples are concatenated in chain order; sample k of a chain was
  // taken at iteration burn_in + k*thin.
  const long per_chain =
      config.iterations > config.burn_in
          ? (config.iterations - config.burn_in + config.thin - 1) / config.thin
          : 0;
  for (std::size_t s = 0; s < summary.thinned.size(); ++s) {
    const long chain = per_chain > 0 ? static_cast<long>(s) / per_chain : 0;
    const long within = per_chain > 0 ? static_cast<long>(s) % per_chain : 0;
    const long iteration = config.burn_in + within * config.thin;
    const Eigen::MatrixXd& ups = summary.thinned[s];
    out << iteration << ',' << chain << ',' << summary.thinned_graphs[s];
    for (int v1 = 0; v1 < summary.p; ++v1) {
      for (int v2 = v1 + 1; v2 < summary.p; ++v2) out << ',' << fmt(ups(v1, v2));
    }
    out << '\n';
  }
  (void)data;
}

}  // namespace cggm
