#include "cggm/rank_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "cggm/mvn.hpp"

namespace cggm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool ObservedData::all_discrete() const {
  for (const auto& c : cols) {
    if (c.kind == VarKind::Continuous) return false;
  }
  return true;
}

long ObservedData::cell_count() const {
  long cells = 1;
  for (const auto& c : cols) {
    if (c.kind == VarKind::Continuous) {
      throw std::logic_error("cell_count: data has continuous columns");
    }
    cells *= c.d;
  }
  return cells;
}


void ColumnInfo::index_levels() {
  rows_of_level.assign(d, {});
  n_nonmissing = 0;
  for (std::size_t j = 0; j < level_of_row.size(); ++j) {
    const int l = level_of_row[j];
    if (l < 0) continue;
    rows_of_level[l].push_back(static_cast<int>(j));
    ++n_nonmissing;
  }
  prev_occupied.assign(d, -1);
  next_occupied.assign(d, d);
  int last = -1;
  for (int l = 0; l < d; ++l) {
    prev_occupied[l] = last;
    if (!rows_of_level[l].empty()) last = l;
  }
  int nxt = d;
  for (int l = d - 1; l >= 0; --l) {
    next_occupied[l] = nxt;
    if (!rows_of_level[l].empty()) nxt = l;
  }
}

void append_discrete_column(ObservedData& data, const std::vector<int>& codes,
                            int levels, VarKind kind) {
  if (data.n == 0) data.n = static_cast<int>(codes.size());
  if (static_cast<int>(codes.size()) != data.n) {
    throw std::invalid_argument("append_discrete_column: row count mismatch");
  }
  if (levels < 2) {
    throw std::invalid_argument("append_discrete_column: need >= 2 levels");
  }
  ColumnInfo col;
  col.kind = kind;
  col.d = levels;
  col.level_of_row = codes;
  for (int j = 0; j < data.n; ++j) {
    if (codes[j] < -1 || codes[j] >= levels) {
      throw std::invalid_argument("append_discrete_column: level code out of range");
    }
  }
  col.index_levels();
  if (col.n_nonmissing == 0) {
    throw std::invalid_argument("append_discrete_column: column entirely missing");
  }
  for (int l = 0; l < levels; ++l) {
    col.label_of_level.push_back(std::to_string(l + 1));
  }
  data.cols.push_back(std::move(col));
  data.var_names.push_back("x" + std::to_string(data.cols.size()));
  data.p = static_cast<int>(data.cols.size());
}

void append_continuous_column(ObservedData& data,
                              const std::vector<double>& values) {
  if (data.n == 0) data.n = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != data.n) {
    throw std::invalid_argument("append_continuous_column: row count mismatch");
  }
  // Distinct observed values become levels; ties share one level and so
  // impose no mutual constraint.
  std::map<double, int> level_of_value;
  for (double x : values) {
    if (!std::isnan(x)) level_of_value.emplace(x, 0);
  }
  if (level_of_value.empty()) {
    throw std::invalid_argument("append_continuous_column: column entirely missing");
  }
  int next = 0;
  for (auto& [value, code] : level_of_value) code = next++;

  ColumnInfo col;
  col.kind = VarKind::Continuous;
  col.d = next;
  col.level_of_row.resize(values.size());
  for (int j = 0; j < data.n; ++j) {
    col.level_of_row[j] =
        std::isnan(values[j]) ? -1 : level_of_value.at(values[j]);
  }
  col.index_levels();
  col.label_of_level.resize(next);
  for (const auto& [value, code] : level_of_value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    col.label_of_level[code] = buf;
  }
  data.cols.push_back(std::move(col));
  data.var_names.push_back("x" + std::to_string(data.cols.size()));
  data.p = static_cast<int>(data.cols.size());
}

ObservedData ObservedData::from_levels(const std::vector<std::vector<int>>& rows,
                                       const std::vector<int>& level_counts) {
  ObservedData data;
  data.n = static_cast<int>(rows.size());
  const int p = static_cast<int>(level_counts.size());
  for (int v = 0; v < p; ++v) {
    std::vector<int> codes(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) codes[j] = rows[j][v];
    append_discrete_column(data, codes, level_counts[v],
                           level_counts[v] == 2 ? VarKind::Binary
                                                : VarKind::Ordinal);
  }
  return data;
}

ObservedData ObservedData::from_continuous(
    const std::vector<std::vector<double>>& rows) {
  ObservedData data;
  data.n = static_cast<int>(rows.size());
  const int p = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  for (int v = 0; v < p; ++v) {
    std::vector<double> vals(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) vals[j] = rows[j][v];
    append_continuous_column(data, vals);
  }
  return data;
}

LatentMatrix::LatentMatrix(const ObservedData& data, Eigen::MatrixXd z)
    : z_(std::move(z)) {
  scatter_ = z_.transpose() * z_;
  lvl_min_.resize(data.p);
  lvl_max_.resize(data.p);
  for (int v = 0; v < data.p; ++v) rebuild_extremes(data, v);
}

void LatentMatrix::rebuild_extremes(const ObservedData& data, int v) {
  const ColumnInfo& col = data.cols[v];
  lvl_min_[v].assign(col.d, kInf);
  lvl_max_[v].assign(col.d, -kInf);
  for (int l = 0; l < col.d; ++l) {
    for (int j : col.rows_of_level[l]) {
      lvl_min_[v][l] = std::min(lvl_min_[v][l], z_(j, v));
      lvl_max_[v][l] = std::max(lvl_max_[v][l], z_(j, v));
    }
  }
}

std::pair<double, double> LatentMatrix::bounds(const ObservedData& data, int v,
                                               int j) const {
  const ColumnInfo& col = data.cols[v];
  const int l = col.level_of_row[j];
  if (l < 0) return {-kInf, kInf};
  // With the latent state in the constraint set, every occupied level below
  // l sits entirely under the nearest one, which therefore carries the bound.
  const int lo_l = col.prev_occupied[l];
  const int hi_l = col.next_occupied[l];
  const double lo = (lo_l >= 0) ? lvl_max_[v][lo_l] : -kInf;
  const double hi = (hi_l < col.d) ? lvl_min_[v][hi_l] : kInf;
  return {lo, hi};
}

void LatentMatrix::set(const ObservedData& data, int v, int j, double value) {
  const double old = z_(j, v);
  if (value == old) return;
  z_(j, v) = value;

  const int p = static_cast<int>(z_.cols());
  const double diff = value - old;
  for (int w = 0; w < p; ++w) {
    if (w == v) continue;
    const double upd = diff * z_(j, w);
    scatter_(v, w) += upd;
    scatter_(w, v) += upd;
  }
  scatter_(v, v) += value * value - old * old;

  const int l = data.cols[v].level_of_row[j];
  if (l < 0) return;
  const int members = static_cast<int>(data.cols[v].rows_of_level[l].size());
  if (members == 1) {
    lvl_min_[v][l] = lvl_max_[v][l] = value;
    return;
  }
  const bool was_min = (old == lvl_min_[v][l]);
  const bool was_max = (old == lvl_max_[v][l]);
  if ((was_min && value > old) || (was_max && value < old)) {
    // The displaced extreme may have been this cell; rescan the level.
    double mn = kInf, mx = -kInf;
    for (int r : data.cols[v].rows_of_level[l]) {
      mn = std::min(mn, z_(r, v));
      mx = std::max(mx, z_(r, v));
    }
    lvl_min_[v][l] = mn;
    lvl_max_[v][l] = mx;
    return;
  }
  lvl_min_[v][l] = std::min(lvl_min_[v][l], value);
  lvl_max_[v][l] = std::max(lvl_max_[v][l], value);
}

void LatentMatrix::refresh(const ObservedData& data) {
  scatter_ = z_.transpose() * z_;
  for (int v = 0; v < data.p; ++v) rebuild_extremes(data, v);
}

bool LatentMatrix::satisfies_constraints(const ObservedData& data) const {
  // Membership in the rank event is exactly: within every column, all
  // latents of a lower occupied level sit strictly below all latents of the
  // next occupied level. Checked in O(n p).
  for (int v = 0; v < data.p; ++v) {
    const ColumnInfo& col = data.cols[v];
    double prev_max = -kInf;
    for (int l = 0; l < col.d; ++l) {
      if (col.rows_of_level[l].empty()) continue;
      double mn = kInf, mx = -kInf;
      for (int r : col.rows_of_level[l]) {
        const double z = z_(r, v);
        if (!std::isfinite(z)) return false;
        mn = std::min(mn, z);
        mx = std::max(mx, z);
      }
      if (!(mn > prev_max)) return false;
      prev_max = mx;
    }
  }
  return true;
}

double LatentMatrix::scatter_drift() const {
  return (scatter_ - z_.transpose() * z_).cwiseAbs().maxCoeff();
}

std::pair<double, double> latent_bounds(const std::vector<int>& level_of_row,
                                        const Eigen::VectorXd& z_col, int j) {
  if (j < 0 || j >= static_cast<int>(level_of_row.size())) {
    throw std::out_of_range("latent_bounds: row index out of range");
  }
  const int lj = level_of_row[j];
  if (lj < 0) return {-kInf, kInf};
  double lo = -kInf, hi = kInf;
  for (std::size_t k = 0; k < level_of_row.size(); ++k) {
    const int lk = level_of_row[k];
    if (lk < 0) continue;
    if (lk < lj) lo = std::max(lo, z_col[static_cast<int>(k)]);
    if (lk > lj) hi = std::min(hi, z_col[static_cast<int>(k)]);
  }
  return {lo, hi};
}

LatentMatrix init_latents(const ObservedData& data) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(data.n, data.p);
  for (int v = 0; v < data.p; ++v) {
    const ColumnInfo& col = data.cols[v];
    if (col.d == 1) {
      std::fprintf(stderr,
                   "warning: column %s is constant; it contributes no rank "
                   "constraints\n",
                   data.var_names[v].c_str());
    }
    // Midpoint of each level's empirical CDF band, pushed through the
    // normal quantile. For continuous data with distinct values this is
    // the (rank - 0.5)/n normal score; tie groups share their band.
    double below = 0.0;
    for (int l = 0; l < col.d; ++l) {
      const double mass =
          static_cast<double>(col.rows_of_level[l].size()) / col.n_nonmissing;
      const double score = std_normal_quantile(below + 0.5 * mass);
      for (int j : col.rows_of_level[l]) z(j, v) = score;
      below += mass;
    }
  }
  return LatentMatrix(data, std::move(z));
}

namespace {

// Robert-style rejection for a standardized lower tail draw x >= a > 0,
// optionally capped at b.
double robert_tail(double a, double b, Rng& rng) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a - std::log(rng.uniform()) / lambda;
    if (x > b) continue;
    const double d = x - lambda;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
  }
}

}  // namespace

double sample_truncated_normal(double mu, double sigma, double lo, double hi,
                               Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("truncated normal: sigma <= 0");
  if (!(lo < hi)) throw std::invalid_argument("truncated normal: empty interval");

  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  double x;
  if (a > 4.0) {
    x = robert_tail(a, b, rng);
  } else if (b < -4.0) {
    x = -robert_tail(-b, -a, rng);
  } else {
    const double fa = (a == -kInf) ? 0.0 : std_normal_cdf(a);
    const double fb = (b == kInf) ? 1.0 : std_normal_cdf(b);
    x = std_normal_quantile(fa + rng.uniform() * (fb - fa));
  }
  double out = mu + sigma * x;
  // Quantile rounding can land exactly on a finite endpoint; nudge inside.
  if (out <= lo) out = std::nextafter(lo, kInf);
  if (out >= hi) out = std::nextafter(hi, -kInf);
  return out;
}

void step1_resample_latents(const ObservedData& data, const UndirectedGraph& g,
                            const Eigen::MatrixXd& K, LatentMatrix& latents,
                            Rng& rng) {
  const int n = data.n;
  std::vector<int> nb;
  std::vector<double> weight;
  for (int v = 0; v < data.p; ++v) {
    nb = g.neighbors(v);
    const double kvv = K(v, v);
    const double sigma = 1.0 / std::sqrt(kvv);
    weight.resize(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) weight[i] = K(v, nb[i]) / kvv;
    for (int j = 0; j < n; ++j) {
      double mu = 0.0;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        mu -= weight[i] * latents.z()(j, nb[i]);
      }
      const auto [lo, hi] = latents.bounds(data, v, j);
      latents.set(data, v, j, sample_truncated_normal(mu, sigma, lo, hi, rng));
    }
  }
}

}  // namespace cggm
