#include "teamscope/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/percentile.hpp"

namespace teamscope {

const std::vector<std::optional<double>>& VariableTable::column(
    const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw NotFoundError("unknown column: " + name);
  return it->second;
}

std::vector<std::optional<double>>& VariableTable::add_column(const std::string& name) {
  auto [it, added] = columns_.emplace(name, std::vector<std::optional<double>>(n_rows()));
  if (added) names_.push_back(name);
  it->second.resize(n_rows());
  return it->second;
}

void VariableTable::set(const std::string& name, std::size_t row, double value) {
  add_column(name).at(row) = value;
}

void write_variable_table(const VariableTable& table, const std::filesystem::path& path) {
  std::string out;
  std::vector<std::string> header{"doc_id", "year", "journal", "category"};
  for (const auto& n : table.numeric_names()) header.push_back(n);
  out += csv_row(header);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    std::vector<std::string> row{table.doc_id[r], std::to_string(table.year[r]),
                                 table.journal[r], table.category[r]};
    for (const auto& n : table.numeric_names()) {
      const auto& v = table.column(n)[r];
      row.push_back(v ? format_double(*v) : "");
    }
    out += csv_row(row);
  }
  atomic_write_file(path, out);
}

VariableTable read_variable_table(const std::filesystem::path& path) {
  CsvFile csv = read_csv(path);
  if (csv.header.size() < 4 || csv.header[0] != "doc_id" || csv.header[1] != "year" ||
      csv.header[2] != "journal" || csv.header[3] != "category")
    throw ParseError(path.string() + ": expected doc_id,year,journal,category,...");
  VariableTable t;
  for (const auto& row : csv.rows) {
    t.doc_id.push_back(row[0]);
    int y = 0;
    auto [p, ec] = std::from_chars(row[1].data(), row[1].data() + row[1].size(), y);
    if (ec != std::errc() || p != row[1].data() + row[1].size())
      throw ParseError(path.string() + ": bad year " + row[1]);
    t.year.push_back(y);
    t.journal.push_back(row[2]);
    t.category.push_back(row[3]);
  }
  for (std::size_t c = 4; c < csv.header.size(); ++c) {
    auto& col = t.add_column(csv.header[c]);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      const std::string& s = csv.rows[r][c];
      if (s.empty()) continue;
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(path.string() + ": bad number '" + s + "' in column " +
                         csv.header[c]);
      col[r] = v;
    }
  }
  return t;
}

std::vector<std::optional<double>> percentile_rank_by_group(
    std::span<const std::optional<double>> values, std::span<const std::string> groups) {
  if (values.size() != groups.size())
    throw ConfigError("percentile_rank_by_group: length mismatch");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] && !groups[i].empty()) members[groups[i]].push_back(i);

  std::vector<std::optional<double>> out(values.size());
  std::vector<double> vals;
  for (const auto& [g, rows] : members) {
    vals.clear();
    for (auto r : rows) vals.push_back(*values[r]);
    auto ranks = percentile_ranks(vals);
    for (std::size_t k = 0; k < rows.size(); ++k) out[rows[k]] = ranks[k];
  }
  return out;
}

SummaryRow summary_stats(std::span<const std::optional<double>> values) {
  std::vector<double> v;
  for (const auto& x : values)
    if (x) v.push_back(*x);
  SummaryRow s;
  s.n = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.p25 = percentile_sorted(v, 25.0);
  s.median = percentile_sorted(v, 50.0);
  s.p75 = percentile_sorted(v, 75.0);
  double sum = 0.0;
  for (double x : v) sum += x;
  double mean = sum / static_cast<double>(v.size());
  s.mean = mean;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  } else {
    s.sd = 0.0;
  }
  return s;
}

namespace {

// pairwise complete-case Pearson correlation; nullopt when degenerate
std::optional<double> pearson(const std::vector<std::optional<double>>& a,
                              const std::vector<std::optional<double>>& b) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      sx += *a[i];
      sy += *b[i];
      ++n;
    }
  }
  if (n < 2) return std::nullopt;
  double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      double dx = *a[i] - mx, dy = *b[i] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

bool has_variance(const std::vector<std::optional<double>>& a) {
  std::optional<double> first;
  for (const auto& x : a) {
    if (!x) continue;
    if (!first) {
      first = *x;
    } else if (*x != *first) {
      return true;
    }
  }
  return false;
}

}  // namespace

Correlogram correlogram(const VariableTable& table,
                        const std::vector<std::string>& columns) {
  if (columns.size() < 2) throw ConfigError("correlogram: need at least 2 columns");
  Correlogram out;
  out.columns = columns;
  const std::size_t k = columns.size();

  std::vector<const std::vector<std::optional<double>>*> cols;
  std::vector<bool> usable;
  for (const auto& name : columns) {
    cols.push_back(&table.column(name));
    usable.push_back(has_variance(*cols.back()));
  }

  out.rho.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (!usable[i]) continue;  // zero-variance: whole row stays missing
    out.rho[i][i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!usable[j]) continue;
      auto r = pearson(*cols[i], *cols[j]);
      out.rho[i][j] = r;
      out.rho[j][i] = r;
    }
  }

  // average-linkage agglomeration on 1 - rho over usable columns
  std::vector<std::vector<std::size_t>> clusters;  // member leaf indices
  for (std::size_t i = 0; i < k; ++i)
    if (usable[i]) clusters.push_back({i});
  auto leaf_dist = [&](std::size_t a, std::size_t b) {
    auto r = out.rho[a][b];
    return 1.0 - (r ? *r : 0.0);
  };
  while (clusters.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double sum = 0.0;
        for (auto a : clusters[i])
          for (auto b : clusters[j]) sum += leaf_dist(a, b);
        double d = sum / static_cast<double>(clusters[i].size() * clusters[j].size());
        if (d < best) {  // first minimum wins: deterministic tie break
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    auto merged = clusters[bi];
    merged.insert(merged.end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    clusters[bi] = std::move(merged);
  }
  if (!clusters.empty())
    for (auto leaf : clusters[0]) out.leaf_order.push_back(columns[leaf]);
  return out;
}

BinnedSurface binned_surface(const VariableTable& table, const std::string& x,
                             const std::string& y, const std::string& z, int bins) {
  if (bins < 2) throw ConfigError("binned_surface: bins must be >= 2");
  const auto& cx = table.column(x);
  const auto& cy = table.column(y);
  const auto& cz = table.column(z);

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  bool any = false;
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    if (!cx[i] || !cy[i] || !cz[i]) continue;
    any = true;
    x_min = std::min(x_min, *cx[i]);
    x_max = std::max(x_max, *cx[i]);
    y_min = std::min(y_min, *cy[i]);
    y_max = std::max(y_max, *cy[i]);
  }
  if (!any) throw ComputeError("binned_surface: no complete rows");

  int bx = x_max > x_min ? bins : 1;  // degenerate range collapses to one bin
  int by = y_max > y_min ? bins : 1;

  BinnedSurface s;
  s.x = x;
  s.y = y;
  s.z = z;
  for (int i = 0; i <= bx; ++i)
    s.x_edges.push_back(x_min + (x_max - x_min) * static_cast<double>(i) / bx);
  for (int i = 0; i <= by; ++i)
    s.y_edges.push_back(y_min + (y_max - y_min) * static_cast<double>(i) / by);
  s.count.assign(bx, std::vector<std::int64_t>(by, 0));
  std::vector<std::vector<double>> sum(static_cast<std::size_t>(bx),
                                       std::vector<double>(by, 0.0));

  auto bin_of = [](double v, double lo, double hi, int nb) {
    if (nb == 1 || v >= hi) return nb - 1;
    return static_cast<int>((v - lo) / (hi - lo) * nb);
  };
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    if (!cx[i] || !cy[i] || !cz[i]) continue;
    int ix = bin_of(*cx[i], x_min, x_max, bx);
    int iy = bin_of(*cy[i], y_min, y_max, by);
    s.count[ix][iy] += 1;
    sum[ix][iy] += *cz[i];
  }
  s.mean_z.assign(bx, std::vector<double>(by, 0.0));
  for (int i = 0; i < bx; ++i)
    for (int j = 0; j < by; ++j)
      if (s.count[i][j] > 0)
        s.mean_z[i][j] = sum[i][j] / static_cast<double>(s.count[i][j]);
  return s;
}

double turning_point(double b1, double b2) {
  if (b2 == 0.0) throw ComputeError("turning_point: quadratic coefficient is zero");
  return -b1 / (2.0 * b2);
}

double marginal_effect(double b1, double b2, double x) {
  // guarantee an exact zero at the stationary point despite rounding
  if (b2 != 0.0 && x == -b1 / (2.0 * b2)) return 0.0;
  return b1 + 2.0 * b2 * x;
}

}  // namespace teamscope
