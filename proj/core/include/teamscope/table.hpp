#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace teamscope {

// column-oriented per-document table; fixed key columns plus named numeric
// columns with missing entries
class VariableTable {
 public:
  std::vector<std::string> doc_id;
  std::vector<int> year;
  std::vector<std::string> journal;   // cluster key
  std::vector<std::string> category;  // empty when the journal is unknown

  std::size_t n_rows() const { return doc_id.size(); }
  const std::vector<std::string>& numeric_names() const { return names_; }
  bool has_column(const std::string& name) const { return columns_.count(name) > 0; }
  const std::vector<std::optional<double>>& column(const std::string& name) const;
  std::vector<std::optional<double>>& add_column(const std::string& name);
  void set(const std::string& name, std::size_t row, double value);

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::vector<std::optional<double>>> columns_;
};

void write_variable_table(const VariableTable& table, const std::filesystem::path& path);
VariableTable read_variable_table(const std::filesystem::path& path);

// (rank-1)/(n-1) with average ties inside each group; rows with an empty
// group key or a missing value stay missing
std::vector<std::optional<double>> percentile_rank_by_group(
    std::span<const std::optional<double>> values, std::span<const std::string> groups);

struct SummaryRow {
  std::size_t n = 0;
  std::optional<double> min, p25, median, mean, p75, max, sd;
};

SummaryRow summary_stats(std::span<const std::optional<double>> values);

struct Correlogram {
  std::vector<std::string> columns;
  // pairwise complete-case Pearson; missing when undefined
  std::vector<std::vector<std::optional<double>>> rho;
  // average-linkage leaf order over columns with variance
  std::vector<std::string> leaf_order;
};

Correlogram correlogram(const VariableTable& table, const std::vector<std::string>& columns);

struct BinnedSurface {
  std::string x, y, z;
  std::vector<double> x_edges, y_edges;  // bin boundaries, size bins+1
  std::vector<std::vector<std::int64_t>> count;  // [xi][yi]
  std::vector<std::vector<double>> mean_z;       // valid where count > 0
};

BinnedSurface binned_surface(const VariableTable& table, const std::string& x,
                             const std::string& y, const std::string& z, int bins);

// extremum of b1*x + b2*x^2; ComputeError when b2 == 0
double turning_point(double b1, double b2);

// derivative b1 + 2*b2*x; exactly 0 at the turning point
double marginal_effect(double b1, double b2, double x);

}  // namespace teamscope
