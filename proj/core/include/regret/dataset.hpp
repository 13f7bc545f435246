#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace regret {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sentinel for an unobserved outcome.
inline constexpr std::int8_t kMissing = -1;

/// Raw columns handed to the validating ObservationalDataset constructor.
struct DatasetColumns {
  std::vector<std::string> x_names;
  RowMatrix x;
  std::vector<std::uint8_t> d;
  std::vector<double> pi1;
  std::optional<std::vector<std::uint8_t>> t;
  std::vector<std::int8_t> y;  // kMissing where unobserved
  std::optional<std::vector<int>> z;
  std::string z_name;
  std::optional<std::vector<int>> w;
  std::string w_name;
  std::optional<std::vector<std::string>> group;
  std::string group_name;
};

/// Observational rows (x, d, pi1, t, y, z, w, group) under selective labels:
/// y is observed exactly on rows with d = 1. Immutable once constructed.
class ObservationalDataset {
 public:
  explicit ObservationalDataset(DatasetColumns cols);

  std::size_t size() const { return d_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }

  std::span<const double> x(std::size_t i) const {
    return {x_.data() + i * dim(), dim()};
  }
  const RowMatrix& features() const { return x_; }
  const std::vector<std::string>& x_names() const { return x_names_; }

  int d(std::size_t i) const { return d_[i]; }
  double pi1(std::size_t i) const { return pi1_[i]; }
  /// pi_t(x_i): probability that the proposed policy takes action t.
  double pi(std::size_t i, int t) const { return t == 1 ? pi1_[i] : 1.0 - pi1_[i]; }
  bool has_t() const { return t_.has_value(); }
  int t(std::size_t i) const { return (*t_)[i]; }
  bool has_y(std::size_t i) const { return y_[i] != kMissing; }
  int y(std::size_t i) const { return y_[i]; }

  bool has_z() const { return z_.has_value(); }
  int z(std::size_t i) const { return (*z_)[i]; }
  const std::string& z_name() const { return z_name_; }
  bool has_w() const { return w_.has_value(); }
  int w(std::size_t i) const { return (*w_)[i]; }
  const std::string& w_name() const { return w_name_; }
  bool has_group() const { return group_.has_value(); }
  const std::string& group(std::size_t i) const { return (*group_)[i]; }
  const std::string& group_name() const { return group_name_; }

  std::size_t missing_y_count() const;

  /// Rows at the given indices, in that order (duplicates allowed).
  ObservationalDataset subset(std::span<const std::size_t> rows) const;

  /// Raw column copy, e.g. to attach or replace a column.
  DatasetColumns columns() const;

 private:
  std::vector<std::string> x_names_;
  RowMatrix x_;
  std::vector<std::uint8_t> d_;
  std::vector<double> pi1_;
  std::optional<std::vector<std::uint8_t>> t_;
  std::vector<std::int8_t> y_;
  std::optional<std::vector<int>> z_;
  std::string z_name_;
  std::optional<std::vector<int>> w_;
  std::string w_name_;
  std::optional<std::vector<std::string>> group_;
  std::string group_name_;
};

/// Column-name mapping for CSV ingestion. Empty optional names mean the
/// column is not used. When x_columns is empty every header starting with
/// x_prefix is a covariate, in header order.
struct DatasetSchema {
  std::vector<std::string> x_columns;
  std::string x_prefix = "x_";
  std::string d = "d";
  std::string pi1 = "pi1";
  std::string t = "t";
  std::string y = "y";
  std::optional<std::string> z;
  std::optional<std::string> w;
  std::optional<std::string> group;
};

struct LoadResult {
  ObservationalDataset data;
  /// Rows with d = 0 that carried an outcome value; the value was dropped.
  std::size_t masked_outcomes = 0;
};

/// Reads a header-first CSV. Empty fields and "NA" denote a missing y.
LoadResult load_dataset(const std::filesystem::path& path, const DatasetSchema& schema = {});
LoadResult parse_dataset(std::istream& in, const DatasetSchema& schema = {});

/// Writes the dataset as CSV readable by load_dataset with the default
/// schema (plus the z/w/group names it carries). `extra` columns are
/// appended verbatim, one value per row.
void write_dataset(std::ostream& out, const ObservationalDataset& data,
                   const std::vector<std::pair<std::string, std::vector<int>>>& extra = {});
void save_dataset(const std::filesystem::path& path, const ObservationalDataset& data,
                  const std::vector<std::pair<std::string, std::vector<int>>>& extra = {});

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace regret
