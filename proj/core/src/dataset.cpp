#include "regret/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "regret/types.hpp"

namespace regret {

namespace {

template <typename T>
std::optional<std::vector<T>> pick(const std::optional<std::vector<T>>& col,
                                   std::span<const std::size_t> rows) {
  if (!col) return std::nullopt;
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back((*col)[r]);
  return out;
}

std::string row_tag(std::size_t i) { return " (row " + std::to_string(i + 1) + ")"; }

}  // namespace

ObservationalDataset::ObservationalDataset(DatasetColumns cols)
    : x_names_(std::move(cols.x_names)),
      x_(std::move(cols.x)),
      d_(std::move(cols.d)),
      pi1_(std::move(cols.pi1)),
      t_(std::move(cols.t)),
      y_(std::move(cols.y)),
      z_(std::move(cols.z)),
      z_name_(std::move(cols.z_name)),
      w_(std::move(cols.w)),
      w_name_(std::move(cols.w_name)),
      group_(std::move(cols.group)),
      group_name_(std::move(cols.group_name)) {
  const std::size_t n = d_.size();
  if (n == 0) throw DataError("dataset has no rows");
  if (static_cast<std::size_t>(x_.rows()) != n) throw DataError("x row count differs from d");
  if (pi1_.size() != n || y_.size() != n) throw DataError("column lengths differ");
  if (t_ && t_->size() != n) throw DataError("t column length differs");
  if (z_ && z_->size() != n) throw DataError("z column length differs");
  if (w_ && w_->size() != n) throw DataError("w column length differs");
  if (group_ && group_->size() != n) throw DataError("group column length differs");
  if (x_names_.empty()) {
    for (Eigen::Index j = 0; j < x_.cols(); ++j) x_names_.push_back("x_" + std::to_string(j));
  }
  if (x_names_.size() != static_cast<std::size_t>(x_.cols())) {
    throw DataError("inconsistent x dimension");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (d_[i] > 1) throw DataError("non-binary d" + row_tag(i));
    if (!(pi1_[i] >= 0.0 && pi1_[i] <= 1.0)) throw DataError("pi1 out of range" + row_tag(i));
    if (t_ && (*t_)[i] > 1) throw DataError("non-binary t" + row_tag(i));
    if (y_[i] != kMissing && y_[i] != 0 && y_[i] != 1) throw DataError("non-binary y" + row_tag(i));
    if (d_[i] == 1 && y_[i] == kMissing) throw DataError("missing y on a d=1 row" + row_tag(i));
    if (d_[i] == 0 && y_[i] != kMissing) throw DataError("observed y on a d=0 row" + row_tag(i));
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(static_cast<Eigen::Index>(i), j))) {
        throw DataError("non-finite covariate" + row_tag(i));
      }
    }
    if (z_ && (*z_)[i] < 0) throw DataError("negative instrument level" + row_tag(i));
    if (w_ && (*w_)[i] < 0) throw DataError("negative proxy level" + row_tag(i));
  }
}

std::size_t ObservationalDataset::missing_y_count() const {
  return static_cast<std::size_t>(std::count(y_.begin(), y_.end(), kMissing));
}

ObservationalDataset ObservationalDataset::subset(std::span<const std::size_t> rows) const {
  DatasetColumns c;
  c.x_names = x_names_;
  c.x.resize(static_cast<Eigen::Index>(rows.size()), x_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) throw DataError("subset index out of range");
    c.x.row(static_cast<Eigen::Index>(k)) = x_.row(static_cast<Eigen::Index>(rows[k]));
  }
  c.d.reserve(rows.size());
  c.pi1.reserve(rows.size());
  c.y.reserve(rows.size());
  for (std::size_t r : rows) {
    c.d.push_back(d_[r]);
    c.pi1.push_back(pi1_[r]);
    c.y.push_back(y_[r]);
  }
  c.t = pick(t_, rows);
  c.z = pick(z_, rows);
  c.z_name = z_name_;
  c.w = pick(w_, rows);
  c.w_name = w_name_;
  c.group = pick(group_, rows);
  c.group_name = group_name_;
  return ObservationalDataset(std::move(c));
}

DatasetColumns ObservationalDataset::columns() const {
  DatasetColumns c;
  c.x_names = x_names_;
  c.x = x_;
  c.d = d_;
  c.pi1 = pi1_;
  c.t = t_;
  c.y = y_;
  c.z = z_;
  c.z_name = z_name_;
  c.w = w_;
  c.w_name = w_name_;
  c.group = group_;
  c.group_name = group_name_;
  return c;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA"; }

double parse_real(const std::string& s, const std::string& col, std::size_t row) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError("column '" + col + "' has non-numeric value '" + s + "'" + row_tag(row));
  }
  return v;
}

int parse_binary(const std::string& s, const std::string& col, std::size_t row) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw DataError("non-binary " + col + " value '" + s + "'" + row_tag(row));
}

int parse_level(const std::string& s, const std::string& col, std::size_t row) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw DataError("column '" + col + "' needs nonnegative integer levels" + row_tag(row));
  }
  return v;
}

}  // namespace

LoadResult parse_dataset(std::istream& in, const DatasetSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: header row required");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!index.emplace(header[j], j).second) throw DataError("duplicate column '" + header[j] + "'");
  }
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& name) {
    auto j = find(name);
    if (!j) throw DataError("missing required column '" + name + "'");
    return *j;
  };

  std::vector<std::string> x_names = schema.x_columns;
  if (x_names.empty()) {
    for (const auto& h : header) {
      if (!schema.x_prefix.empty() && h.rfind(schema.x_prefix, 0) == 0) x_names.push_back(h);
    }
  }
  std::vector<std::size_t> x_idx;
  for (const auto& name : x_names) x_idx.push_back(require(name));

  const std::size_t d_idx = require(schema.d);
  const std::size_t y_idx = require(schema.y);
  const auto pi_idx = find(schema.pi1);
  const auto t_idx = find(schema.t);
  if (!pi_idx && !t_idx) {
    throw DataError("missing required column: need '" + schema.pi1 + "' or '" + schema.t + "'");
  }
  const auto z_idx = schema.z ? std::optional(require(*schema.z)) : std::nullopt;
  const auto w_idx = schema.w ? std::optional(require(*schema.w)) : std::nullopt;
  const auto g_idx = schema.group ? std::optional(require(*schema.group)) : std::nullopt;

  std::vector<std::vector<double>> xs;
  DatasetColumns c;
  c.x_names = x_names;
  std::vector<std::uint8_t> t;
  std::vector<int> z, w;
  std::vector<std::string> g;
  std::size_t masked = 0;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    for (auto& s : f) s = trim(s);
    if (f.size() != header.size()) {
      throw DataError("inconsistent field count: expected " + std::to_string(header.size()) +
                      ", got " + std::to_string(f.size()) + row_tag(row));
    }
    std::vector<double> xr;
    xr.reserve(x_idx.size());
    for (std::size_t k = 0; k < x_idx.size(); ++k) {
      if (is_missing(f[x_idx[k]])) throw DataError("missing covariate '" + x_names[k] + "'" + row_tag(row));
      xr.push_back(parse_real(f[x_idx[k]], x_names[k], row));
    }
    xs.push_back(std::move(xr));

    const int d = parse_binary(f[d_idx], schema.d, row);
    c.d.push_back(static_cast<std::uint8_t>(d));

    std::optional<int> tv;
    if (t_idx) {
      tv = parse_binary(f[*t_idx], schema.t, row);
      t.push_back(static_cast<std::uint8_t>(*tv));
    }
    if (pi_idx) {
      const double p = parse_real(f[*pi_idx], schema.pi1, row);
      if (!(p >= 0.0 && p <= 1.0)) throw DataError("pi1 out of range" + row_tag(row));
      c.pi1.push_back(p);
    } else {
      c.pi1.push_back(static_cast<double>(*tv));
    }

    const std::string& ys = f[y_idx];
    if (d == 0) {
      if (!is_missing(ys)) ++masked;
      c.y.push_back(kMissing);
    } else {
      if (is_missing(ys)) throw DataError("missing y on a d=1 row" + row_tag(row));
      c.y.push_back(static_cast<std::int8_t>(parse_binary(ys, schema.y, row)));
    }
    if (z_idx) z.push_back(parse_level(f[*z_idx], *schema.z, row));
    if (w_idx) w.push_back(parse_level(f[*w_idx], *schema.w, row));
    if (g_idx) g.push_back(f[*g_idx]);
    ++row;
  }

  c.x.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(x_idx.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < x_idx.size(); ++j) {
      c.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i][j];
    }
  }
  if (t_idx) c.t = std::move(t);
  if (z_idx) {
    c.z = std::move(z);
    c.z_name = *schema.z;
  }
  if (w_idx) {
    c.w = std::move(w);
    c.w_name = *schema.w;
  }
  if (g_idx) {
    c.group = std::move(g);
    c.group_name = *schema.group;
  }
  return LoadResult{ObservationalDataset(std::move(c)), masked};
}

LoadResult load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, schema);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const ObservationalDataset& data,
                   const std::vector<std::pair<std::string, std::vector<int>>>& extra) {
  for (const auto& [name, values] : extra) {
    if (values.size() != data.size()) throw DataError("extra column '" + name + "' has wrong length");
  }
  for (const auto& name : data.x_names()) out << name << ',';
  out << "d,pi1";
  if (data.has_t()) out << ",t";
  out << ",y";
  if (data.has_z()) out << ',' << data.z_name();
  if (data.has_w()) out << ',' << data.w_name();
  if (data.has_group()) out << ',' << data.group_name();
  for (const auto& e : extra) out << ',' << e.first;
  out << '\n';

  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x(i)) out << format_double(v) << ',';
    out << data.d(i) << ',' << format_double(data.pi1(i));
    if (data.has_t()) out << ',' << data.t(i);
    out << ',';
    if (data.has_y(i)) out << data.y(i);
    if (data.has_z()) out << ',' << data.z(i);
    if (data.has_w()) out << ',' << data.w(i);
    if (data.has_group()) {
      const auto& g = data.group(i);
      if (g.find_first_of(",\"") != std::string::npos) {
        std::string q = "\"";
        for (char ch : g) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        out << ',' << q << '"';
      } else {
        out << ',' << g;
      }
    }
    for (const auto& e : extra) out << ',' << e.second[i];
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const ObservationalDataset& data,
                  const std::vector<std::pair<std::string, std::vector<int>>>& extra) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(out, data, extra);
}

}  // namespace regret
