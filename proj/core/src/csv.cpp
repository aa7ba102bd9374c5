#include "missreg/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace missreg {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, ptr};
}

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
      if (trim(line).empty()) continue;
      header = split_line(line);
      for (auto& h : header) h = trim(h);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto row = split_line(line);
    if (row.size() != header.size())
      throw CsvError("row " + std::to_string(cells.size() + 1) + " has " + std::to_string(row.size()) +
                     " cells, header has " + std::to_string(header.size()));
    for (auto& c : row) c = trim(c);
    cells.push_back(std::move(row));
  }
  if (!have_header) throw CsvError("empty CSV input");
  if (cells.empty()) throw CsvError("CSV input has a header but no data rows");

  std::optional<std::size_t> target_col;
  if (options.target) {
    auto it = std::find(header.begin(), header.end(), *options.target);
    if (it == header.end()) throw CsvError("target column '" + *options.target + "' not found");
    target_col = static_cast<std::size_t>(it - header.begin());
  }

  const auto n = static_cast<Index>(cells.size());
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!target_col || c != *target_col) feature_cols.push_back(c);
  if (feature_cols.empty()) throw CsvError("CSV input has no feature columns");

  Eigen::MatrixXd values(n, static_cast<Index>(feature_cols.size()));
  Mask mask(n, static_cast<Index>(feature_cols.size()));
  std::vector<ColumnInfo> info;

  for (std::size_t k = 0; k < feature_cols.size(); ++k) {
    const std::size_t c = feature_cols[k];
    const auto j = static_cast<Index>(k);
    std::optional<ColumnKind> forced;
    if (auto it = options.kinds.find(header[c]); it != options.kinds.end()) forced = it->second;

    bool numeric = true;
    for (Index i = 0; i < n && numeric; ++i) {
      const auto& s = cells[static_cast<std::size_t>(i)][c];
      if (s == options.na_token) continue;
      if (!parse_number(s)) numeric = false;
    }
    if (forced == ColumnKind::continuous && !numeric) {
      for (Index i = 0; i < n; ++i) {
        const auto& s = cells[static_cast<std::size_t>(i)][c];
        if (s != options.na_token && !parse_number(s))
          throw CsvError("unparsable numeric cell '" + s + "' in column '" + header[c] + "' row " +
                         std::to_string(i + 1));
      }
    }
    const ColumnKind kind = forced.value_or(numeric ? ColumnKind::continuous : ColumnKind::categorical);

    if (kind == ColumnKind::continuous) {
      for (Index i = 0; i < n; ++i) {
        const auto& s = cells[static_cast<std::size_t>(i)][c];
        const bool na = s == options.na_token;
        mask(i, j) = na;
        values(i, j) = na ? std::numeric_limits<double>::quiet_NaN() : *parse_number(s);
      }
      info.push_back(ColumnInfo::continuous(header[c]));
    } else {
      std::vector<std::string> levels;
      std::unordered_map<std::string, int> code;
      for (Index i = 0; i < n; ++i) {
        const auto& s = cells[static_cast<std::size_t>(i)][c];
        if (s == options.na_token) {
          mask(i, j) = true;
          values(i, j) = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        auto [it, inserted] = code.try_emplace(s, static_cast<int>(levels.size()));
        if (inserted) levels.push_back(s);
        mask(i, j) = false;
        values(i, j) = it->second;
      }
      info.push_back(ColumnInfo::categorical(header[c], std::move(levels)));
    }
  }

  Dataset out{MaskedMatrix(std::move(values), std::move(mask), std::move(info)), std::nullopt};

  if (target_col) {
    Eigen::VectorXd y(n);
    bool numeric = true;
    for (Index i = 0; i < n; ++i) {
      const auto& s = cells[static_cast<std::size_t>(i)][*target_col];
      if (s == options.na_token)
        throw CsvError("target column '" + header[*target_col] + "' is missing at row " + std::to_string(i + 1));
      if (auto v = parse_number(s)) y(i) = *v;
      else numeric = false;
    }
    Task task = Task::regression;
    if (numeric) {
      const bool zero_one = (y.array() == 0.0 || y.array() == 1.0).all();
      task = options.task.value_or(zero_one ? Task::binary : Task::regression);
    } else {
      std::vector<std::string> labels;
      for (Index i = 0; i < n; ++i) labels.push_back(cells[static_cast<std::size_t>(i)][*target_col]);
      const std::string first = *std::min_element(labels.begin(), labels.end());
      for (Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] == first ? 1.0 : 0.0;
      task = Task::binary;
    }
    out.y = TargetVector(std::move(y), task);
  }
  return out;
}

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::string format_csv(const MaskedMatrix& x, const TargetVector* y, const std::string& target_name,
                       const std::string& na_token) {
  if (y && y->size() != x.rows()) throw DimensionError("format_csv: target length mismatch");
  std::ostringstream out;
  for (Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << quote_if_needed(x.column(j).name);
  if (y) out << "," << quote_if_needed(target_name);
  out << "\n";
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (j) out << ",";
      if (x.missing(i, j)) {
        out << na_token;
      } else if (x.column(j).is_categorical()) {
        out << quote_if_needed(x.column(j).levels.at(static_cast<std::size_t>(x.value(i, j))));
      } else {
        out << format_double(x.value(i, j));
      }
    }
    if (y) out << "," << format_double(y->y(i));
    out << "\n";
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const MaskedMatrix& x, const TargetVector* y,
               const std::string& target_name, const std::string& na_token) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write " + path.string());
  out << format_csv(x, y, target_name, na_token);
}

}  // namespace missreg
