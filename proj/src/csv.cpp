#include "usim/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "usim/error.hpp"

namespace usim::csv {

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& where) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw_error(errc::malformed_row, where + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Table Table::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(errc::missing_file, "cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

Table Table::parse(const std::string& text, std::string name) {
  Table table;
  table.name_ = std::move(name);

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_line(line, table.name_ + ":" + std::to_string(line_no));
    if (table.header_.empty()) {
      table.header_ = std::move(fields);
      for (std::size_t i = 0; i < table.header_.size(); ++i)
        table.index_.emplace(table.header_[i], i);
    } else {
      table.rows_.push_back(Row{line_no, std::move(fields)});
    }
  }
  if (table.header_.empty())
    throw_error(errc::malformed_row, table.name_ + ": missing header row");
  return table;
}

bool Table::has_column(const std::string& column) const { return index_.contains(column); }

std::size_t Table::column(const std::string& column) const {
  auto it = index_.find(column);
  if (it == index_.end())
    throw_error(errc::malformed_row, name_ + ": missing required column '" + column + "'");
  return it->second;
}

const std::string& Table::field(const Row& row, std::size_t col) const {
  if (col >= row.fields.size())
    throw_error(errc::malformed_row,
                name_ + ":" + std::to_string(row.line) + ": too few fields");
  return row.fields[col];
}

std::optional<double> parse_double(const std::string& s) {
  double value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(const std::string& s) {
  long long value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<int> parse_gtfs_time(const std::string& s) {
  int h = 0, m = 0, sec = 0;
  int part = 0, value = 0, digits = 0;
  for (char c : s) {
    if (c == ':') {
      if (digits == 0 || part >= 2) return std::nullopt;
      (part == 0 ? h : m) = value;
      value = 0;
      digits = 0;
      ++part;
    } else if (c >= '0' && c <= '9') {
      value = value * 10 + (c - '0');
      ++digits;
    } else {
      return std::nullopt;
    }
  }
  if (part != 2 || digits == 0) return std::nullopt;
  sec = value;
  if (m > 59 || sec > 59) return std::nullopt;
  return h * 3600 + m * 60 + sec;
}

}  // namespace usim::csv
