#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace usim::csv {

struct Row {
  int line = 0;  // 1-based line in the file
  std::vector<std::string> fields;
};

// RFC4180-ish table: quoted fields, escaped quotes, no multiline fields.
// Header row is required and names the columns.
class Table {
public:
  static Table read_file(const std::string& path);           // throws missing_file
  static Table parse(const std::string& text, std::string name);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }

  bool has_column(const std::string& column) const;
  // column index; throws malformed_row when the header lacks it
  std::size_t column(const std::string& column) const;

  const std::string& field(const Row& row, std::size_t col) const;

private:
  std::string name_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Row> rows_;
};

std::optional<double> parse_double(const std::string& s);
std::optional<long long> parse_int(const std::string& s);
// GTFS clock time H:MM:SS / HH:MM:SS (hours may exceed 24)
std::optional<int> parse_gtfs_time(const std::string& s);

}  // namespace usim::csv
