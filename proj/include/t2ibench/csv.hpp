#pragma once

// Minimal RFC-4180 CSV reading and writing. Output always uses LF line
// endings; input accepts LF or CRLF and skips a leading UTF-8 BOM.

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace t2ibench::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;

  // Index of a header column, or -1 when absent.
  int column(std::string_view name) const;
  // Like column() but throws a format error naming `source`.
  std::size_t require_column(std::string_view name, const std::string& source) const;
};

std::vector<Row> parse(std::string_view text);

// Parses a file with a header row. Every data row must have the header's width.
Table read_table(const std::string& path);
Table parse_table(std::string_view text, const std::string& source);

std::string escape_field(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace t2ibench::csv
