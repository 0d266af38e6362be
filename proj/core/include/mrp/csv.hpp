#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrp {

// In-memory delimited table. Parsing follows RFC 4180: comma delimiter,
// optional CRLF line ends, double-quoted fields with "" escapes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  // Throws DataError when the column is absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::filesystem::path& path);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

// Quotes a field only when RFC 4180 requires it.
std::string csv_field(std::string_view raw);

// Shortest round-trip decimal form, locale independent. All numeric output
// files go through this so reruns are byte-identical.
std::string format_double(double x);

// Strict numeric parsers; `context` names the offending column/row in errors.
double parse_double(std::string_view text, const std::string& context);
long long parse_integer(std::string_view text, const std::string& context);

}  // namespace mrp
