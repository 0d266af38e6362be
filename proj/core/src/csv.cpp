#include "mrp/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mrp/errors.hpp"

namespace mrp {

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw DataError("missing column '" + std::string(name) + "'");
}

namespace {

std::vector<std::vector<std::string>> parse_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field.push_back(c);
        ++i;
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
      end_record();
      i += 2;
    } else if (c == '\n') {
      end_record();
      ++i;
    } else {
      field.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  auto records = parse_records(text);
  if (records.empty()) throw DataError("empty table: no header row");

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("row " + std::to_string(r) + " has " +
                      std::to_string(records[r].size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string csv_field(std::string_view raw) {
  bool needs_quote = raw.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quote) return std::string(raw);
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_record = [&](const std::vector<std::string>& rec) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i) out << ',';
      out << csv_field(rec[i]);
    }
    out << '\n';
  };
  write_record(table.header);
  for (const auto& row : table.rows) write_record(row);
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, table);
}

std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(context + ": malformed number '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(std::string_view text, const std::string& context) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(context + ": malformed integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace mrp
