#include "mrp/frame.hpp"

#include <cmath>
#include <cstring>

#include "mrp/errors.hpp"

namespace mrp {

std::string Frame::pack_key(const std::vector<std::uint32_t>& key) {
  std::string packed(key.size() * sizeof(std::uint32_t), '\0');
  std::memcpy(packed.data(), key.data(), packed.size());
  return packed;
}

Frame::Frame(std::vector<FactorSpec> factors, std::vector<Cell> cells)
    : factors_(std::move(factors)), cells_(std::move(cells)) {
  index_.reserve(cells_.size());
  for (std::size_t pos = 0; pos < cells_.size(); ++pos) {
    const Cell& cell = cells_[pos];
    if (cell.key.size() != factors_.size()) {
      throw DataError("cell key arity does not match factor count");
    }
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      if (cell.key[f] >= factors_[f].size()) {
        throw DataError("cell level index out of range for factor '" +
                        factors_[f].name + "'");
      }
    }
    if (cell.population < 0) throw DataError("negative population");
    if (!index_.emplace(pack_key(cell.key), pos).second) {
      throw DataError("duplicate cell key");
    }
    total_population_ += cell.population;
  }
}

std::optional<std::size_t> Frame::find(const std::vector<std::uint32_t>& key) const {
  auto it = index_.find(pack_key(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Frame::factor_position(std::string_view name) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].name == name) return i;
  }
  throw DataError("unknown factor '" + std::string(name) + "'");
}

Frame build_frame(std::vector<FactorSpec> specs, const CsvTable& rows) {
  std::vector<std::size_t> factor_cols(specs.size());
  std::vector<bool> used(rows.header.size(), false);
  for (std::size_t f = 0; f < specs.size(); ++f) {
    factor_cols[f] = rows.column(specs[f].name);
    used[factor_cols[f]] = true;
  }
  std::size_t pop_col = rows.column("population");
  used[pop_col] = true;
  for (std::size_t c = 0; c < rows.header.size(); ++c) {
    if (!used[c]) throw DataError("unexpected column '" + rows.header[c] + "'");
  }

  std::vector<Cell> cells;
  std::unordered_map<std::string, std::size_t> positions;
  std::string packed;
  for (std::size_t r = 0; r < rows.rows.size(); ++r) {
    const auto& row = rows.rows[r];
    Cell cell;
    cell.key.resize(specs.size());
    for (std::size_t f = 0; f < specs.size(); ++f) {
      cell.key[f] = static_cast<std::uint32_t>(
          specs[f].require_level(row[factor_cols[f]]));
    }
    double raw = parse_double(row[pop_col], "population row " + std::to_string(r + 1));
    if (!std::isfinite(raw) || raw < 0.0) {
      throw DataError("population row " + std::to_string(r + 1) +
                      ": negative or non-finite population");
    }
    // nearbyint under the default rounding mode is round-half-to-even, the
    // documented ingest rule for fractional census weights.
    cell.population = static_cast<std::int64_t>(std::nearbyint(raw));

    packed.assign(reinterpret_cast<const char*>(cell.key.data()),
                  cell.key.size() * sizeof(std::uint32_t));
    auto [it, inserted] = positions.emplace(packed, cells.size());
    if (inserted) {
      cells.push_back(std::move(cell));
    } else {
      cells[it->second].population += cell.population;
    }
  }
  return Frame(std::move(specs), std::move(cells));
}

CsvTable frame_to_table(const Frame& frame) {
  CsvTable table;
  for (const auto& f : frame.factors()) table.header.push_back(f.name);
  table.header.push_back("population");
  for (const auto& cell : frame.cells()) {
    std::vector<std::string> row;
    row.reserve(cell.key.size() + 1);
    for (std::size_t f = 0; f < cell.key.size(); ++f) {
      row.push_back(frame.level_label(f, cell.key[f]));
    }
    row.push_back(std::to_string(cell.population));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::uint32_t group_index(std::span<const std::uint32_t> key,
                          std::span<const std::size_t> factor_positions,
                          std::span<const std::size_t> level_counts) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < factor_positions.size(); ++i) {
    idx = idx * level_counts[i] + key[factor_positions[i]];
  }
  return static_cast<std::uint32_t>(idx);
}

GroupMap group_map(const Frame& frame, const std::vector<std::string>& term) {
  if (term.empty()) throw DataError("empty term");
  std::vector<std::size_t> positions(term.size());
  std::vector<std::size_t> counts(term.size());
  std::size_t cardinality = 1;
  for (std::size_t i = 0; i < term.size(); ++i) {
    positions[i] = frame.factor_position(term[i]);
    counts[i] = frame.factors()[positions[i]].size();
    cardinality *= counts[i];
  }

  GroupMap map;
  map.term = term;
  map.cardinality = cardinality;
  map.assignment.reserve(frame.size());
  for (const auto& cell : frame.cells()) {
    map.assignment.push_back(group_index(cell.key, positions, counts));
  }
  return map;
}

}  // namespace mrp
