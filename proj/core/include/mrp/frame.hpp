#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrp/csv.hpp"
#include "mrp/factor.hpp"

namespace mrp {

// One demographic cell: a level index per factor plus a population count.
struct Cell {
  std::vector<std::uint32_t> key;
  std::int64_t population = 0;
};

// The poststratification table. Only observed level combinations are stored;
// absent combinations are not zero-filled. Immutable after construction.
class Frame {
 public:
  Frame(std::vector<FactorSpec> factors, std::vector<Cell> cells);

  const std::vector<FactorSpec>& factors() const { return factors_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  std::int64_t total_population() const { return total_population_; }

  std::optional<std::size_t> find(const std::vector<std::uint32_t>& key) const;
  // Position of a named factor; throws DataError when absent.
  std::size_t factor_position(std::string_view name) const;

  std::string level_label(std::size_t factor_pos, std::uint32_t level) const {
    return factors_[factor_pos].levels[level];
  }

 private:
  std::vector<FactorSpec> factors_;
  std::vector<Cell> cells_;
  std::unordered_map<std::string, std::size_t> index_;  // packed key -> position
  std::int64_t total_population_ = 0;

  static std::string pack_key(const std::vector<std::uint32_t>& key);
};

// Builds a frame from tabular records with one column per factor plus a
// `population` column. Duplicate keys are summed; fractional populations are
// rounded half-to-even; negative populations are rejected.
Frame build_frame(std::vector<FactorSpec> specs, const CsvTable& rows);

CsvTable frame_to_table(const Frame& frame);

// Assignment of every frame cell to a level combination of `term` factors.
// Groups are enumerated in lexicographic level order over the full cross
// product, so cardinality is the product of the level counts and unobserved
// combinations are legal (they simply have no assigned cells).
struct GroupMap {
  std::vector<std::string> term;
  std::size_t cardinality = 0;
  std::vector<std::uint32_t> assignment;  // one entry per frame cell
};

GroupMap group_map(const Frame& frame, const std::vector<std::string>& term);

// Mixed-radix group index of one key over the given factor positions; the
// first factor varies slowest.
std::uint32_t group_index(std::span<const std::uint32_t> key,
                          std::span<const std::size_t> factor_positions,
                          std::span<const std::size_t> level_counts);

}  // namespace mrp
