#pragma once

#include <cstdint>
#include <vector>

#include "mrp/csv.hpp"
#include "mrp/factor.hpp"
#include "mrp/params.hpp"

namespace mrp {

// Training data in model layout: one row per observed cell, with the group
// assignment for every effect column and the (centered) value of every fixed
// covariate precomputed.
struct Dataset {
  std::vector<double> successes;
  std::vector<double> trials;
  std::vector<std::vector<std::uint32_t>> groups;      // [column][row]
  std::vector<std::vector<double>> covariates;         // [fixed][row]

  std::size_t n_rows() const { return successes.size(); }
};

// Ingests one row per training cell: factor level columns, covariate
// columns, `successes`, `trials`. A fixed covariate missing from the table
// is resolved through its level mapping in `cov`; extra columns are ignored.
Dataset build_dataset(const CsvTable& table, const ModelStructure& m,
                      const CovariateContext& cov);

// Single training row appended programmatically (synthetic data path).
struct DatasetBuilder {
  explicit DatasetBuilder(const ModelStructure& m);
  void add_row(const std::vector<std::uint32_t>& column_groups,
               const std::vector<double>& covariate_values, double successes,
               double trials);
  Dataset take() { return std::move(data_); }

 private:
  const ModelStructure& m_;
  Dataset data_;
};

}  // namespace mrp
