#include "mrp/dataset.hpp"

#include <cmath>

#include "mrp/errors.hpp"
#include "mrp/frame.hpp"

namespace mrp {

Dataset build_dataset(const CsvTable& table, const ModelStructure& m,
                      const CovariateContext& cov) {
  const std::size_t n = table.rows.size();
  Dataset d;
  d.successes.reserve(n);
  d.trials.reserve(n);
  d.groups.assign(m.n_columns(), {});
  d.covariates.assign(m.n_fixed(), {});

  // Factor columns needed by any effect column.
  std::vector<int> factor_col(m.factors.size(), -1);
  auto require_factor_col = [&](std::size_t pos) {
    if (factor_col[pos] < 0) {
      factor_col[pos] = static_cast<int>(table.column(m.factors[pos].name));
    }
  };
  for (const auto& col : m.columns) {
    for (std::size_t pos : col.factor_positions) require_factor_col(pos);
  }

  // Fixed covariates: direct column if present, else level mapping.
  struct CovSource {
    int column = -1;                    // CSV column with raw values
    const CovariateSpec* spec = nullptr;
    int factor_column = -1;             // label column for mapped covariates
  };
  std::vector<CovSource> sources(m.n_fixed());
  for (std::size_t j = 0; j < m.n_fixed(); ++j) {
    const std::string& name = m.fixed[j];
    if (auto c = table.find_column(name)) {
      sources[j].column = static_cast<int>(*c);
      sources[j].spec = cov.find(name);
    } else if (const CovariateSpec* spec = cov.find(name)) {
      sources[j].spec = spec;
      sources[j].factor_column = static_cast<int>(table.column(spec->factor));
    } else {
      throw DataError("covariate '" + name +
                      "' has neither a data column nor a level mapping");
    }
  }

  std::size_t succ_col = table.column("successes");
  std::size_t trial_col = table.column("trials");

  std::vector<std::uint32_t> levels(m.factors.size(), 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::string ctx = "row " + std::to_string(r + 1);

    long long succ = parse_integer(row[succ_col], ctx + " successes");
    long long tri = parse_integer(row[trial_col], ctx + " trials");
    if (succ < 0 || tri < 0 || succ > tri) {
      throw DataError(ctx + ": successes/trials must satisfy 0 <= s <= t");
    }
    d.successes.push_back(static_cast<double>(succ));
    d.trials.push_back(static_cast<double>(tri));

    for (std::size_t pos = 0; pos < m.factors.size(); ++pos) {
      if (factor_col[pos] >= 0) {
        levels[pos] = static_cast<std::uint32_t>(
            m.factors[pos].require_level(row[factor_col[pos]]));
      }
    }
    for (std::size_t c = 0; c < m.n_columns(); ++c) {
      const EffectColumn& col = m.columns[c];
      d.groups[c].push_back(group_index(levels, col.factor_positions,
                                        col.level_counts));
    }
    for (std::size_t j = 0; j < m.n_fixed(); ++j) {
      const CovSource& src = sources[j];
      double value;
      if (src.column >= 0) {
        double raw = parse_double(row[src.column], ctx + " " + m.fixed[j]);
        value = cov.adjust(m.fixed[j], raw);
      } else {
        value = cov.value(*src.spec, row[src.factor_column]);
      }
      d.covariates[j].push_back(value);
    }
  }
  return d;
}

DatasetBuilder::DatasetBuilder(const ModelStructure& m) : m_(m) {
  data_.groups.assign(m.n_columns(), {});
  data_.covariates.assign(m.n_fixed(), {});
}

void DatasetBuilder::add_row(const std::vector<std::uint32_t>& column_groups,
                             const std::vector<double>& covariate_values,
                             double successes, double trials) {
  if (column_groups.size() != m_.n_columns() ||
      covariate_values.size() != m_.n_fixed()) {
    throw DataError("dataset row arity mismatch");
  }
  for (std::size_t c = 0; c < column_groups.size(); ++c) {
    if (column_groups[c] >= m_.columns[c].cardinality) {
      throw DataError("group assignment out of range for column '" +
                      m_.columns[c].label + "'");
    }
    data_.groups[c].push_back(column_groups[c]);
  }
  for (std::size_t j = 0; j < covariate_values.size(); ++j) {
    data_.covariates[j].push_back(covariate_values[j]);
  }
  data_.successes.push_back(successes);
  data_.trials.push_back(trials);
}

}  // namespace mrp
