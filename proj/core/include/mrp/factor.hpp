#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mrp {

// One categorical variable: a name plus an ordered list of level labels.
// Level order is fixed at load time and drives group enumeration everywhere.
struct FactorSpec {
  std::string name;
  std::vector<std::string> levels;

  std::size_t size() const { return levels.size(); }
  std::optional<std::size_t> level_index(std::string_view label) const;
  // Throws DataError on unknown labels.
  std::size_t require_level(std::string_view label) const;
};

// A numeric covariate derived from a factor's levels, e.g. a +-0.5 coding of
// gender or a per-state poll average. `center` is subtracted at ingest when
// covariate centering is enabled.
struct CovariateSpec {
  std::string name;
  std::string factor;
  std::unordered_map<std::string, double> values;  // level label -> raw value
  double center = 0.0;
};

struct FactorConfig {
  std::vector<FactorSpec> factors;
  std::vector<CovariateSpec> covariates;
};

// Parses the factor config document (JSON: a "factors" array of
// {name, levels}, plus an optional "covariates" array). Factor and level
// order are preserved as written.
std::vector<FactorSpec> load_factor_specs(const std::string& json_text);
FactorConfig load_factor_config(const std::string& json_text);
FactorConfig load_factor_config_file(const std::filesystem::path& path);
std::string factor_config_to_json(const FactorConfig& config);

// Resolves covariate values against factor levels, applying centering.
class CovariateContext {
 public:
  CovariateContext() = default;
  CovariateContext(std::vector<CovariateSpec> specs, bool center);

  const CovariateSpec* find(std::string_view name) const;
  // Centered value of `spec` at a level label; throws DataError when the
  // label has no mapping.
  double value(const CovariateSpec& spec, const std::string& level) const;
  // Centering adjustment for a raw column value of covariate `name`.
  double adjust(std::string_view name, double raw) const;

  bool centering() const { return center_; }
  const std::vector<CovariateSpec>& specs() const { return specs_; }

 private:
  std::vector<CovariateSpec> specs_;
  bool center_ = true;
};

}  // namespace mrp
