#include "mrp/factor.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mrp/errors.hpp"

namespace mrp {

std::optional<std::size_t> FactorSpec::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == label) return i;
  }
  return std::nullopt;
}

std::size_t FactorSpec::require_level(std::string_view label) const {
  if (auto i = level_index(label)) return *i;
  throw DataError("unknown level '" + std::string(label) + "' for factor '" +
                  name + "'");
}

namespace {

using ojson = nlohmann::ordered_json;

ojson parse_json(const std::string& text) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

std::vector<FactorSpec> factors_from_json(const ojson& doc) {
  if (!doc.contains("factors") || !doc["factors"].is_array()) {
    throw ConfigError("factor config: missing 'factors' array");
  }
  std::vector<FactorSpec> specs;
  std::unordered_set<std::string> names;
  for (const auto& entry : doc["factors"]) {
    FactorSpec spec;
    spec.name = entry.value("name", std::string());
    if (spec.name.empty()) throw ConfigError("factor config: factor without a name");
    if (!names.insert(spec.name).second) {
      throw ConfigError("duplicate factor name '" + spec.name + "'");
    }
    if (!entry.contains("levels") || !entry["levels"].is_array()) {
      throw ConfigError("factor '" + spec.name + "': missing 'levels' array");
    }
    std::unordered_set<std::string> seen;
    for (const auto& lvl : entry["levels"]) {
      std::string label = lvl.get<std::string>();
      if (!seen.insert(label).second) {
        throw ConfigError("factor '" + spec.name + "': duplicate level '" +
                          label + "'");
      }
      spec.levels.push_back(std::move(label));
    }
    if (spec.levels.size() < 2) {
      throw ConfigError("factor '" + spec.name + "' needs at least 2 levels");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<CovariateSpec> covariates_from_json(
    const ojson& doc, const std::vector<FactorSpec>& factors) {
  std::vector<CovariateSpec> covs;
  if (!doc.contains("covariates")) return covs;
  std::unordered_set<std::string> names;
  for (const auto& entry : doc["covariates"]) {
    CovariateSpec cov;
    cov.name = entry.value("name", std::string());
    cov.factor = entry.value("factor", std::string());
    cov.center = entry.value("center", 0.0);
    if (cov.name.empty() || cov.factor.empty()) {
      throw ConfigError("covariate entries need 'name' and 'factor'");
    }
    if (!names.insert(cov.name).second) {
      throw ConfigError("duplicate covariate name '" + cov.name + "'");
    }
    const FactorSpec* factor = nullptr;
    for (const auto& f : factors) {
      if (f.name == cov.factor) factor = &f;
    }
    if (!factor) {
      throw ConfigError("covariate '" + cov.name + "' references unknown factor '" +
                        cov.factor + "'");
    }
    if (!entry.contains("values") || !entry["values"].is_object()) {
      throw ConfigError("covariate '" + cov.name + "': missing 'values' map");
    }
    for (const auto& [label, value] : entry["values"].items()) {
      cov.values[label] = value.get<double>();
    }
    for (const auto& lvl : factor->levels) {
      if (!cov.values.count(lvl)) {
        throw ConfigError("covariate '" + cov.name + "': no value for level '" +
                          lvl + "'");
      }
    }
    covs.push_back(std::move(cov));
  }
  return covs;
}

}  // namespace

std::vector<FactorSpec> load_factor_specs(const std::string& json_text) {
  return factors_from_json(parse_json(json_text));
}

FactorConfig load_factor_config(const std::string& json_text) {
  auto doc = parse_json(json_text);
  FactorConfig config;
  config.factors = factors_from_json(doc);
  config.covariates = covariates_from_json(doc, config.factors);
  return config;
}

FactorConfig load_factor_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open factor config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_factor_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string factor_config_to_json(const FactorConfig& config) {
  ojson doc;
  doc["factors"] = ojson::array();
  for (const auto& f : config.factors) {
    ojson entry;
    entry["name"] = f.name;
    entry["levels"] = f.levels;
    doc["factors"].push_back(entry);
  }
  if (!config.covariates.empty()) {
    doc["covariates"] = ojson::array();
    for (const auto& c : config.covariates) {
      ojson entry;
      entry["name"] = c.name;
      entry["factor"] = c.factor;
      ojson values = ojson::object();
      // Keyed in level order of the referenced factor for stable output.
      for (const auto& f : config.factors) {
        if (f.name != c.factor) continue;
        for (const auto& lvl : f.levels) values[lvl] = c.values.at(lvl);
      }
      entry["values"] = values;
      entry["center"] = c.center;
      doc["covariates"].push_back(entry);
    }
  }
  return doc.dump(2) + "\n";
}

CovariateContext::CovariateContext(std::vector<CovariateSpec> specs, bool center)
    : specs_(std::move(specs)), center_(center) {}

const CovariateSpec* CovariateContext::find(std::string_view name) const {
  for (const auto& s : specs_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

double CovariateContext::value(const CovariateSpec& spec,
                               const std::string& level) const {
  auto it = spec.values.find(level);
  if (it == spec.values.end()) {
    throw DataError("covariate '" + spec.name + "': no value for level '" +
                    level + "'");
  }
  return center_ ? it->second - spec.center : it->second;
}

double CovariateContext::adjust(std::string_view name, double raw) const {
  const CovariateSpec* spec = find(name);
  if (spec && center_) return raw - spec->center;
  return raw;
}

}  // namespace mrp
