#include "mrp/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrp/errors.hpp"
#include "mrp/math.hpp"
#include "mrp/model.hpp"
#include "mrp/rng.hpp"

namespace mrp {

namespace {

using ojson = nlohmann::ordered_json;

SynthModelParams model_params_from_json(const ojson& doc, const char* key) {
  SynthModelParams params;
  if (!doc.contains(key)) return params;
  const auto& entry = doc[key];
  params.mu = entry.value("mu", 0.0);
  if (entry.contains("fixed")) {
    for (const auto& [name, value] : entry["fixed"].items()) {
      params.fixed[name] = value.get<double>();
    }
  }
  return params;
}

}  // namespace

SynthSpec load_synth_spec(const std::string& json_text) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth spec: invalid JSON: ") + e.what());
  }

  SynthSpec spec;
  FactorConfig fc = load_factor_config(json_text);
  spec.factors = std::move(fc.factors);
  spec.covariates = std::move(fc.covariates);

  if (!doc.contains("formula")) throw ConfigError("synth spec: missing 'formula'");
  spec.formula = doc["formula"].get<std::string>();
  spec.seed = doc.value("seed", 0ULL);
  if (doc.contains("population_range")) {
    const auto& range = doc["population_range"];
    if (!range.is_array() || range.size() != 2) {
      throw ConfigError("synth spec: 'population_range' must be [min, max]");
    }
    spec.population_min = range[0].get<std::int64_t>();
    spec.population_max = range[1].get<std::int64_t>();
  }
  if (spec.population_min < 0 || spec.population_max < spec.population_min) {
    throw ConfigError("synth spec: invalid population range");
  }
  spec.poll_size = doc.value("poll_size", 10000LL);
  if (spec.poll_size < 1) throw ConfigError("synth spec: poll_size must be >= 1");
  spec.center_covariates = doc.value("center_covariates", true);
  spec.turnout = model_params_from_json(doc, "turnout");
  spec.preference = model_params_from_json(doc, "preference");

  if (doc.contains("bias")) {
    for (const auto& [factor, levels] : doc["bias"].items()) {
      const FactorSpec* fs = nullptr;
      for (const auto& f : spec.factors) {
        if (f.name == factor) fs = &f;
      }
      if (!fs) throw ConfigError("synth spec: bias references unknown factor '" +
                                 factor + "'");
      for (const auto& [level, coef] : levels.items()) {
        fs->require_level(level);
        spec.bias[factor][level] = coef.get<double>();
      }
    }
  }
  return spec;
}

SynthSpec load_synth_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open synth spec '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return load_synth_spec(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ModelStructure synth_structure(const SynthSpec& spec) {
  return bind_model(parse_formula(spec.formula), spec.factors);
}

namespace {

// Full-cross-product frame with uniform populations.
Frame draw_frame(const SynthSpec& spec, Rng& rng) {
  std::size_t n_cells = 1;
  for (const auto& f : spec.factors) n_cells *= f.size();

  std::vector<Cell> cells;
  cells.reserve(n_cells);
  std::vector<std::uint32_t> key(spec.factors.size(), 0);
  const double span =
      static_cast<double>(spec.population_max - spec.population_min + 1);
  for (std::size_t i = 0; i < n_cells; ++i) {
    Cell cell;
    cell.key = key;
    cell.population =
        spec.population_min +
        static_cast<std::int64_t>(rng.uniform() * span);
    cells.push_back(std::move(cell));
    // Advance the mixed-radix key, last factor fastest.
    for (std::size_t f = key.size(); f-- > 0;) {
      if (++key[f] < spec.factors[f].size()) break;
      key[f] = 0;
    }
  }
  return Frame(spec.factors, std::move(cells));
}

ParamVector draw_params(const ModelStructure& m, const SynthModelParams& pinned,
                        Rng& rng) {
  ParamVector p;
  p.mu = pinned.mu;
  p.fixed.resize(m.n_fixed());
  for (std::size_t j = 0; j < m.n_fixed(); ++j) {
    auto it = pinned.fixed.find(m.fixed[j]);
    p.fixed[j] = it != pinned.fixed.end() ? it->second : 0.0;
  }

  const std::size_t k = m.n_columns();
  p.shares.resize(k);
  if (k > 0) {
    // Dirichlet(1): normalized exponentials. Gamma(1,1): one exponential.
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      p.shares[c] = rng.exponential();
      total += p.shares[c];
    }
    p.shares /= total;
    p.scale = rng.exponential();
  }
  Eigen::VectorXd tau = effect_scale(p.shares, p.scale, k);
  p.effects.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd beta(m.columns[c].cardinality);
    for (Eigen::Index l = 0; l < beta.size(); ++l) {
      beta[l] = rng.normal(0.0, tau[c]);
    }
    p.effects.push_back(std::move(beta));
  }
  return p;
}

Eigen::VectorXd cell_probabilities(const ParamVector& p, const Frame& frame,
                                   const ModelStructure& m,
                                   const CovariateContext& cov) {
  CellEvaluator eval(frame, m, cov);
  Eigen::VectorXd probs(frame.size());
  for (std::size_t g = 0; g < frame.size(); ++g) {
    const Cell& cell = frame.cells()[g];
    probs[g] = predict_prob(p, eval.assignments(cell), eval.covariates(cell), m);
  }
  return probs;
}

}  // namespace

TruthBundle simulate_electorate(const SynthSpec& spec, std::uint64_t seed) {
  ModelStructure m = synth_structure(spec);
  Rng rng(seed);

  Frame frame = draw_frame(spec, rng);
  ParamVector turnout = draw_params(m, spec.turnout, rng);
  ParamVector preference = draw_params(m, spec.preference, rng);

  CovariateContext cov(spec.covariates, spec.center_covariates);
  Eigen::VectorXd phi = cell_probabilities(turnout, frame, m, cov);
  Eigen::VectorXd alpha = cell_probabilities(preference, frame, m, cov);

  return TruthBundle{std::move(frame), std::move(turnout),
                     std::move(preference), std::move(phi), std::move(alpha)};
}

PollCounts simulate_poll_counts(const TruthBundle& bundle, const SynthSpec& spec,
                                std::uint64_t seed, ModelKind kind) {
  const Frame& frame = bundle.frame;
  Rng rng(seed);

  // Sampling weights: N_g * exp(sum of bias coefficients for the cell).
  std::vector<double> cumulative(frame.size());
  double total = 0.0;
  for (std::size_t g = 0; g < frame.size(); ++g) {
    const Cell& cell = frame.cells()[g];
    double score = 0.0;
    for (const auto& [factor, levels] : spec.bias) {
      std::size_t pos = frame.factor_position(factor);
      auto it = levels.find(frame.level_label(pos, cell.key[pos]));
      if (it != levels.end()) score += it->second;
    }
    total += static_cast<double>(cell.population) * std::exp(score);
    cumulative[g] = total;
  }
  if (!(total > 0.0)) throw DataError("simulate_poll: zero total sampling weight");

  const Eigen::VectorXd& prob = kind == ModelKind::turnout ? bundle.phi
                                                           : bundle.alpha;
  std::vector<long long> trials(frame.size(), 0), successes(frame.size(), 0);
  for (long long r = 0; r < spec.poll_size; ++r) {
    std::size_t g = rng.categorical(cumulative);
    ++trials[g];
    if (rng.bernoulli(prob[g])) ++successes[g];
  }

  PollCounts counts;
  for (std::size_t g = 0; g < frame.size(); ++g) {
    if (trials[g] == 0) continue;
    counts.cell.push_back(g);
    counts.successes.push_back(successes[g]);
    counts.trials.push_back(trials[g]);
  }
  return counts;
}

Dataset simulate_poll(const TruthBundle& bundle, const SynthSpec& spec,
                      std::uint64_t seed, ModelKind kind) {
  PollCounts counts = simulate_poll_counts(bundle, spec, seed, kind);
  ModelStructure m = synth_structure(spec);
  CovariateContext cov(spec.covariates, spec.center_covariates);
  CellEvaluator eval(bundle.frame, m, cov);

  DatasetBuilder builder(m);
  for (std::size_t i = 0; i < counts.cell.size(); ++i) {
    const Cell& cell = bundle.frame.cells()[counts.cell[i]];
    builder.add_row(eval.assignments(cell), eval.covariates(cell),
                    static_cast<double>(counts.successes[i]),
                    static_cast<double>(counts.trials[i]));
  }
  return builder.take();
}

CsvTable poll_to_table(const PollCounts& counts, const TruthBundle& bundle,
                       const SynthSpec& spec) {
  const Frame& frame = bundle.frame;
  ModelStructure m = synth_structure(spec);

  CsvTable table;
  for (const auto& f : frame.factors()) table.header.push_back(f.name);
  // Raw (uncentered) covariate columns; ingest recenters them.
  std::vector<const CovariateSpec*> covs;
  std::vector<std::size_t> cov_pos;
  for (const auto& name : m.fixed) {
    for (const auto& c : spec.covariates) {
      if (c.name == name) {
        covs.push_back(&c);
        cov_pos.push_back(frame.factor_position(c.factor));
        table.header.push_back(c.name);
      }
    }
  }
  table.header.push_back("successes");
  table.header.push_back("trials");

  for (std::size_t i = 0; i < counts.cell.size(); ++i) {
    const Cell& cell = frame.cells()[counts.cell[i]];
    std::vector<std::string> row;
    for (std::size_t f = 0; f < cell.key.size(); ++f) {
      row.push_back(frame.level_label(f, cell.key[f]));
    }
    for (std::size_t j = 0; j < covs.size(); ++j) {
      const std::string& label = frame.level_label(cov_pos[j], cell.key[cov_pos[j]]);
      row.push_back(format_double(covs[j]->values.at(label)));
    }
    row.push_back(std::to_string(counts.successes[i]));
    row.push_back(std::to_string(counts.trials[i]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

RecoveryReport recovery_report(const TruthBundle& truth,
                               const CellPredictions& est) {
  const Eigen::Index n = static_cast<Eigen::Index>(truth.frame.size());
  RecoveryReport report;

  auto metrics = [&](const Eigen::VectorXd& estimate,
                     const Eigen::VectorXd& target, std::optional<double>& rmse,
                     std::optional<double>& max_abs,
                     std::optional<double>& weighted_rmse) {
    if (estimate.size() != n) {
      throw DataError("recovery_report: frame mismatch");
    }
    double ss = 0.0, wss = 0.0, wtot = 0.0, worst = 0.0;
    for (Eigen::Index g = 0; g < n; ++g) {
      double err = estimate[g] - target[g];
      ss += err * err;
      double w = static_cast<double>(truth.frame.cells()[g].population);
      wss += w * err * err;
      wtot += w;
      worst = std::max(worst, std::abs(err));
    }
    rmse = std::sqrt(ss / static_cast<double>(n));
    max_abs = worst;
    weighted_rmse = std::sqrt(wss / wtot);
  };

  if (est.has_turnout()) {
    metrics(est.turnout, truth.phi, report.rmse_phi, report.max_abs_phi,
            report.weighted_rmse_phi);
  }
  if (est.has_preference()) {
    metrics(est.preference, truth.alpha, report.rmse_alpha,
            report.max_abs_alpha, report.weighted_rmse_alpha);
  }
  return report;
}

}  // namespace mrp
