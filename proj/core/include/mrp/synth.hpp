#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrp/dataset.hpp"
#include "mrp/factor.hpp"
#include "mrp/frame.hpp"
#include "mrp/poststrat.hpp"

namespace mrp {

// Ground-truth generator settings. Variance parameters are drawn from the
// model's own priors; the intercept and fixed slopes are pinned here because
// their priors are improper.
struct SynthModelParams {
  double mu = 0.0;
  std::map<std::string, double> fixed;  // covariate name -> coefficient
};

struct SynthSpec {
  std::vector<FactorSpec> factors;
  std::vector<CovariateSpec> covariates;
  std::string formula;  // shared structure for turnout and preference
  std::uint64_t seed = 0;
  std::int64_t population_min = 100;
  std::int64_t population_max = 1000;
  long long poll_size = 10000;
  bool center_covariates = true;
  SynthModelParams turnout;
  SynthModelParams preference;
  // Selection-bias log-weights: factor -> level -> coefficient. Bias moves
  // cell sampling probability only, never within-cell outcomes.
  std::map<std::string, std::map<std::string, double>> bias;
};

SynthSpec load_synth_spec(const std::string& json_text);
SynthSpec load_synth_spec_file(const std::filesystem::path& path);

// A full synthetic electorate: the frame over the complete cross product and
// the generating parameters and probabilities for both models.
struct TruthBundle {
  Frame frame;
  ParamVector turnout_params;
  ParamVector preference_params;
  Eigen::VectorXd phi;    // per cell
  Eigen::VectorXd alpha;  // per cell
};

TruthBundle simulate_electorate(const SynthSpec& spec, std::uint64_t seed);

// Poll counts per frame cell; cells nobody reached are absent, matching the
// ingest convention.
struct PollCounts {
  std::vector<std::size_t> cell;  // frame cell positions, frame order
  std::vector<long long> successes;
  std::vector<long long> trials;
};

// Respondents sampled cell-wise proportionally to N_g * exp(bias score);
// outcomes within a cell are iid Bernoulli(alpha_g) (or phi_g for turnout).
PollCounts simulate_poll_counts(const TruthBundle& bundle, const SynthSpec& spec,
                                std::uint64_t seed, ModelKind kind);

Dataset simulate_poll(const TruthBundle& bundle, const SynthSpec& spec,
                      std::uint64_t seed, ModelKind kind);

// Poll rows in the pipeline's dataset format: factor labels, raw covariate
// columns, successes, trials.
CsvTable poll_to_table(const PollCounts& counts, const TruthBundle& bundle,
                       const SynthSpec& spec);

struct RecoveryReport {
  std::optional<double> rmse_phi, max_abs_phi, weighted_rmse_phi;
  std::optional<double> rmse_alpha, max_abs_alpha, weighted_rmse_alpha;
};

// Cell-level error of estimated probabilities against the generating truth;
// weighted versions use population weights.
RecoveryReport recovery_report(const TruthBundle& truth,
                               const CellPredictions& est);

// Model structure bound to the spec's formula and factors.
ModelStructure synth_structure(const SynthSpec& spec);

}  // namespace mrp
