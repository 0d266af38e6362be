#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mrp/factor.hpp"
#include "mrp/frame.hpp"
#include "mrp/hmc.hpp"
#include "mrp/params.hpp"

namespace mrp {

enum class ModelKind { turnout, preference };
enum class Weighting { population, voters };

// Per-cell predictions aligned with frame cell order. A zero-length vector
// means the field has not been filled yet; combine() fills the expected
// count columns.
struct CellPredictions {
  Eigen::VectorXd turnout;          // phi_g
  Eigen::VectorXd preference;       // alpha_g | vote
  Eigen::VectorXd expected_voters;  // N_g * phi_g
  Eigen::VectorXd expected_votes;   // E[T_g] = N_g * phi_g * alpha_g

  bool has_turnout() const { return turnout.size() > 0; }
  bool has_preference() const { return preference.size() > 0; }
  bool has_expected() const { return expected_votes.size() > 0; }
};

// Translates frame cells into model inputs: per-column group indices and
// fixed covariate values (resolved through level mappings).
class CellEvaluator {
 public:
  CellEvaluator(const Frame& frame, const ModelStructure& m,
                const CovariateContext& cov);

  std::vector<std::uint32_t> assignments(const Cell& cell) const;
  std::vector<double> covariates(const Cell& cell) const;

 private:
  const ModelStructure& m_;
  const CovariateContext& cov_;
  const Frame& frame_;
  // Per column: positions of its grouping factors within the frame.
  std::vector<std::vector<std::size_t>> frame_positions_;
  // Per fixed covariate: spec plus the frame position of its factor.
  std::vector<const CovariateSpec*> cov_specs_;
  std::vector<std::size_t> cov_factor_positions_;
};

// One probability per frame cell from a single parameter point. Groups that
// never occurred in training sit at the prior mean (effect zero) because
// effect vectors span the full cross product.
CellPredictions predict_cells(const ParamVector& p, const Frame& frame,
                              const ModelStructure& m,
                              const CovariateContext& cov, ModelKind kind);

// Posterior-mean cell probabilities: the per-draw constrained probability is
// averaged, not evaluated at the parameter mean.
CellPredictions predict_cells(const SampleSet& samples, const Frame& frame,
                              const ModelStructure& m,
                              const CovariateContext& cov, ModelKind kind);

// E[T_g] = N_g * phi_g * alpha_g, with expected_voters = N_g * phi_g.
CellPredictions combine(const CellPredictions& turnout,
                        const CellPredictions& preference, const Frame& frame);

struct AggregateRow {
  std::vector<std::uint32_t> key;  // level per axis
  double population = 0.0;
  double expected_voters = 0.0;
  double expected_votes = 0.0;
  double turnout_rate = 0.0;
  double vote_share = 0.0;
};

struct AggregateTable {
  std::vector<std::string> axes;
  std::vector<AggregateRow> rows;  // lexicographic by key
};

// Grouped sums over cells in frame order (compensated summation). Population
// weighting gives sum(N a)/sum(N); voters weighting gives
// sum(N phi a)/sum(N phi). Empty axes produce the single national row.
AggregateTable aggregate(const CellPredictions& preds, const Frame& frame,
                         const std::vector<std::string>& axes,
                         Weighting weighting);

struct GapRow {
  std::vector<std::uint32_t> key;
  double population = 0.0;
  double expected_voters = 0.0;
  double expected_votes = 0.0;
  double turnout_rate = 0.0;
  double vote_share = 0.0;
  double gap = 0.0;  // voter-weighted male share minus female share
};

struct GapTable {
  std::vector<std::string> axes;
  std::vector<GapRow> rows;
};

GapTable gender_gap(const CellPredictions& preds, const Frame& frame,
                    const std::vector<std::string>& axes,
                    const std::string& gender_factor = "gender",
                    const std::string& male_level = "Male",
                    const std::string& female_level = "Female");

// Per-state calibration targets, aligned with the state factor's levels.
struct Targets {
  std::string state_factor;
  std::vector<double> two_party_share;  // voter-weighted share target
  std::vector<double> turnout_rate;     // population-weighted turnout target
};

struct StateShift {
  std::uint32_t state = 0;
  double delta_turnout = 0.0;
  double delta_preference = 0.0;
  double residual_turnout = 0.0;
  double residual_preference = 0.0;
};

struct CalibrationResult {
  std::vector<StateShift> states;
};

// Additive logit shift per state driving aggregates onto the targets.
// Turnout is calibrated first (its result weights the preference share).
// Residuals below 1e-8 are guaranteed; otherwise NumericError.
std::pair<CellPredictions, CalibrationResult> calibrate(
    const CellPredictions& preds, const Frame& frame, const Targets& targets,
    bool adjust_turnout = true, bool adjust_preference = true);

}  // namespace mrp
