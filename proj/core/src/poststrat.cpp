#include "mrp/poststrat.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mrp/errors.hpp"
#include "mrp/math.hpp"
#include "mrp/model.hpp"

namespace mrp {

CellEvaluator::CellEvaluator(const Frame& frame, const ModelStructure& m,
                             const CovariateContext& cov)
    : m_(m), cov_(cov), frame_(frame) {
  // Grouping factors must exist in the frame with identical level lists so
  // cell keys translate directly into group indices.
  auto frame_position = [&](std::size_t spec_pos) {
    const FactorSpec& spec = m.factors[spec_pos];
    std::size_t pos = frame.factor_position(spec.name);
    if (frame.factors()[pos].levels != spec.levels) {
      throw DataError("factor '" + spec.name +
                      "' has different levels in frame and model");
    }
    return pos;
  };

  frame_positions_.reserve(m.n_columns());
  for (const auto& col : m.columns) {
    std::vector<std::size_t> positions;
    positions.reserve(col.factor_positions.size());
    for (std::size_t spec_pos : col.factor_positions) {
      positions.push_back(frame_position(spec_pos));
    }
    frame_positions_.push_back(std::move(positions));
  }

  cov_specs_.reserve(m.n_fixed());
  cov_factor_positions_.reserve(m.n_fixed());
  for (const auto& name : m.fixed) {
    const CovariateSpec* spec = cov.find(name);
    if (!spec) {
      throw ConfigError("covariate '" + name +
                        "' needs a level mapping for frame prediction");
    }
    cov_specs_.push_back(spec);
    cov_factor_positions_.push_back(frame.factor_position(spec->factor));
  }
}

std::vector<std::uint32_t> CellEvaluator::assignments(const Cell& cell) const {
  std::vector<std::uint32_t> out(m_.n_columns());
  for (std::size_t c = 0; c < m_.n_columns(); ++c) {
    out[c] = group_index(cell.key, frame_positions_[c],
                         m_.columns[c].level_counts);
  }
  return out;
}

std::vector<double> CellEvaluator::covariates(const Cell& cell) const {
  std::vector<double> out(m_.n_fixed());
  for (std::size_t j = 0; j < m_.n_fixed(); ++j) {
    std::size_t pos = cov_factor_positions_[j];
    out[j] = cov_.value(*cov_specs_[j],
                        frame_.level_label(pos, cell.key[pos]));
  }
  return out;
}

CellPredictions predict_cells(const ParamVector& p, const Frame& frame,
                              const ModelStructure& m,
                              const CovariateContext& cov, ModelKind kind) {
  CellEvaluator eval(frame, m, cov);
  Eigen::VectorXd probs(frame.size());
  for (std::size_t g = 0; g < frame.size(); ++g) {
    const Cell& cell = frame.cells()[g];
    probs[g] = predict_prob(p, eval.assignments(cell), eval.covariates(cell), m);
  }
  CellPredictions preds;
  if (kind == ModelKind::turnout) {
    preds.turnout = std::move(probs);
  } else {
    preds.preference = std::move(probs);
  }
  return preds;
}

CellPredictions predict_cells(const SampleSet& samples, const Frame& frame,
                              const ModelStructure& m,
                              const CovariateContext& cov, ModelKind kind) {
  if (samples.draws.rows() == 0) throw DataError("empty sample set");
  CellEvaluator eval(frame, m, cov);

  // Cache per-cell inputs once; they are draw-independent.
  std::vector<std::vector<std::uint32_t>> assignments(frame.size());
  std::vector<std::vector<double>> covariates(frame.size());
  for (std::size_t g = 0; g < frame.size(); ++g) {
    assignments[g] = eval.assignments(frame.cells()[g]);
    covariates[g] = eval.covariates(frame.cells()[g]);
  }

  Eigen::VectorXd sums = Eigen::VectorXd::Zero(frame.size());
  for (Eigen::Index r = 0; r < samples.draws.rows(); ++r) {
    ParamVector p = constrain(samples.draws.row(r).transpose(), m);
    for (std::size_t g = 0; g < frame.size(); ++g) {
      sums[g] += predict_prob(p, assignments[g], covariates[g], m);
    }
  }
  sums /= static_cast<double>(samples.draws.rows());

  CellPredictions preds;
  if (kind == ModelKind::turnout) {
    preds.turnout = std::move(sums);
  } else {
    preds.preference = std::move(sums);
  }
  return preds;
}

CellPredictions combine(const CellPredictions& turnout,
                        const CellPredictions& preference, const Frame& frame) {
  const Eigen::Index n = static_cast<Eigen::Index>(frame.size());
  if (!turnout.has_turnout() || turnout.turnout.size() != n ||
      !preference.has_preference() || preference.preference.size() != n) {
    throw DataError("combine: frame mismatch");
  }
  CellPredictions out;
  out.turnout = turnout.turnout;
  out.preference = preference.preference;
  out.expected_voters.resize(n);
  out.expected_votes.resize(n);
  for (Eigen::Index g = 0; g < n; ++g) {
    double voters = static_cast<double>(frame.cells()[g].population) *
                    out.turnout[g];
    out.expected_voters[g] = voters;
    out.expected_votes[g] = voters * out.preference[g];
  }
  return out;
}

namespace {

struct CellSums {
  long long population = 0;
  CompensatedSum voters;     // sum N phi
  CompensatedSum votes;      // sum N phi alpha
  CompensatedSum pop_votes;  // sum N alpha
};

void require_combined(const CellPredictions& preds, const Frame& frame,
                      const char* op) {
  const Eigen::Index n = static_cast<Eigen::Index>(frame.size());
  if (!preds.has_turnout() || preds.turnout.size() != n ||
      !preds.has_preference() || preds.preference.size() != n) {
    throw DataError(std::string(op) +
                    ": needs combined predictions aligned with the frame");
  }
}

// Per-cell contribution using the same products combine() stores, so sums of
// combined predictions and on-the-fly sums agree bit for bit.
void accumulate(CellSums& sums, const CellPredictions& preds,
                const Frame& frame, std::size_t g) {
  double n = static_cast<double>(frame.cells()[g].population);
  double voters = preds.expected_voters.size() > 0
                      ? preds.expected_voters[g]
                      : n * preds.turnout[g];
  double votes = preds.expected_votes.size() > 0
                     ? preds.expected_votes[g]
                     : voters * preds.preference[g];
  sums.population += frame.cells()[g].population;
  sums.voters.add(voters);
  sums.votes.add(votes);
  sums.pop_votes.add(n * preds.preference[g]);
}

std::vector<std::size_t> axis_positions(const Frame& frame,
                                        const std::vector<std::string>& axes) {
  std::vector<std::size_t> positions;
  positions.reserve(axes.size());
  for (const auto& name : axes) {
    positions.push_back(frame.factor_position(name));
  }
  return positions;
}

std::vector<std::uint32_t> axis_key(const Cell& cell,
                                    const std::vector<std::size_t>& positions) {
  std::vector<std::uint32_t> key;
  key.reserve(positions.size());
  for (std::size_t pos : positions) key.push_back(cell.key[pos]);
  return key;
}

}  // namespace

AggregateTable aggregate(const CellPredictions& preds, const Frame& frame,
                         const std::vector<std::string>& axes,
                         Weighting weighting) {
  require_combined(preds, frame, "aggregate");
  auto positions = axis_positions(frame, axes);

  // std::map keeps rows in lexicographic key order; accumulation still visits
  // cells in frame order, which fixes the summation order per row.
  std::map<std::vector<std::uint32_t>, CellSums> groups;
  for (std::size_t g = 0; g < frame.size(); ++g) {
    accumulate(groups[axis_key(frame.cells()[g], positions)], preds, frame, g);
  }

  AggregateTable table;
  table.axes = axes;
  table.rows.reserve(groups.size());
  for (const auto& [key, sums] : groups) {
    AggregateRow row;
    row.key = key;
    row.population = static_cast<double>(sums.population);
    row.expected_voters = sums.voters.value();
    row.expected_votes = sums.votes.value();
    row.turnout_rate = row.expected_voters / row.population;
    row.vote_share = weighting == Weighting::population
                         ? sums.pop_votes.value() / row.population
                         : row.expected_votes / row.expected_voters;
    table.rows.push_back(std::move(row));
  }
  return table;
}

GapTable gender_gap(const CellPredictions& preds, const Frame& frame,
                    const std::vector<std::string>& axes,
                    const std::string& gender_factor,
                    const std::string& male_level,
                    const std::string& female_level) {
  require_combined(preds, frame, "gender_gap");
  for (const auto& axis : axes) {
    if (axis == gender_factor) {
      throw DataError("gender_gap: axes must not include '" + gender_factor + "'");
    }
  }
  std::size_t gender_pos = frame.factor_position(gender_factor);
  const FactorSpec& gender = frame.factors()[gender_pos];
  std::uint32_t male = static_cast<std::uint32_t>(gender.require_level(male_level));
  std::uint32_t female =
      static_cast<std::uint32_t>(gender.require_level(female_level));

  auto positions = axis_positions(frame, axes);

  struct GapSums {
    CellSums all, male, female;
  };
  std::map<std::vector<std::uint32_t>, GapSums> groups;
  for (std::size_t g = 0; g < frame.size(); ++g) {
    const Cell& cell = frame.cells()[g];
    GapSums& sums = groups[axis_key(cell, positions)];
    accumulate(sums.all, preds, frame, g);
    if (cell.key[gender_pos] == male) accumulate(sums.male, preds, frame, g);
    if (cell.key[gender_pos] == female) accumulate(sums.female, preds, frame, g);
  }

  GapTable table;
  table.axes = axes;
  table.rows.reserve(groups.size());
  for (const auto& [key, sums] : groups) {
    GapRow row;
    row.key = key;
    row.population = static_cast<double>(sums.all.population);
    row.expected_voters = sums.all.voters.value();
    row.expected_votes = sums.all.votes.value();
    row.turnout_rate = row.expected_voters / row.population;
    row.vote_share = row.expected_votes / row.expected_voters;
    double male_share = sums.male.votes.value() / sums.male.voters.value();
    double female_share = sums.female.votes.value() / sums.female.voters.value();
    row.gap = male_share - female_share;
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

// Solves share(delta) = target by bisection on an expanding bracket. share()
// is strictly increasing in delta, so a sign change always appears for
// targets inside (0,1) reachable before the probability clamp saturates.
double solve_logit_shift(const std::function<double(double)>& share,
                         double target, const std::string& what) {
  double at_zero = share(0.0) - target;
  if (std::abs(at_zero) <= 1e-13) return 0.0;

  double lo = -1.0, hi = 1.0;
  for (int i = 0; share(lo) - target > 0.0; ++i) {
    if (i >= 7) throw NumericError(what + ": target not bracketable");
    lo *= 2.0;
  }
  for (int i = 0; share(hi) - target < 0.0; ++i) {
    if (i >= 7) throw NumericError(what + ": target not bracketable");
    hi *= 2.0;
  }
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double diff = share(mid) - target;
    if (std::abs(diff) <= 1e-12) return mid;
    if (diff < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace

std::pair<CellPredictions, CalibrationResult> calibrate(
    const CellPredictions& preds, const Frame& frame, const Targets& targets,
    bool adjust_turnout, bool adjust_preference) {
  require_combined(preds, frame, "calibrate");
  std::size_t state_pos = frame.factor_position(targets.state_factor);
  const FactorSpec& state = frame.factors()[state_pos];
  if (targets.two_party_share.size() != state.size() ||
      targets.turnout_rate.size() != state.size()) {
    throw DataError("calibrate: targets not aligned with state levels");
  }

  // Cells per state, in frame order.
  std::vector<std::vector<std::size_t>> state_cells(state.size());
  for (std::size_t g = 0; g < frame.size(); ++g) {
    state_cells[frame.cells()[g].key[state_pos]].push_back(g);
  }

  CellPredictions out;
  out.turnout = preds.turnout;
  out.preference = preds.preference;

  CalibrationResult result;
  for (std::uint32_t s = 0; s < state.size(); ++s) {
    const auto& cells = state_cells[s];
    if (cells.empty()) continue;  // level absent from the frame

    StateShift shift;
    shift.state = s;

    if (adjust_turnout) {
      double target = targets.turnout_rate[s];
      if (!(target > 0.0 && target < 1.0)) {
        throw DataError("calibrate: turnout target for '" +
                        state.levels[s] + "' must be in (0,1)");
      }
      auto rate = [&](double delta) {
        CompensatedSum voters;
        long long pop = 0;
        for (std::size_t g : cells) {
          double n = static_cast<double>(frame.cells()[g].population);
          pop += frame.cells()[g].population;
          voters.add(n * clamp_prob(inverse_logit(
                             logit(preds.turnout[g]) + delta)));
        }
        return voters.value() / static_cast<double>(pop);
      };
      shift.delta_turnout = solve_logit_shift(
          rate, target, "turnout calibration for '" + state.levels[s] + "'");
      if (shift.delta_turnout != 0.0) {
        for (std::size_t g : cells) {
          out.turnout[g] = clamp_prob(inverse_logit(
              logit(preds.turnout[g]) + shift.delta_turnout));
        }
      }
      shift.residual_turnout = std::abs(rate(shift.delta_turnout) - target);
    }

    if (adjust_preference) {
      double target = targets.two_party_share[s];
      if (!(target > 0.0 && target < 1.0)) {
        throw DataError("calibrate: share target for '" + state.levels[s] +
                        "' must be in (0,1)");
      }
      auto share = [&](double delta) {
        CompensatedSum voters, votes;
        for (std::size_t g : cells) {
          double n = static_cast<double>(frame.cells()[g].population);
          double v = n * out.turnout[g];  // post-turnout-calibration weights
          voters.add(v);
          votes.add(v * clamp_prob(inverse_logit(
                            logit(preds.preference[g]) + delta)));
        }
        return votes.value() / voters.value();
      };
      shift.delta_preference = solve_logit_shift(
          share, target,
          "preference calibration for '" + state.levels[s] + "'");
      if (shift.delta_preference != 0.0) {
        for (std::size_t g : cells) {
          out.preference[g] = clamp_prob(inverse_logit(
              logit(preds.preference[g]) + shift.delta_preference));
        }
      }
      shift.residual_preference = std::abs(share(shift.delta_preference) - target);
    }

    if (shift.residual_turnout >= 1e-8 || shift.residual_preference >= 1e-8) {
      throw NumericError("calibrate: residual above 1e-8 for state '" +
                         state.levels[s] + "'");
    }
    result.states.push_back(shift);
  }

  // Expected counts reflect the calibrated probabilities.
  const Eigen::Index n = static_cast<Eigen::Index>(frame.size());
  out.expected_voters.resize(n);
  out.expected_votes.resize(n);
  for (Eigen::Index g = 0; g < n; ++g) {
    double voters = static_cast<double>(frame.cells()[g].population) *
                    out.turnout[g];
    out.expected_voters[g] = voters;
    out.expected_votes[g] = voters * out.preference[g];
  }
  return {std::move(out), std::move(result)};
}

}  // namespace mrp
