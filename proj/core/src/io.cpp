#include "mrp/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrp/errors.hpp"

namespace mrp {

namespace {

using ojson = nlohmann::ordered_json;

std::string slurp(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(std::string("cannot open ") + what + " '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void dump(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

Frame read_frame_csv(const std::filesystem::path& path,
                     std::vector<FactorSpec> specs) {
  try {
    return build_frame(std::move(specs), read_csv_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_frame_csv(const std::filesystem::path& path, const Frame& frame) {
  write_csv_file(path, frame_to_table(frame));
}

Dataset read_dataset_csv(const std::filesystem::path& path,
                         const ModelStructure& m, const CovariateContext& cov) {
  try {
    return build_dataset(read_csv_file(path), m, cov);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_predictions_csv(const std::filesystem::path& path, const Frame& frame,
                           const CellPredictions& preds) {
  CsvTable table;
  for (const auto& f : frame.factors()) table.header.push_back(f.name);
  table.header.push_back("population");
  if (preds.has_turnout()) table.header.push_back("phi");
  if (preds.has_preference()) table.header.push_back("alpha");
  if (preds.has_expected()) {
    table.header.push_back("expected_voters");
    table.header.push_back("expected_votes");
  }
  for (std::size_t g = 0; g < frame.size(); ++g) {
    const Cell& cell = frame.cells()[g];
    std::vector<std::string> row;
    for (std::size_t f = 0; f < cell.key.size(); ++f) {
      row.push_back(frame.level_label(f, cell.key[f]));
    }
    row.push_back(std::to_string(cell.population));
    if (preds.has_turnout()) row.push_back(format_double(preds.turnout[g]));
    if (preds.has_preference()) row.push_back(format_double(preds.preference[g]));
    if (preds.has_expected()) {
      row.push_back(format_double(preds.expected_voters[g]));
      row.push_back(format_double(preds.expected_votes[g]));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv_file(path, table);
}

CellPredictions read_predictions_csv(const std::filesystem::path& path,
                                     const Frame& frame) {
  CsvTable table = read_csv_file(path);
  const auto& factors = frame.factors();
  std::vector<std::size_t> factor_cols(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) {
    factor_cols[f] = table.column(factors[f].name);
  }
  auto phi_col = table.find_column("phi");
  auto alpha_col = table.find_column("alpha");
  auto voters_col = table.find_column("expected_voters");
  auto votes_col = table.find_column("expected_votes");

  CellPredictions preds;
  const Eigen::Index n = static_cast<Eigen::Index>(frame.size());
  if (phi_col) preds.turnout.setConstant(n, -1.0);
  if (alpha_col) preds.preference.setConstant(n, -1.0);
  if (voters_col && votes_col) {
    preds.expected_voters.setZero(n);
    preds.expected_votes.setZero(n);
  }

  if (table.rows.size() != frame.size()) {
    throw DataError(path.string() + ": expected " + std::to_string(frame.size()) +
                    " rows, got " + std::to_string(table.rows.size()));
  }
  std::vector<std::uint32_t> key(factors.size());
  std::vector<bool> seen(frame.size(), false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t f = 0; f < factors.size(); ++f) {
      key[f] = static_cast<std::uint32_t>(
          factors[f].require_level(row[factor_cols[f]]));
    }
    auto pos = frame.find(key);
    if (!pos) throw DataError(path.string() + ": row " + std::to_string(r + 1) +
                              " is not a frame cell");
    if (seen[*pos]) throw DataError(path.string() + ": duplicate cell row");
    seen[*pos] = true;
    const std::string ctx = "row " + std::to_string(r + 1);
    if (phi_col) preds.turnout[*pos] = parse_double(row[*phi_col], ctx + " phi");
    if (alpha_col) {
      preds.preference[*pos] = parse_double(row[*alpha_col], ctx + " alpha");
    }
    if (voters_col && votes_col) {
      preds.expected_voters[*pos] =
          parse_double(row[*voters_col], ctx + " expected_voters");
      preds.expected_votes[*pos] =
          parse_double(row[*votes_col], ctx + " expected_votes");
    }
  }
  return preds;
}

Targets read_targets_csv(const std::filesystem::path& path, const Frame& frame,
                         const std::string& state_factor) {
  CsvTable table = read_csv_file(path);
  std::size_t state_col = table.column("state");
  std::size_t share_col = table.column("two_party_share");
  std::size_t turnout_col = table.column("turnout_rate");

  std::size_t state_pos = frame.factor_position(state_factor);
  const FactorSpec& state = frame.factors()[state_pos];

  Targets targets;
  targets.state_factor = state_factor;
  targets.two_party_share.assign(state.size(), -1.0);
  targets.turnout_rate.assign(state.size(), -1.0);

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::size_t idx = state.require_level(row[state_col]);
    if (targets.two_party_share[idx] >= 0.0) {
      throw DataError(path.string() + ": duplicate target for state '" +
                      row[state_col] + "'");
    }
    const std::string ctx = "row " + std::to_string(r + 1);
    double share = parse_double(row[share_col], ctx + " two_party_share");
    double turnout = parse_double(row[turnout_col], ctx + " turnout_rate");
    if (!(share > 0.0 && share < 1.0) || !(turnout > 0.0 && turnout < 1.0)) {
      throw DataError(path.string() + ": " + ctx + ": targets must be in (0,1)");
    }
    targets.two_party_share[idx] = share;
    targets.turnout_rate[idx] = turnout;
  }

  // Every state present in the frame needs a target.
  std::vector<bool> present(state.size(), false);
  for (const auto& cell : frame.cells()) present[cell.key[state_pos]] = true;
  for (std::size_t s = 0; s < state.size(); ++s) {
    if (present[s] && targets.two_party_share[s] < 0.0) {
      throw DataError(path.string() + ": missing state '" + state.levels[s] + "'");
    }
  }
  return targets;
}

void write_targets_csv(const std::filesystem::path& path, const Frame& frame,
                       const Targets& targets) {
  std::size_t state_pos = frame.factor_position(targets.state_factor);
  const FactorSpec& state = frame.factors()[state_pos];
  CsvTable table;
  table.header = {"state", "two_party_share", "turnout_rate"};
  for (std::size_t s = 0; s < state.size(); ++s) {
    if (targets.two_party_share[s] < 0.0) continue;
    table.rows.push_back({state.levels[s],
                          format_double(targets.two_party_share[s]),
                          format_double(targets.turnout_rate[s])});
  }
  write_csv_file(path, table);
}

namespace {

void push_axis_labels(std::vector<std::string>& row, const Frame& frame,
                      const std::vector<std::string>& axes,
                      const std::vector<std::uint32_t>& key) {
  for (std::size_t a = 0; a < axes.size(); ++a) {
    std::size_t pos = frame.factor_position(axes[a]);
    row.push_back(frame.factors()[pos].levels[key[a]]);
  }
}

}  // namespace

void write_aggregate_csv(const std::filesystem::path& path,
                         const AggregateTable& table, const Frame& frame) {
  CsvTable out;
  out.header = table.axes;
  for (const char* col : {"population", "expected_voters", "expected_votes",
                          "turnout_rate", "vote_share"}) {
    out.header.push_back(col);
  }
  for (const auto& row : table.rows) {
    std::vector<std::string> fields;
    push_axis_labels(fields, frame, table.axes, row.key);
    fields.push_back(format_double(row.population));
    fields.push_back(format_double(row.expected_voters));
    fields.push_back(format_double(row.expected_votes));
    fields.push_back(format_double(row.turnout_rate));
    fields.push_back(format_double(row.vote_share));
    out.rows.push_back(std::move(fields));
  }
  write_csv_file(path, out);
}

void write_gap_csv(const std::filesystem::path& path, const GapTable& table,
                   const Frame& frame) {
  CsvTable out;
  out.header = table.axes;
  for (const char* col : {"population", "expected_voters", "expected_votes",
                          "turnout_rate", "vote_share", "gap"}) {
    out.header.push_back(col);
  }
  for (const auto& row : table.rows) {
    std::vector<std::string> fields;
    push_axis_labels(fields, frame, table.axes, row.key);
    fields.push_back(format_double(row.population));
    fields.push_back(format_double(row.expected_voters));
    fields.push_back(format_double(row.expected_votes));
    fields.push_back(format_double(row.turnout_rate));
    fields.push_back(format_double(row.vote_share));
    fields.push_back(format_double(row.gap));
    out.rows.push_back(std::move(fields));
  }
  write_csv_file(path, out);
}

void write_calibration_csv(const std::filesystem::path& path,
                           const CalibrationResult& result, const Frame& frame,
                           const std::string& state_factor) {
  std::size_t state_pos = frame.factor_position(state_factor);
  const FactorSpec& state = frame.factors()[state_pos];
  CsvTable out;
  out.header = {"state", "delta_turnout", "delta_preference",
                "residual_turnout", "residual_preference"};
  for (const auto& shift : result.states) {
    out.rows.push_back({state.levels[shift.state],
                        format_double(shift.delta_turnout),
                        format_double(shift.delta_preference),
                        format_double(shift.residual_turnout),
                        format_double(shift.residual_preference)});
  }
  write_csv_file(path, out);
}

void write_fit_json(const std::filesystem::path& path, const FitResult& fit,
                    const ModelStructure& m, const std::string& kind,
                    std::uint64_t seed) {
  ParamVector p = constrain(fit.mode, m);
  ojson doc;
  doc["kind"] = kind;
  doc["seed"] = seed;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  doc["final_grad_norm"] = fit.final_grad_norm;
  doc["log_posterior"] = fit.log_posterior_at_mode;

  ojson params;
  if (m.has_intercept) params["mu"] = p.mu;
  ojson fixed = ojson::object();
  for (std::size_t j = 0; j < m.n_fixed(); ++j) fixed[m.fixed[j]] = p.fixed[j];
  params["fixed"] = fixed;
  ojson effects = ojson::object();
  ojson shares = ojson::object();
  for (std::size_t c = 0; c < m.n_columns(); ++c) {
    std::vector<double> beta(p.effects[c].data(),
                             p.effects[c].data() + p.effects[c].size());
    effects[m.columns[c].label] = beta;
    shares[m.columns[c].label] = p.shares[c];
  }
  params["effects"] = effects;
  params["shares"] = shares;
  params["scale"] = p.scale;
  doc["params"] = params;

  std::vector<double> mode(fit.mode.data(), fit.mode.data() + fit.mode.size());
  doc["unconstrained"] = mode;
  dump(path, doc.dump(2) + "\n");
}

Eigen::VectorXd read_fit_vector(const std::filesystem::path& path,
                                const ModelStructure& m) {
  ojson doc;
  try {
    doc = ojson::parse(slurp(path, "fit file"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("unconstrained")) {
    throw DataError(path.string() + ": missing 'unconstrained' vector");
  }
  auto values = doc["unconstrained"].get<std::vector<double>>();
  if (values.size() != m.n_params()) {
    throw DataError(path.string() + ": fit has " + std::to_string(values.size()) +
                    " parameters, model needs " + std::to_string(m.n_params()));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
}

void write_draws_csv(const std::filesystem::path& path, const SampleSet& samples) {
  CsvTable table;
  for (Eigen::Index c = 0; c < samples.draws.cols(); ++c) {
    table.header.push_back("p" + std::to_string(c));
  }
  for (Eigen::Index r = 0; r < samples.draws.rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(samples.draws.cols());
    for (Eigen::Index c = 0; c < samples.draws.cols(); ++c) {
      row.push_back(format_double(samples.draws(r, c)));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv_file(path, table);
}

SampleSet read_draws_csv(const std::filesystem::path& path) {
  CsvTable table = read_csv_file(path);
  SampleSet samples;
  samples.draws.resize(table.rows.size(), table.header.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      samples.draws(r, c) =
          parse_double(table.rows[r][c], "draw row " + std::to_string(r + 1));
    }
  }
  return samples;
}

}  // namespace mrp
