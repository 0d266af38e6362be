#pragma once

#include <filesystem>
#include <string>

#include "mrp/dataset.hpp"
#include "mrp/frame.hpp"
#include "mrp/infer.hpp"
#include "mrp/poststrat.hpp"

namespace mrp {

// Frame CSV: one column per factor plus `population`.
Frame read_frame_csv(const std::filesystem::path& path,
                     std::vector<FactorSpec> specs);
void write_frame_csv(const std::filesystem::path& path, const Frame& frame);

// Training data CSV: factor columns, covariate columns, successes, trials.
Dataset read_dataset_csv(const std::filesystem::path& path,
                         const ModelStructure& m, const CovariateContext& cov);

// Predictions CSV: factor columns, population, then phi and/or alpha and the
// expected count columns when present. Rows must match frame cells 1:1.
void write_predictions_csv(const std::filesystem::path& path, const Frame& frame,
                           const CellPredictions& preds);
CellPredictions read_predictions_csv(const std::filesystem::path& path,
                                     const Frame& frame);

// Targets CSV: state, two_party_share, turnout_rate. Every frame state level
// must be covered; rows for unknown states are rejected.
Targets read_targets_csv(const std::filesystem::path& path, const Frame& frame,
                         const std::string& state_factor);
void write_targets_csv(const std::filesystem::path& path, const Frame& frame,
                       const Targets& targets);

void write_aggregate_csv(const std::filesystem::path& path,
                         const AggregateTable& table, const Frame& frame);
void write_gap_csv(const std::filesystem::path& path, const GapTable& table,
                   const Frame& frame);
void write_calibration_csv(const std::filesystem::path& path,
                           const CalibrationResult& result, const Frame& frame,
                           const std::string& state_factor);

// Fit JSON: run metadata, the unconstrained mode, and a readable constrained
// parameter block. Reload recovers the unconstrained vector.
void write_fit_json(const std::filesystem::path& path, const FitResult& fit,
                    const ModelStructure& m, const std::string& kind,
                    std::uint64_t seed);
Eigen::VectorXd read_fit_vector(const std::filesystem::path& path,
                                const ModelStructure& m);

// Draw matrix CSV (one column per parameter) for sampling runs.
void write_draws_csv(const std::filesystem::path& path, const SampleSet& samples);
SampleSet read_draws_csv(const std::filesystem::path& path);

}  // namespace mrp
