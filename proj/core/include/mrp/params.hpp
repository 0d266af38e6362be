#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mrp/factor.hpp"
#include "mrp/formula.hpp"

namespace mrp {

// One varying-effect coefficient vector: either the intercept column of a
// term or one slope column. Cardinality is the full cross product of the
// grouping factors' level counts, so unobserved groups exist and sit at the
// prior mean.
struct EffectColumn {
  std::string label;                          // "state:educ" or "x|eth"
  std::vector<std::size_t> factor_positions;  // into the bound spec list
  std::vector<std::size_t> level_counts;
  std::size_t cardinality = 0;
  int slope_covariate = -1;  // index into ModelStructure::fixed, -1 = intercept
};

// A Formula bound to concrete factor specs: the parameter layout shared by
// the log posterior, the transforms, and prediction.
struct ModelStructure {
  std::vector<FactorSpec> factors;
  bool has_intercept = false;
  std::vector<std::string> fixed;
  std::vector<EffectColumn> columns;

  std::size_t n_fixed() const { return fixed.size(); }
  std::size_t n_columns() const { return columns.size(); }
  std::size_t total_effects() const;

  // Unconstrained layout: [mu?][fixed][effects per column][stick-breaking
  // shares (K-1)][log scale], the last two present only when K >= 1.
  std::size_t mu_offset() const { return 0; }
  std::size_t fixed_offset() const { return has_intercept ? 1 : 0; }
  std::size_t effects_offset() const { return fixed_offset() + n_fixed(); }
  std::size_t column_offset(std::size_t c) const;
  std::size_t shares_offset() const { return effects_offset() + total_effects(); }
  std::size_t scale_offset() const;
  std::size_t n_params() const;
};

ModelStructure bind_model(const Formula& formula,
                          const std::vector<FactorSpec>& specs);

// Constrained parameters of one hierarchical binomial logistic model.
struct ParamVector {
  double mu = 0.0;                      // meaningful iff has_intercept
  Eigen::VectorXd fixed;                // one slope per fixed covariate
  std::vector<Eigen::VectorXd> effects; // per effect column
  Eigen::VectorXd shares;               // variance-share simplex over columns
  double scale = 1.0;                   // global prior scale S
};

// Per-column prior scales: tau_v = sqrt(shares[v] * n_terms) * scale, so
// sum(tau^2) == n_terms * scale^2 for any simplex point.
Eigen::VectorXd effect_scale(const Eigen::VectorXd& shares, double scale,
                             std::size_t n_terms);

// Stick-breaking simplex transform with the log(K-k-1) offsets that put the
// uniform simplex at y = 0.
Eigen::VectorXd simplex_from_unconstrained(const Eigen::VectorXd& y);
Eigen::VectorXd simplex_to_unconstrained(const Eigen::VectorXd& x);
double simplex_log_jacobian(const Eigen::VectorXd& y);

ParamVector constrain(const Eigen::VectorXd& u, const ModelStructure& m);
Eigen::VectorXd unconstrain(const ParamVector& p, const ModelStructure& m);

}  // namespace mrp
