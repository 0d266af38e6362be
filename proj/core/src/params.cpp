#include "mrp/params.hpp"

#include <cmath>
#include <stdexcept>

#include "mrp/errors.hpp"
#include "mrp/math.hpp"

namespace mrp {

std::size_t ModelStructure::total_effects() const {
  std::size_t n = 0;
  for (const auto& col : columns) n += col.cardinality;
  return n;
}

std::size_t ModelStructure::column_offset(std::size_t c) const {
  std::size_t off = effects_offset();
  for (std::size_t i = 0; i < c; ++i) off += columns[i].cardinality;
  return off;
}

std::size_t ModelStructure::scale_offset() const {
  std::size_t k = n_columns();
  return shares_offset() + (k > 0 ? k - 1 : 0);
}

std::size_t ModelStructure::n_params() const {
  return scale_offset() + (n_columns() > 0 ? 1 : 0);
}

ModelStructure bind_model(const Formula& formula,
                          const std::vector<FactorSpec>& specs) {
  ModelStructure m;
  m.factors = specs;
  m.has_intercept = formula.has_intercept;
  m.fixed = formula.fixed;

  auto spec_position = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (specs[i].name == name) return i;
    }
    throw ConfigError("formula references unknown factor '" + name + "'");
  };

  for (const auto& term : formula.varying) {
    EffectColumn base;
    base.cardinality = 1;
    for (const auto& factor : term.grouping) {
      std::size_t pos = spec_position(factor);
      base.factor_positions.push_back(pos);
      base.level_counts.push_back(specs[pos].size());
      base.cardinality *= specs[pos].size();
    }
    if (term.has_intercept) {
      EffectColumn col = base;
      col.label = term.label();
      col.slope_covariate = -1;
      m.columns.push_back(std::move(col));
    }
    for (const auto& slope : term.slopes) {
      EffectColumn col = base;
      col.label = slope + "|" + term.label();
      col.slope_covariate = -1;
      for (std::size_t j = 0; j < formula.fixed.size(); ++j) {
        if (formula.fixed[j] == slope) col.slope_covariate = static_cast<int>(j);
      }
      if (col.slope_covariate < 0) {
        throw ConfigError("slope covariate '" + slope + "' is not a fixed term");
      }
      m.columns.push_back(std::move(col));
    }
  }
  return m;
}

Eigen::VectorXd effect_scale(const Eigen::VectorXd& shares, double scale,
                             std::size_t n_terms) {
  Eigen::VectorXd tau(shares.size());
  for (Eigen::Index v = 0; v < shares.size(); ++v) {
    tau[v] = std::sqrt(shares[v] * static_cast<double>(n_terms)) * scale;
  }
  return tau;
}

Eigen::VectorXd simplex_from_unconstrained(const Eigen::VectorXd& y) {
  const Eigen::Index k = y.size() + 1;
  Eigen::VectorXd x(k);
  double stick = 1.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    double z = inverse_logit(y[i] - std::log(static_cast<double>(k - i - 1)));
    x[i] = stick * z;
    stick -= x[i];
  }
  x[k - 1] = stick;
  return x;
}

Eigen::VectorXd simplex_to_unconstrained(const Eigen::VectorXd& x) {
  const Eigen::Index k = x.size();
  Eigen::VectorXd y(k - 1);
  double stick = 1.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    double z = x[i] / stick;
    y[i] = logit(z) + std::log(static_cast<double>(k - i - 1));
    stick -= x[i];
  }
  return y;
}

double simplex_log_jacobian(const Eigen::VectorXd& y) {
  const Eigen::Index k = y.size() + 1;
  double log_jac = 0.0;
  double stick = 1.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    double adj = y[i] - std::log(static_cast<double>(k - i - 1));
    // log z + log(1-z) + log stick for z = inverse_logit(adj).
    log_jac += std::log(stick) - log1p_exp(-adj) - log1p_exp(adj);
    stick -= stick * inverse_logit(adj);
  }
  return log_jac;
}

ParamVector constrain(const Eigen::VectorXd& u, const ModelStructure& m) {
  if (static_cast<std::size_t>(u.size()) != m.n_params()) {
    throw std::invalid_argument("constrain: dimension mismatch");
  }
  ParamVector p;
  p.mu = m.has_intercept ? u[0] : 0.0;
  p.fixed = u.segment(m.fixed_offset(), m.n_fixed());
  const std::size_t k = m.n_columns();
  p.effects.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    p.effects.push_back(u.segment(m.column_offset(c), m.columns[c].cardinality));
  }
  if (k > 0) {
    p.shares = simplex_from_unconstrained(u.segment(m.shares_offset(), k - 1));
    p.scale = std::exp(u[m.scale_offset()]);
  } else {
    p.shares.resize(0);
    p.scale = 1.0;
  }
  return p;
}

Eigen::VectorXd unconstrain(const ParamVector& p, const ModelStructure& m) {
  const std::size_t k = m.n_columns();
  if (static_cast<std::size_t>(p.fixed.size()) != m.n_fixed() ||
      p.effects.size() != k ||
      static_cast<std::size_t>(p.shares.size()) != k) {
    throw std::invalid_argument("unconstrain: dimension mismatch");
  }
  Eigen::VectorXd u(m.n_params());
  if (m.has_intercept) u[0] = p.mu;
  u.segment(m.fixed_offset(), m.n_fixed()) = p.fixed;
  for (std::size_t c = 0; c < k; ++c) {
    if (static_cast<std::size_t>(p.effects[c].size()) != m.columns[c].cardinality) {
      throw std::invalid_argument("unconstrain: effect length mismatch");
    }
    u.segment(m.column_offset(c), m.columns[c].cardinality) = p.effects[c];
  }
  if (k > 0) {
    u.segment(m.shares_offset(), k - 1) = simplex_to_unconstrained(p.shares);
    u[m.scale_offset()] = std::log(p.scale);
  }
  return u;
}

}  // namespace mrp
