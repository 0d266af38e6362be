#include "mrp/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mrp/errors.hpp"
#include "mrp/math.hpp"

namespace mrp {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void check_dims(const Eigen::VectorXd& u, const Dataset& d,
                const ModelStructure& m) {
  if (static_cast<std::size_t>(u.size()) != m.n_params()) {
    throw std::invalid_argument("log_posterior: parameter dimension mismatch");
  }
  if (d.groups.size() != m.n_columns() || d.covariates.size() != m.n_fixed()) {
    throw std::invalid_argument("log_posterior: dataset/model mismatch");
  }
  for (const auto& g : d.groups) {
    if (g.size() != d.n_rows()) {
      throw std::invalid_argument("log_posterior: ragged group assignments");
    }
  }
  for (const auto& x : d.covariates) {
    if (x.size() != d.n_rows()) {
      throw std::invalid_argument("log_posterior: ragged covariates");
    }
  }
}

}  // namespace

double log_posterior_with_grad(const Eigen::VectorXd& u, const Dataset& d,
                               const ModelStructure& m, Eigen::VectorXd* grad) {
  check_dims(u, d, m);
  const std::size_t k = m.n_columns();
  const std::size_t n = d.n_rows();

  if (grad) grad->setZero(u.size());

  const double mu = m.has_intercept ? u[0] : 0.0;
  const auto fixed = u.segment(m.fixed_offset(), m.n_fixed());

  // Shares, sticks, and the stick-breaking Jacobian.
  Eigen::VectorXd shares(k), z;
  double log_jacobian = 0.0;
  double scale = 1.0, log_scale = 0.0;
  if (k > 0) {
    z.resize(k > 1 ? k - 1 : 0);
    double stick = 1.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      double adj = u[m.shares_offset() + i] -
                   std::log(static_cast<double>(k - i - 1));
      z[i] = inverse_logit(adj);
      shares[i] = stick * z[i];
      log_jacobian += std::log(stick) - log1p_exp(-adj) - log1p_exp(adj);
      stick -= shares[i];
    }
    shares[k - 1] = stick;
    log_scale = u[m.scale_offset()];
    scale = std::exp(log_scale);
  }

  // tau_c^2 = shares_c * K * S^2, floored away from zero so that underflowed
  // shares produce -inf rather than NaN.
  Eigen::VectorXd tau2(k);
  const double s2k = scale * scale * static_cast<double>(k);
  for (std::size_t c = 0; c < k; ++c) {
    tau2[c] = std::max(shares[c] * s2k, std::numeric_limits<double>::min());
  }

  std::vector<std::size_t> col_offset(k);
  std::vector<int> slope_cov(k);
  for (std::size_t c = 0; c < k; ++c) {
    col_offset[c] = m.column_offset(c);
    slope_cov[c] = m.columns[c].slope_covariate;
  }

  // Binomial likelihood, log1p_exp form: T*eta - V*log(1 + e^eta).
  double loglik = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double eta = mu;
    for (std::size_t j = 0; j < m.n_fixed(); ++j) {
      eta += fixed[j] * d.covariates[j][i];
    }
    for (std::size_t c = 0; c < k; ++c) {
      double w = slope_cov[c] >= 0 ? d.covariates[slope_cov[c]][i] : 1.0;
      eta += u[col_offset[c] + d.groups[c][i]] * w;
    }
    loglik += d.successes[i] * eta - d.trials[i] * log1p_exp(eta);

    if (grad) {
      double resid = d.successes[i] - d.trials[i] * inverse_logit(eta);
      if (m.has_intercept) (*grad)[0] += resid;
      for (std::size_t j = 0; j < m.n_fixed(); ++j) {
        (*grad)[m.fixed_offset() + j] += resid * d.covariates[j][i];
      }
      for (std::size_t c = 0; c < k; ++c) {
        double w = slope_cov[c] >= 0 ? d.covariates[slope_cov[c]][i] : 1.0;
        (*grad)[col_offset[c] + d.groups[c][i]] += resid * w;
      }
    }
  }

  // Normal(0, tau_c) prior on each effect column; G_c is the derivative of
  // the prior with respect to log tau_c^2, reused for the shares and scale.
  double log_prior = 0.0;
  Eigen::VectorXd g_log_tau2(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double card = static_cast<double>(m.columns[c].cardinality);
    const auto beta = u.segment(col_offset[c], m.columns[c].cardinality);
    const double ssq = beta.squaredNorm();
    log_prior += -0.5 * card * (kLogTwoPi + std::log(tau2[c])) -
                 0.5 * ssq / tau2[c];
    g_log_tau2[c] = -0.5 * card + 0.5 * ssq / tau2[c];
    if (grad) {
      grad->segment(col_offset[c], m.columns[c].cardinality) -= beta / tau2[c];
    }
  }

  if (k > 0) {
    // Gamma(1,1) prior on S plus the log-transform Jacobian.
    log_prior += -scale + log_scale;
    if (grad) {
      double g_sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) g_sum += g_log_tau2[c];
      (*grad)[m.scale_offset()] = 2.0 * g_sum + 1.0 - scale;

      // d f / d y_i: shares i depends positively on z_i, later shares
      // negatively; plus the Jacobian's own derivative.
      double suffix = 0.0;
      for (std::size_t i = k - 1; i-- > 0;) {
        suffix += g_log_tau2[i + 1];
        double gi = g_log_tau2[i] * (1.0 - z[i]) - z[i] * suffix;
        gi += 1.0 - 2.0 * z[i] -
              static_cast<double>(k - 2 - i) * z[i];
        (*grad)[m.shares_offset() + i] = gi;
      }
    }
  }

  return loglik + log_prior + log_jacobian;
}

double log_posterior(const Eigen::VectorXd& u, const Dataset& d,
                     const ModelStructure& m) {
  return log_posterior_with_grad(u, d, m, nullptr);
}

Eigen::VectorXd grad_log_posterior(const Eigen::VectorXd& u, const Dataset& d,
                                   const ModelStructure& m) {
  Eigen::VectorXd grad;
  log_posterior_with_grad(u, d, m, &grad);
  return grad;
}

double predict_prob(const ParamVector& p,
                    const std::vector<std::uint32_t>& assignments,
                    const std::vector<double>& covariates,
                    const ModelStructure& m) {
  if (assignments.size() != m.n_columns() || covariates.size() != m.n_fixed()) {
    throw std::invalid_argument("predict_prob: arity mismatch");
  }
  double eta = m.has_intercept ? p.mu : 0.0;
  for (std::size_t j = 0; j < m.n_fixed(); ++j) {
    eta += p.fixed[j] * covariates[j];
  }
  for (std::size_t c = 0; c < m.n_columns(); ++c) {
    const EffectColumn& col = m.columns[c];
    if (assignments[c] >= col.cardinality) {
      throw DataError("predict_prob: group index out of range for column '" +
                      col.label + "'");
    }
    double w = col.slope_covariate >= 0 ? covariates[col.slope_covariate] : 1.0;
    eta += p.effects[c][assignments[c]] * w;
  }
  return clamp_prob(inverse_logit(eta));
}

}  // namespace mrp
