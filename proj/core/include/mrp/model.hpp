#pragma once

#include <Eigen/Dense>

#include "mrp/dataset.hpp"
#include "mrp/params.hpp"

namespace mrp {

// Log joint density of the hierarchical binomial logistic model in
// unconstrained coordinates:
//
//   T_g ~ Binomial(V_g, inverse_logit(eta_g))
//   eta_g = mu + sum_j fixed_j x_gj + sum_c beta^c[group_c(g)] * w_gc
//   beta^c_l ~ Normal(0, tau_c),  tau_c = sqrt(shares_c * K) * scale
//   shares ~ Dirichlet(1),  scale ~ Gamma(1, 1)
//
// mu and the fixed slopes carry improper flat priors. The value includes the
// stick-breaking and log-transform Jacobians and drops the binomial
// coefficient and the Dirichlet normalizer (both constant in parameters).
double log_posterior(const Eigen::VectorXd& u, const Dataset& d,
                     const ModelStructure& m);

// Exact analytic gradient in unconstrained coordinates.
Eigen::VectorXd grad_log_posterior(const Eigen::VectorXd& u, const Dataset& d,
                                   const ModelStructure& m);

// Shared evaluation; pass grad = nullptr for the value alone.
double log_posterior_with_grad(const Eigen::VectorXd& u, const Dataset& d,
                               const ModelStructure& m, Eigen::VectorXd* grad);

// Probability for one cell given its per-column group assignments and fixed
// covariate values. Result is clamped strictly inside (0,1).
double predict_prob(const ParamVector& p,
                    const std::vector<std::uint32_t>& assignments,
                    const std::vector<double>& covariates,
                    const ModelStructure& m);

}  // namespace mrp
