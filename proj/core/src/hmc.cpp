#include "mrp/hmc.hpp"

#include <cmath>
#include <limits>

#include "mrp/errors.hpp"
#include "mrp/math.hpp"
#include "mrp/rng.hpp"

namespace mrp {

void leapfrog(const Objective& target, Eigen::VectorXd& q, Eigen::VectorXd& p,
              double step_size, int steps) {
  p += 0.5 * step_size * target.grad(q);
  for (int l = 0; l < steps; ++l) {
    q += step_size * p;
    if (!q.allFinite()) return;  // divergent; caller sees non-finite H
    if (l + 1 < steps) p += step_size * target.grad(q);
  }
  p += 0.5 * step_size * target.grad(q);
}

SampleSet hmc_sample(const Objective& target, const Eigen::VectorXd& init,
                     const HmcOptions& options) {
  if (options.step_size <= 0.0 || options.leapfrog_steps <= 0 ||
      options.draws <= 0) {
    throw ConfigError("hmc: step size, leapfrog steps, and draws must be positive");
  }

  Rng rng(options.seed);
  const Eigen::Index dim = init.size();

  SampleSet out;
  out.seed = options.seed;
  out.draws.resize(options.draws, dim);

  Eigen::VectorXd q = init;
  double logp = target.value(q);
  if (!std::isfinite(logp)) {
    throw NumericError("hmc: target is not finite at the starting point");
  }

  Eigen::VectorXd p(dim), q_new(dim), p_new(dim);
  const int total = options.warmup + options.draws;
  for (int it = 0; it < total; ++it) {
    for (Eigen::Index i = 0; i < dim; ++i) p[i] = rng.normal();

    q_new = q;
    p_new = p;
    leapfrog(target, q_new, p_new, options.step_size, options.leapfrog_steps);

    double h0 = -logp + 0.5 * p.squaredNorm();
    double logp_new = q_new.allFinite()
                          ? target.value(q_new)
                          : -std::numeric_limits<double>::infinity();
    double h1 = -logp_new + 0.5 * p_new.squaredNorm();

    ++out.proposed;
    bool divergent = !std::isfinite(h1);
    if (divergent) ++out.divergences;
    // Draw the acceptance uniform unconditionally so the stream layout does
    // not depend on trajectory outcomes.
    double u = rng.uniform();
    if (!divergent && u < std::exp(h0 - h1)) {
      q = q_new;
      logp = logp_new;
      ++out.accepted;
    }
    if (it >= options.warmup) out.draws.row(it - options.warmup) = q;
  }
  out.acceptance_rate =
      out.proposed > 0 ? static_cast<double>(out.accepted) / out.proposed : 0.0;
  return out;
}

SampleSet hmc_sample(const Dataset& d, const ModelStructure& m,
                     const HmcOptions& options) {
  Eigen::VectorXd start = Eigen::VectorXd::Zero(m.n_params());
  if (m.has_intercept) {
    double successes = 0.0, trials = 0.0;
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
      successes += d.successes[i];
      trials += d.trials[i];
    }
    double rate = trials > 0.0 ? successes / trials : 0.5;
    rate = std::min(std::max(rate, 1e-3), 1.0 - 1e-3);
    start[0] = logit(rate);
  }
  return hmc_sample(posterior_objective(d, m), start, options);
}

Eigen::VectorXd mean_draws(const SampleSet& samples) {
  if (samples.draws.rows() == 0) throw DataError("empty sample set");
  return samples.draws.colwise().mean();
}

ParamVector posterior_means(const SampleSet& samples, const ModelStructure& m) {
  return constrain(mean_draws(samples), m);
}

}  // namespace mrp
