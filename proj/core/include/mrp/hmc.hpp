#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mrp/infer.hpp"
#include "mrp/params.hpp"

namespace mrp {

struct HmcOptions {
  double step_size = 0.1;
  int leapfrog_steps = 10;
  int draws = 1000;
  int warmup = 500;
  std::uint64_t seed = 0;
};

struct SampleSet {
  Eigen::MatrixXd draws;  // draw x parameter, unconstrained, post-warmup
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  int accepted = 0;
  int proposed = 0;
  int divergences = 0;  // non-finite Hamiltonians, tallied as rejections
};

// Velocity-Verlet integrator for H(q,p) = -logp(q) + |p|^2/2. Exposed so the
// reversibility property is directly testable.
void leapfrog(const Objective& target, Eigen::VectorXd& q, Eigen::VectorXd& p,
              double step_size, int steps);

// Plain HMC with identity mass matrix, fixed step size, and Metropolis
// acceptance. Deterministic given (seed, options, target).
SampleSet hmc_sample(const Objective& target, const Eigen::VectorXd& init,
                     const HmcOptions& options);

// Model-posterior wrapper starting from the same deterministic point as
// fit_map.
SampleSet hmc_sample(const Dataset& d, const ModelStructure& m,
                     const HmcOptions& options);

// Column means of the draws (unconstrained space).
Eigen::VectorXd mean_draws(const SampleSet& samples);

// Mean in unconstrained space, then constrained. Cell probabilities should
// average per-draw probabilities instead (see predict_cells overloads).
ParamVector posterior_means(const SampleSet& samples, const ModelStructure& m);

}  // namespace mrp
