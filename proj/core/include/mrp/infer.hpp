#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "mrp/dataset.hpp"
#include "mrp/model.hpp"

namespace mrp {

// A differentiable log density to maximize. Used for the model posterior and
// for stub targets in tests.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

Objective posterior_objective(const Dataset& d, const ModelStructure& m);

struct MapOptions {
  int max_iter = 500;
  double tol = 1e-8;  // convergence on gradient max-norm
  int memory = 10;    // L-BFGS history length
  std::uint64_t seed = 0;
  // Optional per-iteration hook: (iteration, objective, gradient max-norm).
  std::function<void(int, double, double)> on_iteration;
};

struct FitResult {
  Eigen::VectorXd mode;
  double log_posterior_at_mode = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_grad_norm = 0.0;
};

// Limited-memory quasi-Newton ascent with backtracking line search. The
// objective sequence is non-decreasing across accepted steps; failure to
// converge is reported through `converged`, never thrown. Throws
// NumericError only when the objective is non-finite at the start.
FitResult maximize_lbfgs(const Objective& objective, Eigen::VectorXd start,
                         const MapOptions& options);

// MAP fit of the model posterior from the deterministic start: mu at the
// logit of the pooled success rate, effects at zero, uniform shares, S = 1.
FitResult fit_map(const Dataset& d, const ModelStructure& m,
                  const MapOptions& options);

// Worst-coordinate relative error between the analytic gradient and central
// finite differences with step h (relative to max(1, |analytic|, |numeric|)).
double max_rel_grad_error(const Objective& objective, const Eigen::VectorXd& u,
                          double h);
double check_gradient(const Eigen::VectorXd& u, const Dataset& d,
                      const ModelStructure& m, double h);

}  // namespace mrp
