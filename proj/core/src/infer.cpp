#include "mrp/infer.hpp"

#include <cmath>
#include <deque>

#include "mrp/errors.hpp"
#include "mrp/math.hpp"

namespace mrp {

Objective posterior_objective(const Dataset& d, const ModelStructure& m) {
  return Objective{
      [&d, &m](const Eigen::VectorXd& u) { return log_posterior(u, d, m); },
      [&d, &m](const Eigen::VectorXd& u) { return grad_log_posterior(u, d, m); },
  };
}

FitResult maximize_lbfgs(const Objective& objective, Eigen::VectorXd x,
                         const MapOptions& options) {
  // Internally minimizes -f to keep the textbook update formulas.
  auto value = [&](const Eigen::VectorXd& v) { return -objective.value(v); };
  auto grad = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(-objective.grad(v));
  };

  double f = value(x);
  if (!std::isfinite(f)) {
    throw NumericError("objective is not finite at the starting point");
  }
  Eigen::VectorXd g = grad(x);

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> history;

  FitResult result;
  const double c1 = 1e-4;
  int iter = 0;
  double gnorm = g.lpNorm<Eigen::Infinity>();

  while (true) {
    if (options.on_iteration) options.on_iteration(iter, -f, gnorm);
    if (gnorm < options.tol) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iter) break;

    // Two-loop recursion for the search direction.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      alpha[i] = history[i].rho * history[i].s.dot(q);
      q -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      double beta = history[i].rho * history[i].y.dot(q);
      q += (alpha[i] - beta) * history[i].s;
    }
    Eigen::VectorXd direction = -q;
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {  // not a descent direction: reset to steepest
      direction = -g;
      slope = -g.squaredNorm();
      history.clear();
    }

    // Backtracking Armijo search; a plain-improvement fallback handles the
    // region where the Armijo decrement sinks below rounding noise.
    double step = history.empty() ? std::min(1.0, 1.0 / std::max(1.0, gnorm)) : 1.0;
    double f_new = f;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * direction;
      f_new = value(x_new);
      if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      step = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        x_new = x + step * direction;
        f_new = value(x_new);
        if (std::isfinite(f_new) && f_new <= f) {
          accepted = f_new < f;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted) break;  // no ascent possible at double precision

    Eigen::VectorXd g_new = grad(x_new);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    double sy = s.dot(yv);
    if (sy > 1e-10 * s.norm() * yv.norm()) {
      history.push_back({std::move(s), std::move(yv), 1.0 / sy});
      if (history.size() > static_cast<std::size_t>(options.memory)) {
        history.pop_front();
      }
    }
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    gnorm = g.lpNorm<Eigen::Infinity>();
    ++iter;
  }

  result.mode = std::move(x);
  result.log_posterior_at_mode = -f;
  result.iterations = iter;
  result.final_grad_norm = gnorm;
  return result;
}

FitResult fit_map(const Dataset& d, const ModelStructure& m,
                  const MapOptions& options) {
  if (d.n_rows() == 0) throw DataError("fit_map: empty dataset");

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
  // Zero start elsewhere means: effects at the prior mean, uniform shares,
  // S = 1.
  return maximize_lbfgs(posterior_objective(d, m), std::move(start), options);
}

double max_rel_grad_error(const Objective& objective, const Eigen::VectorXd& u,
                          double h) {
  Eigen::VectorXd analytic = objective.grad(u);
  Eigen::VectorXd point = u;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    point[i] = u[i] + h;
    double fp = objective.value(point);
    point[i] = u[i] - h;
    double fm = objective.value(point);
    point[i] = u[i];
    double numeric = (fp - fm) / (2.0 * h);
    double scale = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

double check_gradient(const Eigen::VectorXd& u, const Dataset& d,
                      const ModelStructure& m, double h) {
  return max_rel_grad_error(posterior_objective(d, m), u, h);
}

}  // namespace mrp
