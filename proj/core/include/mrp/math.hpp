#pragma once

#include <cmath>

namespace mrp {

inline double inverse_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// log(1 + exp(a)) without overflow for large a or underflow for small a.
inline double log1p_exp(double a) {
  if (a > 0.0) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

// Predicted probabilities are kept strictly inside (0,1) so that logit()
// stays finite downstream (calibration shifts, share aggregation).
inline double clamp_prob(double p) {
  constexpr double eps = 1e-12;
  if (p < eps) return eps;
  if (p > 1.0 - eps) return 1.0 - eps;
  return p;
}

// Kahan-Babuska compensated accumulator. Aggregation sums cells in a fixed
// order with this type so results are reproducible bit-for-bit.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

}  // namespace mrp
