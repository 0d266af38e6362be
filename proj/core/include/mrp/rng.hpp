#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mrp {

// Deterministic random source. All variate mappings are written out here
// rather than taken from <random> distributions, so a (seed, call sequence)
// pair produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. One variate per call; the second branch
  // of the pair is discarded to keep the stream layout trivial.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Exponential with rate 1 (equivalently Gamma(1,1)).
  double exponential() { return -std::log(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  // Integer in [0, n) by scaling; n is tiny in this codebase so the modulo
  // bias of simpler schemes is avoided without rejection loops.
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Index draw proportional to weights, given the inclusive prefix sums.
  std::size_t categorical(const std::vector<double>& cumulative) {
    double u = uniform() * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cumulative[mid] <= u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mrp
