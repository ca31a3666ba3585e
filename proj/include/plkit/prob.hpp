#pragma once

#include <cmath>

namespace plkit {

// Probability clamp shared by the weak-label math and the EM oracle. Keeps
// every logarithm finite; well below all test tolerances.
inline constexpr double kProbEpsilon = 1e-12;

inline double clamp_prob(double p) {
  if (p < kProbEpsilon) return kProbEpsilon;
  if (p > 1.0 - kProbEpsilon) return 1.0 - kProbEpsilon;
  return p;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) {
  p = clamp_prob(p);
  return std::log(p / (1.0 - p));
}

}  // namespace plkit
