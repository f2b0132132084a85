#pragma once

// Test-only numerical oracles, kept independent of the library's evaluation
// paths: plain composite-Simpson integration against exp(-z^2/2) built on
// nothing but std::exp.

#include <cmath>
#include <functional>

namespace oracles {

// Composite Simpson integral of f on [a, b].
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int panels = 4000) {
  const double h = (b - a) / (2.0 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i)
    acc += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double normal_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * 2.5066282746310005024157652848110453);
}

// k-th raw moment of X restricted to X <= c (unnormalized), X ~ N(mean, sd^2).
inline double lower_partial_moment(double mean, double sd, double c, int k) {
  const double lo = mean - 14.0 * sd;
  if (c <= lo) return 0.0;
  return simpson(
      [&](double x) { return std::pow(x, k) * normal_density(x, mean, sd); },
      lo, c);
}

struct TruncatedMoments {
  double mean;
  double variance;
};

// Truncated moments from direct numeric integration.
inline TruncatedMoments truncated_lower(double mean, double sd, double c) {
  const double mass = lower_partial_moment(mean, sd, c, 0);
  const double m1 = lower_partial_moment(mean, sd, c, 1) / mass;
  const double m2 = lower_partial_moment(mean, sd, c, 2) / mass;
  return {m1, m2 - m1 * m1};
}

// E[f(X)] for X ~ N(mean, sd^2) by direct integration.
inline double gaussian_expectation(const std::function<double(double)>& f,
                                   double mean, double sd) {
  return simpson(
      [&](double x) { return f(x) * normal_density(x, mean, sd); },
      mean - 14.0 * sd, mean + 14.0 * sd, 8000);
}

}  // namespace oracles
