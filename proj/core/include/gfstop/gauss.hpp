#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace gfstop::gauss {

/// Parameters of a scalar Gaussian N(mean, sd^2), sd > 0.
struct GaussianSpec {
  double mean = 0.0;
  double sd = 1.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Standard normal density and distribution at z.
/// Accuracy target 1e-12 relative; cdf strictly in (0,1) for finite z.
std::pair<double, double> std_pdf_cdf(double z);

double std_pdf(double z);
double std_cdf(double z);
double log_std_cdf(double z);

/// Lower-tail inverse Mills ratio phi(z)/Phi(z). Evaluated through a
/// continued fraction for z < -8 where the direct ratio loses accuracy.
double mills_lower(double z);

/// Mean and variance of X | X <= c for X ~ N(g.mean, g.sd^2).
/// c may be +inf (no truncation).
Moments truncated_lower_moments(const GaussianSpec& g, double c);

/// Mean and variance of X | X >= c; the reflection of the lower case.
/// c may be -inf.
Moments truncated_upper_moments(const GaussianSpec& g, double c);

/// Gauss-Hermite estimate of E[f(X)], X ~ N(g.mean, g.sd^2).
/// Exact for polynomials of degree < 2*nodes; nodes >= 8.
double gauss_expectation(const std::function<double(double)>& f,
                         const GaussianSpec& g, int nodes = 64);

/// Nodes and weights of an n-point quadrature rule.
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss-Hermite rule for weight exp(-x^2) on (-inf, inf).
/// Computed once per n and cached; safe for concurrent use.
const QuadRule& gauss_hermite(int n);

/// n-point Gauss-Legendre rule on [-1, 1]. Cached as above.
const QuadRule& gauss_legendre(int n);

/// Integral of f over [a, b] by adaptive panel-splitting Gauss-Legendre.
double adaptive_gauss_legendre(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-10);

/// Fixed-order Gauss-Legendre integral of f over [a, b].
double fixed_gauss_legendre(const std::function<double(double)>& f, double a,
                            double b, int nodes);

/// KL divergence from N(mu_true, var_true) to N(mu_model, var_model),
/// ln(sm/st) + (st^2 + (mt - mm)^2) / (2 sm^2) - 1/2.
double gauss_kl(double mu_true, double var_true, double mu_model,
                double var_model);

}  // namespace gfstop::gauss
