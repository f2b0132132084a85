#include "gfstop/gauss.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "gfstop/errors.hpp"

namespace gfstop::gauss {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
constexpr double kSqrt2 = 1.4142135623730950488016887242096981;
constexpr double kSqrtPi = 1.7724538509055160272981674833411452;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << "non-finite value for " << what << ": " << x;
    throw DomainError(os.str());
  }
}

// Upper-tail Mills ratio (1 - Phi(x)) / phi(x) for x >= 8, by the Laplace
// continued fraction r(x) = 1/(x + 1/(x + 2/(x + 3/(...)))).
double mills_upper_cf(double x) {
  double r = 0.0;
  for (int k = 60; k >= 1; --k) r = static_cast<double>(k) / (x + r);
  return 1.0 / (x + r);
}

}  // namespace

std::pair<double, double> std_pdf_cdf(double z) {
  require_finite(z, "std_pdf_cdf argument");
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
  double cdf = 0.5 * std::erfc(-z * kInvSqrt2);
  // Keep the cdf strictly inside (0,1): erfc underflows around |z| ~ 37.6.
  if (cdf <= 0.0) cdf = std::numeric_limits<double>::denorm_min();
  if (cdf >= 1.0) cdf = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return {pdf, cdf};
}

double std_pdf(double z) { return std_pdf_cdf(z).first; }

double std_cdf(double z) { return std_pdf_cdf(z).second; }

double log_std_cdf(double z) {
  require_finite(z, "log_std_cdf argument");
  if (z > -8.0) return std::log(std_cdf(z));
  // log Phi(z) = log phi(z) + log r(-z) in the far lower tail.
  const double log_pdf = -0.5 * z * z - 0.9189385332046727417803297364056176;
  return log_pdf + std::log(mills_upper_cf(-z));
}

double mills_lower(double z) {
  require_finite(z, "mills_lower argument");
  if (z < -8.0) return 1.0 / mills_upper_cf(-z);
  return std_pdf(z) / std_cdf(z);
}

Moments truncated_lower_moments(const GaussianSpec& g, double c) {
  if (!(g.sd > 0.0)) throw DomainError("GaussianSpec requires sd > 0");
  if (std::isnan(c) || c == -std::numeric_limits<double>::infinity())
    throw DomainError("truncated_lower_moments requires c finite or +inf");
  if (c == std::numeric_limits<double>::infinity())
    return {g.mean, g.sd * g.sd};
  const double z = (c - g.mean) / g.sd;
  const double lam = mills_lower(z);
  const double mean = g.mean - g.sd * lam;
  double variance = g.sd * g.sd * (1.0 - z * lam - lam * lam);
  if (variance <= 0.0) {
    // Deep truncation: 1 - z*lam - lam^2 cancels; fall back to the series
    // Var ~ sd^2 / z^2 * (1 - 6/z^2) valid for z << -1.
    const double z2 = z * z;
    variance = g.sd * g.sd / z2 * (1.0 - 6.0 / z2);
  }
  return {mean, variance};
}

Moments truncated_upper_moments(const GaussianSpec& g, double c) {
  if (std::isnan(c) || c == std::numeric_limits<double>::infinity())
    throw DomainError("truncated_upper_moments requires c finite or -inf");
  // X | X >= c  ==  -(Y | Y <= -c) with Y = -X ~ N(-mean, sd^2).
  const Moments m = truncated_lower_moments({-g.mean, g.sd}, -c);
  return {-m.mean, m.variance};
}

namespace {

// Newton iteration on the Hermite recurrence (weight exp(-x^2)); standard
// initial guesses from Stroud & Secrest.
QuadRule compute_hermite(int n) {
  QuadRule rule;
  rule.x.assign(n, 0.0);
  rule.w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.x[1];
    } else {
      z = 2.0 * z - rule.x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 0.7511255444649424828587030047762277;  // pi^{-1/4}
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    rule.x[i] = z;
    rule.x[n - 1 - i] = -z;
    rule.w[i] = 2.0 / (pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  if (n % 2 == 1) rule.x[m - 1] = 0.0;
  return rule;
}

// Newton iteration on the Legendre recurrence for nodes on [-1, 1].
QuadRule compute_legendre(int n) {
  QuadRule rule;
  rule.x.assign(n, 0.0);
  rule.w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  return rule;
}

const QuadRule& cached_rule(int n, QuadRule (*compute)(int),
                            std::map<int, QuadRule>& cache,
                            std::mutex& mutex) {
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

}  // namespace

const QuadRule& gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite requires n >= 1");
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  return cached_rule(n, compute_hermite, cache, mutex);
}

const QuadRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre requires n >= 1");
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  return cached_rule(n, compute_legendre, cache, mutex);
}

double gauss_expectation(const std::function<double(double)>& f,
                         const GaussianSpec& g, int nodes) {
  if (!(g.sd > 0.0)) throw DomainError("GaussianSpec requires sd > 0");
  if (nodes < 8) throw DomainError("gauss_expectation requires nodes >= 8");
  const QuadRule& rule = gauss_hermite(nodes);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = g.mean + kSqrt2 * g.sd * rule.x[i];
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand not finite at abscissa " << x;
      throw EvaluationError(os.str());
    }
    acc += rule.w[i] * v;
  }
  return acc / kSqrtPi;
}

namespace {

double panel_gl(const std::function<double(double)>& f, double a, double b,
                const QuadRule& rule) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double x = mid + half * rule.x[i];
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand not finite at abscissa " << x;
      throw EvaluationError(os.str());
    }
    acc += rule.w[i] * v;
  }
  return half * acc;
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                    double whole, double tol, int depth, const QuadRule& rule) {
  const double mid = 0.5 * (a + b);
  const double left = panel_gl(f, a, mid, rule);
  const double right = panel_gl(f, mid, b, rule);
  const double err = std::abs(left + right - whole);
  if (err < tol || depth >= 48) return left + right;
  return adaptive_rec(f, a, mid, left, tol / 2, depth + 1, rule) +
         adaptive_rec(f, mid, b, right, tol / 2, depth + 1, rule);
}

}  // namespace

double adaptive_gauss_legendre(const std::function<double(double)>& f,
                               double a, double b, double tol) {
  if (!(b > a)) {
    if (a == b) return 0.0;
    return -adaptive_gauss_legendre(f, b, a, tol);
  }
  const QuadRule& rule = gauss_legendre(15);
  return adaptive_rec(f, a, b, panel_gl(f, a, b, rule), tol, 0, rule);
}

double fixed_gauss_legendre(const std::function<double(double)>& f, double a,
                            double b, int nodes) {
  return panel_gl(f, a, b, gauss_legendre(nodes));
}

double gauss_kl(double mu_true, double var_true, double mu_model,
                double var_model) {
  if (!(var_true > 0.0) || !(var_model > 0.0))
    throw DomainError("gauss_kl requires positive variances");
  const double d = mu_true - mu_model;
  return 0.5 * std::log(var_model / var_true) +
         (var_true + d * d) / (2.0 * var_model) - 0.5;
}

}  // namespace gfstop::gauss
