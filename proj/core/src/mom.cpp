#include "gfstop/mom.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"

namespace gfstop::mom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Monotone-increasing root of fn on [lo, hi] (possibly infinite ends, with
// geometric expansion). Throws NoSolutionError naming the range condition
// when the target is unattainable.
double invert_increasing(const std::function<double(double)>& fn,
                         double target, double lo, double hi,
                         const char* what) {
  double a, b;
  if (lo == -kInf) {
    a = -1.0;
    double step = 1.0;
    while (fn(a) > target && step < 1e12) {
      step *= 4.0;
      a -= step;
    }
  } else {
    a = lo + 1e-12 * (1.0 + std::abs(lo));
  }
  if (hi == kInf) {
    b = std::max(a, 0.0) + 1.0;
    double step = 1.0;
    while (fn(b) < target && step < 1e12) {
      step *= 4.0;
      b += step;
    }
  } else {
    b = hi - 1e-12 * (1.0 + std::abs(hi));
  }
  if (fn(a) > target || fn(b) < target) {
    std::ostringstream os;
    os << what << ": target moment " << target
       << " is outside the attainable range [" << fn(a) << ", " << fn(b)
       << "]";
    throw NoSolutionError(os.str());
  }
  for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    if (fn(mid) < target)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

FeasibleFamily::FeasibleFamily(Kind kind, double a, double b) : kind_(kind) {
  switch (kind_) {
    case Kind::gaussian:
      sd_ = a;
      gamma_ = b;
      if (!(sd_ > 0.0)) throw DomainError("gaussian family requires sd > 0");
      if (!(gamma_ > 0.0))
        throw DomainError("gaussian family requires gamma > 0");
      break;
    case Kind::gumbel:
      alpha_ = a;
      if (!(alpha_ >= -1.0) || !(alpha_ < 0.0))
        throw DomainError("gumbel family requires alpha in [-1, 0)");
      break;
    case Kind::beta:
      break;
  }
  probe_assumptions();
}

FeasibleFamily FeasibleFamily::gaussian(double sd, double gamma) {
  return FeasibleFamily(Kind::gaussian, sd, gamma);
}

FeasibleFamily FeasibleFamily::gumbel_biexponential(double alpha) {
  return FeasibleFamily(Kind::gumbel, alpha, 0.0);
}

FeasibleFamily FeasibleFamily::beta() {
  return FeasibleFamily(Kind::beta, 0.0, 0.0);
}

void FeasibleFamily::probe_assumptions() const {
  // Numerical check of the monotonicity conditions on a coarse grid.
  const auto [t1_lo, t1_hi] = theta1_range();
  const auto [s1_lo, s1_hi] = support1();
  auto theta_grid = [](double lo, double hi, int k) {
    if (lo == -kInf) lo = -3.0;
    if (hi == kInf) hi = 3.0;
    if (lo <= 0.0 && hi == 3.0) lo = 0.1;  // positive-parameter families
    return lo + (hi - lo) * k / 8.0;
  };
  auto x_grid = [&](int k) {
    double lo = s1_lo == -kInf ? -3.0 : s1_lo + 0.05;
    double hi = s1_hi == kInf ? 3.0 : s1_hi - 0.05;
    return lo + (hi - lo) * k / 8.0;
  };
  for (int k = 0; k + 1 <= 8; ++k) {
    const double t1a = theta_grid(t1_lo, t1_hi, k);
    const double t1b = theta_grid(t1_lo, t1_hi, k + 1);
    if (!(marginal1_mean(t1b) > marginal1_mean(t1a)))
      throw AssumptionError(name() +
                            ": marginal X1 mean not strictly increasing in "
                            "theta1");
    const auto [t2_lo, t2_hi] = theta2_range();
    for (int m = 0; m + 1 <= 8; ++m) {
      const double t2a = theta_grid(t2_lo, t2_hi, m);
      const double t2b = theta_grid(t2_lo, t2_hi, m + 1);
      for (int j = 0; j + 1 <= 8; ++j) {
        if (!(conditional2_mean(t1a, t2b, x_grid(j)) >
              conditional2_mean(t1a, t2a, x_grid(j))))
          throw AssumptionError(
              name() + ": conditional X2 mean not increasing in theta2");
        if (!(conditional2_mean(t1a, t2a, x_grid(j + 1)) <
              conditional2_mean(t1a, t2a, x_grid(j))))
          throw AssumptionError(
              name() + ": conditional X2 mean not decreasing in x1");
      }
    }
  }
}

double FeasibleFamily::marginal1_mean(double theta1) const {
  switch (kind_) {
    case Kind::gaussian:
      return theta1;
    case Kind::gumbel:
      return theta1;  // exponential with mean theta1
    case Kind::beta:
      return theta1 / (theta1 + 1.0);
  }
  return 0.0;
}

double FeasibleFamily::marginal1_cdf(double theta1, double c) const {
  const auto [lo, hi] = support1();
  if (c <= lo) return 0.0;
  if (c >= hi) return 1.0;
  switch (kind_) {
    case Kind::gaussian:
      return gauss::std_cdf((c - theta1) / sd_);
    case Kind::gumbel:
      return 1.0 - std::exp(-c / theta1);
    case Kind::beta:
      return std::pow(c, theta1);
  }
  return 0.0;
}

double FeasibleFamily::conditional2_mean(double theta1, double theta2,
                                         double x1) const {
  switch (kind_) {
    case Kind::gaussian:
      return theta2 - gamma_ * (x1 - theta1);
    case Kind::gumbel:
      return theta2 *
             (1.0 - 0.5 * alpha_ - alpha_ * std::exp(-x1 / theta1));
    case Kind::beta: {
      const double a = (1.0 - x1) * theta2;
      return a / (a + 1.0);
    }
  }
  return 0.0;
}

double FeasibleFamily::censored2_mean(double theta1, double theta2,
                                      double c) const {
  switch (kind_) {
    case Kind::gaussian: {
      const double m =
          gauss::truncated_lower_moments({theta1, sd_}, c).mean;
      return theta2 - gamma_ * (m - theta1);
    }
    case Kind::gumbel: {
      // E[e^{-Xt} | Xt <= u] = (1 + e^{-u}) / 2 for a unit exponential.
      const double mean_exp =
          c == kInf ? 0.5 : 0.5 * (1.0 + std::exp(-c / theta1));
      return theta2 * (1.0 - 0.5 * alpha_ - alpha_ * mean_exp);
    }
    case Kind::beta: {
      if (c >= 1.0) c = 1.0;
      if (!(c > 0.0))
        throw DomainError("beta family needs a censoring point in (0, 1]");
      // Integrate the conditional mean against theta1 x^(theta1 - 1) via the
      // substitution u = x^theta1, which removes the endpoint singularity.
      const double mass = std::pow(c, theta1);
      const double integral = gauss::adaptive_gauss_legendre(
          [&](double u) {
            const double x = std::pow(u, 1.0 / theta1);
            return conditional2_mean(theta1, theta2, x);
          },
          0.0, mass, 1e-10);
      return integral / mass;
    }
  }
  return 0.0;
}

std::pair<double, double> FeasibleFamily::support1() const {
  switch (kind_) {
    case Kind::gaussian:
      return {-kInf, kInf};
    case Kind::gumbel:
      return {0.0, kInf};
    case Kind::beta:
      return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

std::pair<double, double> FeasibleFamily::support2() const {
  return support1();
}

std::pair<double, double> FeasibleFamily::theta1_range() const {
  if (kind_ == Kind::gaussian) return {-kInf, kInf};
  return {0.0, kInf};
}

std::pair<double, double> FeasibleFamily::theta2_range() const {
  return theta1_range();
}

std::string FeasibleFamily::name() const {
  switch (kind_) {
    case Kind::gaussian:
      return "gaussian";
    case Kind::gumbel:
      return "gumbel_biexponential";
    case Kind::beta:
      return "beta";
  }
  return "?";
}

std::pair<double, double> mom_estimate(const FeasibleFamily& family,
                                       const TrueMoments& true_moments,
                                       const inference::CensoringSpec& spec) {
  spec.validate();
  const auto [t1_lo, t1_hi] = family.theta1_range();
  const double theta1 = invert_increasing(
      [&](double t1) { return family.marginal1_mean(t1); }, true_moments.m1,
      t1_lo, t1_hi, "first moment (marginal X1 mean)");
  auto mixture_m2 = [&](double t2) {
    double total = 0.0, acc = 0.0;
    for (std::size_t k = 0; k < spec.cutoffs.size(); ++k) {
      const double w =
          spec.weights[k] * family.marginal1_cdf(theta1, spec.cutoffs[k]);
      if (w <= 0.0) continue;
      total += w;
      acc += w * family.censored2_mean(theta1, t2, spec.cutoffs[k]);
    }
    if (total <= 0.0)
      throw NoIdentificationError(
          "no sub-dataset contains uncensored second-period draws");
    return acc / total;
  };
  const auto [t2_lo, t2_hi] = family.theta2_range();
  const double theta2 =
      invert_increasing(mixture_m2, true_moments.m2, t2_lo, t2_hi,
                        "second moment (censored X2 mean)");
  return {theta1, theta2};
}

dynamics::GenerationTrace mom_dynamics(const FeasibleFamily& family,
                                       const StageGame& game,
                                       const TrueMoments& true_moments,
                                       double c0, int T) {
  if (T < 1) throw DomainError("mom_dynamics requires T >= 1");
  if (!game.linear_in_x2())
    throw DomainError("mom_dynamics requires u2 linear in x2");
  const auto [s_lo, s_hi] = family.support1();
  if (!(c0 > s_lo) || !(c0 < s_hi))
    throw DomainError("c0 must lie in the interior of the X1 support");
  dynamics::GenerationTrace trace;
  trace.c0 = c0;
  std::vector<double> cutoffs{c0};
  for (int t = 1; t <= T; ++t) {
    const auto [t1, t2] = mom_estimate(
        family, true_moments, inference::CensoringSpec::equal(cutoffs));
    // Indifference point: u1(x) = u2(x, conditional X2 mean at x). The
    // difference is strictly increasing, so bisect over the support.
    auto diff = [&](double x) {
      return game.u1(x) - game.u2(x, family.conditional2_mean(t1, t2, x));
    };
    double lo = s_lo == -kInf ? -1.0 : s_lo;
    double hi = s_hi == kInf ? 1.0 : s_hi;
    if (s_lo == -kInf) {
      double step = 1.0;
      while (diff(lo) > 0.0 && step < 1e9) {
        step *= 4.0;
        lo -= step;
      }
    }
    if (s_hi == kInf) {
      double step = 1.0;
      while (diff(hi) < 0.0 && step < 1e9) {
        step *= 4.0;
        hi += step;
      }
    }
    double c;
    const double eps = 1e-9;
    if (diff(lo + (s_lo == -kInf ? 0.0 : eps)) > 0.0) {
      c = s_lo;  // always stop; clamp to the support boundary
    } else if (diff(hi - (s_hi == kInf ? 0.0 : eps)) < 0.0) {
      c = s_hi;
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        if (diff(mid) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      c = 0.5 * (lo + hi);
    }
    trace.mu1.push_back(t1);
    trace.mu2.push_back(t2);
    trace.cutoff.push_back(c);
    // Objective welfare accounting is defined for the Gaussian stage game
    // only; not reported here.
    trace.welfare_loss.push_back(std::numeric_limits<double>::quiet_NaN());
    cutoffs.push_back(c);
  }
  return trace;
}

}  // namespace gfstop::mom
