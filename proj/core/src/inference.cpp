#include "gfstop/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"

namespace gfstop::inference {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double truncated_mean(const TrueModel& t, double c) {
  return gauss::truncated_lower_moments({t.mu1_true, t.sd}, c).mean;
}

double censor_prob(const TrueModel& t, double c) {
  if (c == kInf) return 1.0;
  if (c == -kInf) return 0.0;
  return gauss::std_cdf((c - t.mu1_true) / t.sd);
}

void require_positive_gamma(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("inference requires gamma >= 0");
}

void require_independent_truth(const TrueModel& t) {
  if (t.gamma_true != 0.0)
    throw DomainError("this estimator assumes objectively independent draws");
}

}  // namespace

CensoringSpec CensoringSpec::equal(std::vector<double> cutoffs) {
  CensoringSpec spec;
  const double w = 1.0 / static_cast<double>(cutoffs.size());
  spec.weights.assign(cutoffs.size(), w);
  spec.cutoffs = std::move(cutoffs);
  return spec;
}

void CensoringSpec::validate() const {
  if (cutoffs.empty() || cutoffs.size() != weights.size())
    throw DomainError("CensoringSpec requires matching non-empty lists");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("CensoringSpec weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw DomainError("CensoringSpec weights must sum to 1");
}

double kl_divergence(const TrueModel& true_model, const SubjectiveModel& subj,
                     double c) {
  if (!(subj.var1 > 0.0) || !(subj.var2 > 0.0))
    throw DomainError("kl_divergence requires positive subjective variances");
  const double vt = true_model.sd * true_model.sd;
  double kl =
      gauss::gauss_kl(true_model.mu1_true, vt, subj.mu1, subj.var1);
  if (c == -kInf) return kl;
  const double hi =
      c == kInf ? true_model.mu1_true + 12.0 * true_model.sd : c;
  const double lo = std::min(true_model.mu1_true, hi) - 12.0 * true_model.sd;
  kl += gauss::adaptive_gauss_legendre(
      [&](double x1) {
        const double density =
            gauss::std_pdf((x1 - true_model.mu1_true) / true_model.sd) /
            true_model.sd;
        const double m_true = true_model.mu2_true -
                              true_model.gamma_true *
                                  (x1 - true_model.mu1_true);
        const double m_subj = subj.mu2 - subj.gamma * (x1 - subj.mu1);
        return density * gauss::gauss_kl(m_true, vt, m_subj, subj.var2);
      },
      lo, hi, 1e-12);
  return kl;
}

PseudoTrueEstimate pseudo_true(const TrueModel& true_model, double c,
                               double gamma) {
  require_positive_gamma(gamma);
  require_independent_truth(true_model);
  if (c == -kInf)
    throw NoIdentificationError(
        "no second-period draws are observed when c = -inf");
  PseudoTrueEstimate est;
  est.mu1_star = true_model.mu1_true;
  est.mu2_star = true_model.mu2_true -
                 gamma * (true_model.mu1_true - truncated_mean(true_model, c));
  return est;
}

PseudoTrueEstimate pseudo_true_multi(const TrueModel& true_model,
                                     const CensoringSpec& spec, double gamma) {
  require_positive_gamma(gamma);
  require_independent_truth(true_model);
  spec.validate();
  double total = 0.0, acc = 0.0;
  for (std::size_t t = 0; t < spec.cutoffs.size(); ++t) {
    const double w = spec.weights[t] * censor_prob(true_model, spec.cutoffs[t]);
    if (w <= 0.0) continue;
    total += w;
    acc += w * pseudo_true(true_model, spec.cutoffs[t], gamma).mu2_star;
  }
  if (total <= 0.0)
    throw NoIdentificationError(
        "no sub-dataset contains uncensored second-period draws");
  PseudoTrueEstimate est;
  est.mu1_star = true_model.mu1_true;
  est.mu2_star = acc / total;
  return est;
}

PseudoTrueEstimate pseudo_true_mean_var(const TrueModel& true_model, double c,
                                        double gamma) {
  PseudoTrueEstimate est = pseudo_true(true_model, c, gamma);
  const auto trunc =
      gauss::truncated_lower_moments({true_model.mu1_true, true_model.sd}, c);
  est.var1_star = true_model.sd * true_model.sd;
  est.var2_star = true_model.sd * true_model.sd +
                  gamma * gamma * trunc.variance;
  return est;
}

PseudoTrueEstimate pseudo_true_constrained(double mu_common_true, double sd,
                                           double c, double gamma) {
  require_positive_gamma(gamma);
  if (!(sd > 0.0)) throw DomainError("sd must be positive");
  PseudoTrueEstimate est;
  if (c == -kInf) {
    est.mu1_star = est.mu2_star = mu_common_true;
    return est;
  }
  const TrueModel t{mu_common_true, mu_common_true, sd, 0.0};
  const double mu2o =
      mu_common_true -
      gamma / (1.0 + gamma) * (mu_common_true - truncated_mean(t, c));
  const double p = censor_prob(t, c) * (1.0 + gamma) * (1.0 + gamma);
  const double w2 = p / (1.0 + p);
  est.mu1_star = est.mu2_star = (1.0 - w2) * mu_common_true + w2 * mu2o;
  return est;
}

PseudoTrueEstimate pseudo_true_gamma_range(const TrueModel& true_model,
                                           double c, double gamma_lo,
                                           double gamma_hi) {
  if (!(gamma_lo <= gamma_hi))
    throw DomainError("gamma_range requires gamma_lo <= gamma_hi");
  const double g_true = true_model.gamma_true;
  if (g_true >= gamma_lo && g_true <= gamma_hi)
    throw UnsupportedError(
        "true gamma inside [gamma_lo, gamma_hi]: this case is not "
        "characterized");
  const double g_tilde = g_true > gamma_hi ? gamma_hi : gamma_lo;
  PseudoTrueEstimate est;
  est.mu1_star = true_model.mu1_true;
  est.gamma_star = g_tilde;
  // X1's marginal is N(mu1, sd^2) under every Psi(.; gamma_true), so the
  // truncated expectation does not depend on gamma_true.
  est.mu2_star =
      true_model.mu2_true +
      (g_true - g_tilde) *
          (true_model.mu1_true - truncated_mean(true_model, c));
  if (c == kInf) est.mu2_star = true_model.mu2_true;
  return est;
}

PseudoTrueEstimate pseudo_true_cost(const TrueModel& true_model, double c,
                                    double gamma) {
  require_positive_gamma(gamma);
  require_independent_truth(true_model);
  if (c == kInf)
    throw NoIdentificationError(
        "no second-period draws are observed when c = +inf");
  PseudoTrueEstimate est;
  est.mu1_star = true_model.mu1_true;
  const double upper_mean =
      gauss::truncated_upper_moments({true_model.mu1_true, true_model.sd}, c)
          .mean;
  est.mu2_star =
      true_model.mu2_true - gamma * (true_model.mu1_true - upper_mean);
  return est;
}

PseudoTrueEstimate pseudo_true_selection_mix(const TrueModel& true_model,
                                             double c_baseline, double alpha,
                                             double gamma,
                                             const StageGame& game) {
  require_positive_gamma(gamma);
  if (!(alpha >= 0.0) || !(alpha < 1.0))
    throw DomainError("selection mix requires alpha in [0, 1)");
  // Selection neglecters infer the true fundamentals and censor at the
  // correct-beliefs cutoff.
  const double c_neglect =
      stage::optimal_cutoff(game, {true_model.mu1_true, true_model.mu2_true,
                                   true_model.sd * true_model.sd,
                                   true_model.sd * true_model.sd, gamma});
  const double wn = alpha * censor_prob(true_model, c_neglect);
  const double wb = (1.0 - alpha) * censor_prob(true_model, c_baseline);
  if (wn + wb <= 0.0)
    throw NoIdentificationError("no uncensored second-period draws");
  PseudoTrueEstimate est;
  est.mu1_star = true_model.mu1_true;
  const double mn =
      wn > 0.0 ? pseudo_true(true_model, c_neglect, gamma).mu2_star : 0.0;
  const double mb =
      wb > 0.0 ? pseudo_true(true_model, c_baseline, gamma).mu2_star : 0.0;
  est.mu2_star = (wn * mn + wb * mb) / (wn + wb);
  return est;
}

PseudoTrueEstimate pseudo_true_ref_dependence(const TrueModel& true_model,
                                              double mu1o, double mu2o,
                                              double eta, double c,
                                              double gamma) {
  if (!(eta >= 0.0)) throw DomainError("eta must be >= 0");
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  require_independent_truth(true_model);
  PseudoTrueEstimate est;
  est.mu1_star = (1.0 + eta) * true_model.mu1_true - eta * mu1o;
  est.mu2_star = (1.0 + eta) * true_model.mu2_true - eta * mu2o;
  if (gamma > 0.0) {
    const double m = truncated_mean(true_model, c);
    est.mu2_star -= gamma * ((1.0 + eta) * (true_model.mu1_true - m) +
                             eta * (mu1o - m));
  }
  return est;
}

std::pair<double, double> sufficient_statistics(const TrueModel& true_model,
                                                const CensoringSpec& spec,
                                                double gamma) {
  spec.validate();
  // E[h2 + gamma h1 | h2 observed] under the data-generating model, which
  // may itself carry reversals (gamma_true). Collapses to
  // mu2 + gamma * E[X1 | X1 <= c] when the truth is independent.
  double total = 0.0, acc = 0.0;
  for (std::size_t t = 0; t < spec.cutoffs.size(); ++t) {
    const double w = spec.weights[t] * censor_prob(true_model, spec.cutoffs[t]);
    if (w <= 0.0) continue;
    const double m = truncated_mean(true_model, spec.cutoffs[t]);
    total += w;
    acc += w * (true_model.mu2_true -
                true_model.gamma_true * (m - true_model.mu1_true) + gamma * m);
  }
  if (total <= 0.0)
    throw NoIdentificationError("no uncensored second-period draws");
  return {true_model.mu1_true, acc / total};
}

namespace {

// Nelder-Mead over n variables; deterministic, no randomness. Returns the
// best vertex after convergence of both the function spread and the simplex
// diameter.
struct NelderMead {
  double f_tol = 1e-12;
  double x_tol = 1e-9;
  int max_iter = 20000;

  std::pair<std::vector<double>, double> minimize(
      const std::function<double(const std::vector<double>&)>& f,
      std::vector<double> start, double step) const {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> value(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) value[i] = f(simplex[i]);

    auto order = [&] {
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j)
          if (value[j] < value[i]) {
            std::swap(value[i], value[j]);
            std::swap(simplex[i], simplex[j]);
          }
    };
    order();
    for (int it = 0; it < max_iter; ++it) {
      double diameter = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        diameter = std::max(diameter,
                            std::abs(simplex[n][i] - simplex[0][i]));
      if (value[n] - value[0] < f_tol && diameter < x_tol) break;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
      }
      for (double& x : centroid) x /= static_cast<double>(n);

      auto blend = [&](double coef) {
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j)
          p[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
        return p;
      };
      const std::vector<double> reflected = blend(-1.0);
      const double fr = f(reflected);
      if (fr < value[0]) {
        const std::vector<double> expanded = blend(-2.0);
        const double fe = f(expanded);
        if (fe < fr) {
          simplex[n] = expanded;
          value[n] = fe;
        } else {
          simplex[n] = reflected;
          value[n] = fr;
        }
      } else if (fr < value[n - 1]) {
        simplex[n] = reflected;
        value[n] = fr;
      } else {
        const std::vector<double> contracted = blend(fr < value[n] ? -0.5
                                                                   : 0.5);
        const double fc = f(contracted);
        if (fc < std::min(fr, value[n])) {
          simplex[n] = contracted;
          value[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
              simplex[i][j] = 0.5 * (simplex[i][j] + simplex[0][j]);
            value[i] = f(simplex[i]);
          }
        }
      }
      order();
    }
    return {simplex[0], value[0]};
  }
};

double golden_minimize(const std::function<double(double)>& f, double lo,
                       double hi, double x_tol) {
  const double ratio = 0.6180339887498948482045868343656381;
  double a = lo, b = hi;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

std::pair<std::vector<double>, double> multi_start_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<std::vector<double>>& starts, double step) {
  NelderMead nm;
  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    auto [point, value] = nm.minimize(f, start, step);
    if (value < best_value - 1e-10 ||
        (std::abs(value - best_value) <= 1e-10 &&
         (best.empty() || lex_less(point, best)))) {
      best = point;
      best_value = value;
    }
  }
  return {best, best_value};
}

}  // namespace

PseudoTrueEstimate kl_oracle_minimize(const TrueModel& true_model, double c,
                                      double gamma, ParameterSet set,
                                      double gamma_lo, double gamma_hi) {
  const double sd = true_model.sd;
  const double v = sd * sd;
  const double mu1 = true_model.mu1_true;
  const double mu2 = true_model.mu2_true;
  PseudoTrueEstimate est;
  switch (set) {
    case ParameterSet::means: {
      auto f = [&](const std::vector<double>& p) {
        return kl_divergence(true_model, {p[0], p[1], v, v, gamma}, c);
      };
      std::vector<std::vector<double>> starts;
      for (double d1 : {-sd, 0.0, sd})
        for (double d2 : {-3.0 * sd * std::max(1.0, gamma), -sd, 0.0})
          starts.push_back({mu1 + d1, mu2 + d2});
      auto [point, value] = multi_start_minimize(f, starts, 0.5 * sd);
      (void)value;
      est.mu1_star = point[0];
      est.mu2_star = point[1];
      return est;
    }
    case ParameterSet::means_and_vars: {
      auto f = [&](const std::vector<double>& p) {
        return kl_divergence(
            true_model, {p[0], p[1], std::exp(p[2]), std::exp(p[3]), gamma},
            c);
      };
      std::vector<std::vector<double>> starts;
      for (double d2 : {-2.0 * sd * std::max(1.0, gamma), 0.0})
        for (double dv : {-0.5, 0.0, 0.5})
          starts.push_back({mu1, mu2 + d2, std::log(v), std::log(v) + dv});
      auto [point, value] = multi_start_minimize(f, starts, 0.3);
      (void)value;
      est.mu1_star = point[0];
      est.mu2_star = point[1];
      est.var1_star = std::exp(point[2]);
      est.var2_star = std::exp(point[3]);
      return est;
    }
    case ParameterSet::diagonal: {
      auto f = [&](double mu) {
        return kl_divergence(true_model, {mu, mu, v, v, gamma}, c);
      };
      const double mu = golden_minimize(f, mu1 - 8.0 * sd * (1.0 + gamma),
                                        mu1 + 4.0 * sd, 1e-10);
      est.mu1_star = est.mu2_star = mu;
      return est;
    }
    case ParameterSet::with_gamma: {
      if (!(gamma_lo <= gamma_hi))
        throw DomainError("with_gamma requires gamma_lo <= gamma_hi");
      auto inner = [&](double g) {
        auto f = [&](const std::vector<double>& p) {
          return kl_divergence(true_model, {p[0], p[1], v, v, g}, c);
        };
        std::vector<std::vector<double>> starts;
        for (double d2 : {-2.0 * sd, 0.0, 2.0 * sd})
          starts.push_back({mu1, mu2 + d2});
        return multi_start_minimize(f, starts, 0.5 * sd);
      };
      double g_star;
      if (gamma_hi - gamma_lo < 1e-12) {
        g_star = gamma_lo;
      } else {
        g_star = golden_minimize(
            [&](double g) { return inner(g).second; }, gamma_lo, gamma_hi,
            1e-7 * (1.0 + gamma_hi - gamma_lo));
        // Snap to an endpoint when the profile keeps improving toward it.
        for (double endpoint : {gamma_lo, gamma_hi}) {
          if (inner(endpoint).second <= inner(g_star).second + 1e-12)
            g_star = endpoint;
        }
      }
      auto [point, value] = inner(g_star);
      (void)value;
      est.mu1_star = point[0];
      est.mu2_star = point[1];
      est.gamma_star = g_star;
      return est;
    }
  }
  throw DomainError("unknown parameter set");
}

}  // namespace gfstop::inference
