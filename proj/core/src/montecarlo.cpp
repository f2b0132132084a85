#include "gfstop/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"
#include "gfstop/parallel.hpp"
#include "gfstop/rng.hpp"

namespace gfstop::montecarlo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long long gcd_ll(long long a, long long b) {
  while (b != 0) {
    const long long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw DomainError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = gcd_ll(num == 0 ? den : num, den);
  num /= g;
  den /= g;
  if (num == 0) den = 1;
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(num * o.num, den * o.den);
}

std::string Rational::str() const {
  std::ostringstream os;
  os << num;
  if (den != 1) os << "/" << den;
  return os.str();
}

SampledDataset sample_histories(const TrueModel& true_model, double c, int n,
                                std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_histories requires n >= 1");
  SampledDataset data;
  data.cutoff = c;
  data.seed = seed;
  data.histories.reserve(n);
  CounterRng rng(seed);
  for (int i = 0; i < n; ++i) {
    const auto [z1, z2] = rng.next_normal_pair();
    History h;
    h.x1 = true_model.mu1_true + true_model.sd * z1;
    if (h.x1 <= c)
      h.x2 = true_model.mu2_true -
             true_model.gamma_true * (h.x1 - true_model.mu1_true) +
             true_model.sd * z2;
    data.histories.push_back(h);
  }
  return data;
}

inference::PseudoTrueEstimate map_estimate(const SampledDataset& dataset,
                                           double gamma, Unknowns unknowns) {
  if (dataset.histories.empty())
    throw NoIdentificationError("empty dataset");
  double sum1 = 0.0;
  std::size_t n_unc = 0;
  for (const History& h : dataset.histories) {
    sum1 += h.x1;
    if (h.x2) ++n_unc;
  }
  if (n_unc == 0)
    throw NoIdentificationError(
        "no uncensored second-period observations in the dataset");
  const double n = static_cast<double>(dataset.histories.size());
  const double mu1 = sum1 / n;
  double sum2 = 0.0;
  for (const History& h : dataset.histories)
    if (h.x2) sum2 += *h.x2 + gamma * (h.x1 - mu1);
  const double mu2 = sum2 / static_cast<double>(n_unc);

  inference::PseudoTrueEstimate est;
  est.mu1_star = mu1;
  est.mu2_star = mu2;
  if (unknowns == Unknowns::means_and_vars) {
    double ss1 = 0.0, ss2 = 0.0;
    for (const History& h : dataset.histories) {
      ss1 += (h.x1 - mu1) * (h.x1 - mu1);
      if (h.x2) {
        const double r = *h.x2 - mu2 + gamma * (h.x1 - mu1);
        ss2 += r * r;
      }
    }
    est.var1_star = ss1 / n;
    est.var2_star = ss2 / static_cast<double>(n_unc);
  }
  return est;
}

PessimismResult mc_pessimism_experiment(int n, int reps,
                                        const TrueModel& true_model, double c,
                                        double gamma, std::uint64_t seed) {
  if (reps < 1) throw DomainError("mc_pessimism_experiment requires reps >= 1");
  std::atomic<long long> count_mu{0}, count_var{0};
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
    CounterRng rng(seed, rep + 1);
    double sum1 = 0.0;
    std::vector<std::pair<double, double>> unc;
    unc.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto [z1, z2] = rng.next_normal_pair();
      const double x1 = true_model.mu1_true + true_model.sd * z1;
      sum1 += x1;
      if (x1 <= c) {
        const double x2 = true_model.mu2_true -
                          true_model.gamma_true *
                              (x1 - true_model.mu1_true) +
                          true_model.sd * z2;
        unc.emplace_back(x1, x2);
      }
    }
    if (unc.empty()) return;  // undefined estimate counts for neither
    const double mu1 = sum1 / n;
    double sum2 = 0.0;
    for (const auto& [x1, x2] : unc) sum2 += x2 + gamma * (x1 - mu1);
    const double mu2 = sum2 / static_cast<double>(unc.size());
    double ss2 = 0.0;
    for (const auto& [x1, x2] : unc) {
      const double r = x2 - mu2 + gamma * (x1 - mu1);
      ss2 += r * r;
    }
    const double var2 = ss2 / static_cast<double>(unc.size());
    if (mu2 < true_model.mu2_true) count_mu.fetch_add(1);
    if (var2 > true_model.sd * true_model.sd) count_var.fetch_add(1);
  });
  return {static_cast<double>(count_mu.load()) / reps,
          static_cast<double>(count_var.load()) / reps};
}

namespace {

// Table of ln L(u) where L(u) is the likelihood of a second-period outcome
// at distance u = x2 - mu2 from the node: the censored-x1 integral evaluated
// with 128-node Gauss-Legendre on (mu1 - 8 sd, c), tabulated once per call
// and read back with cubic interpolation.
class OutcomeLogLik {
 public:
  OutcomeLogLik(const TrueModel& t, double gamma, double c, double u_lo,
                double u_hi)
      : lo_(u_lo - 0.5), step_(2e-3) {
    const std::size_t count =
        static_cast<std::size_t>((u_hi + 0.5 - lo_) / step_) + 4;
    values_.resize(count);
    const double sd = t.sd;
    const auto& rule = gauss::gauss_legendre(128);
    const double a = t.mu1_true - 8.0 * sd;
    const double mid = 0.5 * (a + c), half = 0.5 * (c - a);
    std::vector<double> x1(rule.x.size()), w(rule.x.size());
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      x1[k] = mid + half * rule.x[k];
      w[k] = half * rule.w[k] *
             gauss::std_pdf((x1[k] - t.mu1_true) / sd) / sd;
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double u = lo_ + step_ * static_cast<double>(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < x1.size(); ++k) {
        const double z = (u + gamma * (x1[k] - t.mu1_true)) / sd;
        acc += w[k] * std::exp(-0.5 * z * z);
      }
      values_[i] = std::log(std::max(acc, 1e-300));
    }
  }

  double operator()(double u) const {
    const double pos = (u - lo_) / step_;
    const std::size_t i = std::min(
        values_.size() - 3,
        static_cast<std::size_t>(std::max(1.0, std::floor(pos))));
    const double s = pos - static_cast<double>(i);
    // Catmull-Rom through the four neighbouring table points.
    const double p0 = values_[i - 1], p1 = values_[i], p2 = values_[i + 1],
                 p3 = values_[i + 2];
    return p1 + 0.5 * s *
                    (p2 - p0 +
                     s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                          s * (3.0 * (p1 - p2) + p3 - p0)));
  }

 private:
  double lo_;
  double step_;
  std::vector<double> values_;
};

}  // namespace

double outcome_history_inference(const TrueModel& true_model, double c, int n,
                                 const sequential::PosteriorGrid& grid,
                                 double gamma, int reps, std::uint64_t seed) {
  if (grid.two_dimensional())
    throw UnsupportedError(
        "outcome-history inference uses a mu2-only grid (mu1 known)");
  if (reps < 1 || n < 1)
    throw DomainError("outcome_history_inference requires n, reps >= 1");
  // Outcome histories (x1, empty) have likelihood constant in mu2; only the
  // (empty, x2) rows matter. Sample everything first to size the table.
  std::vector<std::vector<double>> kept(reps);
  double u_min = kInf, u_max = -kInf;
  for (int rep = 0; rep < reps; ++rep) {
    CounterRng rng(seed, static_cast<std::uint64_t>(rep) + 1);
    for (int i = 0; i < n; ++i) {
      const auto [z1, z2] = rng.next_normal_pair();
      const double x1 = true_model.mu1_true + true_model.sd * z1;
      if (x1 <= c) {
        const double x2 = true_model.mu2_true -
                          true_model.gamma_true *
                              (x1 - true_model.mu1_true) +
                          true_model.sd * z2;
        kept[rep].push_back(x2);
        u_min = std::min(u_min, x2 - grid.axis2.back());
        u_max = std::max(u_max, x2 - grid.axis2.front());
      }
    }
  }
  if (!(u_min <= u_max))
    throw NoIdentificationError("no uncensored second-period outcomes");
  const OutcomeLogLik loglik(true_model, gamma, c, u_min, u_max);
  std::vector<double> modes(reps,
                            std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
    if (kept[rep].empty()) return;
    double best = -kInf;
    double mode = grid.axis2.front();
    for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
      double ll = grid.log_weights[j];
      for (double x2 : kept[rep]) ll += loglik(x2 - grid.axis2[j]);
      if (ll > best) {
        best = ll;
        mode = grid.axis2[j];
      }
    }
    modes[rep] = mode;
  });
  double acc = 0.0;
  int counted = 0;
  for (double m : modes)
    if (std::isfinite(m)) {
      acc += m;
      ++counted;
    }
  return acc / counted;
}

UrnResult freddy_urn(const UrnSpec& spec, std::optional<double> kappa) {
  if (spec.n_balls < 4 || spec.n_balls % 4 != 0)
    throw DomainError("urn size must be a positive multiple of 4");
  if (!spec.censor_on_first_b)
    throw UnsupportedError(
        "only the stop-after-first-b censoring rule is modelled");
  const long long n = spec.n_balls;
  UrnResult result;
  for (int t = 0; t < 3; ++t) {
    const long long a = n * (t + 1) / 4;  // balls labelled "a"
    const long long b = n - a;
    result.table[kAA][t] = Rational(a, n) * Rational(a - 1, n - 1);
    result.table[kAB][t] = Rational(a, n) * Rational(b, n - 1);
    result.table[kBA][t] = Rational(b, n) * Rational(a, n - 1);
    result.table[kBB][t] = Rational(b, n) * Rational(b - 1, n - 1);
    result.table[kBCensored][t] = Rational(b, n);
  }
  // Objective mix of observations: 25% aa, 25% ab, 50% b-censored.
  for (int t = 0; t < 3; ++t) {
    const double paa = result.table[kAA][t].value();
    const double pab = result.table[kAB][t].value();
    const double pb = result.table[kBCensored][t].value();
    result.expected_loglik[t] =
        paa > 0.0 ? 0.25 * std::log(paa) + 0.25 * std::log(pab) +
                        0.5 * std::log(pb)
                  : -kInf;
  }
  if (kappa) {
    if (spec.n_balls != 4)
      throw UnsupportedError(
          "the q_a* characterization is derived for the 4-ball urn only");
    if (!(*kappa > 0.0) || !(*kappa < 1.0))
      throw DomainError("kappa must lie in (0, 1)");
    const double k = *kappa;
    // Mixture over analyst types: q_a at theta=3/4, kappa - q_a at
    // theta=1/4, 1 - kappa at theta=1/2.
    auto mix_loglik = [&](double q) {
      auto mix = [&](UrnSignal s) {
        return q * result.table[s][2].value() +
               (k - q) * result.table[s][0].value() +
               (1.0 - k) * result.table[s][1].value();
      };
      return 0.25 * std::log(mix(kAA)) + 0.25 * std::log(mix(kAB)) +
             0.5 * std::log(mix(kBCensored));
    };
    // Concave in q: golden-section over [0, kappa].
    const double ratio = 0.6180339887498948482045868343656381;
    double a = 0.0, b = k;
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = mix_loglik(x1), f2 = mix_loglik(x2);
    while (b - a > 1e-12) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = mix_loglik(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = mix_loglik(x2);
      }
    }
    result.q_a_star = 0.5 * (a + b);
  }
  return result;
}

}  // namespace gfstop::montecarlo
