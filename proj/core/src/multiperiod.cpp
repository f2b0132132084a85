#include "gfstop/multiperiod.hpp"

#include <cmath>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"

namespace gfstop::multiperiod {

namespace {

std::size_t tri_size(int L) {
  return static_cast<std::size_t>(L - 1) * L / 2;
}

// Row-major lower-triangle index of gamma_{i,j}, 1 <= j < i <= L.
std::size_t tri_index(int i, int j) {
  return static_cast<std::size_t>(i - 2) * (i - 1) / 2 +
         static_cast<std::size_t>(j - 1);
}

}  // namespace

MultiPeriodSpec::MultiPeriodSpec(int L,
                                 std::vector<double> gamma_lower_triangle,
                                 std::vector<double> mu_true, double sd,
                                 std::vector<double> cutoffs)
    : L_(L),
      gamma_(std::move(gamma_lower_triangle)),
      mu_true_(std::move(mu_true)),
      sd_(sd),
      cutoffs_(std::move(cutoffs)) {
  if (L_ < 2) throw DomainError("MultiPeriodSpec requires L >= 2");
  if (gamma_.size() != tri_size(L_))
    throw DomainError("gamma triangle has wrong size");
  if (mu_true_.size() != static_cast<std::size_t>(L_))
    throw DomainError("mu_true has wrong length");
  if (cutoffs_.size() != static_cast<std::size_t>(L_ - 1))
    throw DomainError("cutoffs must have length L - 1");
  if (!(sd_ > 0.0)) throw DomainError("sd must be positive");
  for (double g : gamma_)
    if (!(g >= 0.0)) throw DomainError("gamma entries must be >= 0");
}

MultiPeriodSpec MultiPeriodSpec::alpha_delta(int L, double alpha, double delta,
                                             std::vector<double> mu_true,
                                             double sd,
                                             std::vector<double> cutoffs) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(delta >= 0.0) || !(delta <= 1.0))
    throw DomainError("delta must lie in [0, 1]");
  std::vector<double> tri(tri_size(L));
  for (int i = 2; i <= L; ++i)
    for (int j = 1; j < i; ++j)
      tri[tri_index(i, j)] = alpha * std::pow(delta, i - j - 1);
  return MultiPeriodSpec(L, std::move(tri), std::move(mu_true), sd,
                         std::move(cutoffs));
}

MultiPeriodSpec MultiPeriodSpec::with_history_dependent_cutoffs(
    int, std::vector<double>, std::vector<double>, double,
    std::vector<std::function<double(const std::vector<double>&)>>) {
  throw UnsupportedError(
      "history-dependent continuation regions are not supported; only "
      "constant cutoff vectors admit the closed-form inference");
}

double MultiPeriodSpec::gamma(int i, int j) const {
  if (j < 1 || j >= i || i > L_)
    throw DomainError("gamma(i, j) requires 1 <= j < i <= L");
  return gamma_[tri_index(i, j)];
}

double path_weight_sum(const MultiPeriodSpec& spec, int i, int j) {
  if (j < 1 || j >= i || i > spec.periods())
    throw DomainError("path_weight_sum requires 1 <= j < i <= L");
  // S[k] holds the sum over paths k -> j for k = j+1..i.
  std::vector<double> S(i + 1, 0.0);
  for (int k = j + 1; k <= i; ++k) {
    double acc = -spec.gamma(k, j);
    for (int m = j + 1; m < k; ++m) acc += -spec.gamma(k, m) * S[m];
    S[k] = acc;
  }
  return S[i];
}

std::vector<double> pseudo_true_L(const MultiPeriodSpec& spec, Method method) {
  const int L = spec.periods();
  std::vector<double> distortion(L + 1, 0.0);  // mu_j_true - E[X_j|X_j<=c_j]
  for (int j = 1; j < L; ++j) {
    const auto m = gauss::truncated_lower_moments(
        {spec.mu_true(j), spec.sd()}, spec.cutoff(j));
    distortion[j] = spec.mu_true(j) - m.mean;
  }
  std::vector<double> mu(L + 1, 0.0);
  if (method == Method::iterative) {
    mu[1] = spec.mu_true(1);
    for (int i = 2; i <= L; ++i) {
      double acc = spec.mu_true(i);
      for (int j = 1; j < i; ++j) {
        const auto mj = gauss::truncated_lower_moments(
            {spec.mu_true(j), spec.sd()}, spec.cutoff(j));
        acc -= spec.gamma(i, j) * (mu[j] - mj.mean);
      }
      mu[i] = acc;
    }
  } else {
    for (int i = 1; i <= L; ++i) {
      double acc = spec.mu_true(i);
      for (int j = 1; j < i; ++j)
        acc += path_weight_sum(spec, i, j) * distortion[j];
      mu[i] = acc;
    }
  }
  return {mu.begin() + 1, mu.end()};
}

AlphaDeltaVerdict alpha_delta_classify(double alpha, double delta, int L) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(delta >= 0.0) || !(delta <= 1.0))
    throw DomainError("delta must lie in [0, 1]");
  if (L < 2) throw DomainError("L must be >= 2");
  if (delta == alpha) return AlphaDeltaVerdict::boundary;
  // Cutoffs are irrelevant for the sign of the path-weight sums.
  std::vector<double> zeros(L, 0.0), cuts(L - 1, 0.0);
  const MultiPeriodSpec spec =
      MultiPeriodSpec::alpha_delta(L, alpha, delta, zeros, 1.0, cuts);
  for (int i = 2; i <= L; ++i)
    for (int j = 1; j < i; ++j)
      if (path_weight_sum(spec, i, j) >= 0.0)
        return AlphaDeltaVerdict::optimism_possible;
  return AlphaDeltaVerdict::all_pessimistic;
}

}  // namespace gfstop::multiperiod
