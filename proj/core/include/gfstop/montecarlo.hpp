#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfstop/inference.hpp"
#include "gfstop/sequential.hpp"
#include "gfstop/stage_game.hpp"

namespace gfstop::montecarlo {

/// Exact fraction with a small numerator/denominator; kept normalized with a
/// positive denominator.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);
  Rational operator*(const Rational& o) const;
  double value() const { return static_cast<double>(num) / den; }
  std::string str() const;
  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
};

/// A seeded sample of censored stage-game histories.
struct SampledDataset {
  std::vector<History> histories;
  double cutoff = 0.0;
  std::uint64_t seed = 0;
};

/// n independent draws from the true model, censored at c (x2 recorded iff
/// x1 <= c). Deterministic per seed.
SampledDataset sample_histories(const TrueModel& true_model, double c, int n,
                                std::uint64_t seed);

enum class Unknowns { means, means_and_vars };

/// Closed-form posterior mode under the improper flat prior:
/// mu1 = mean(x1); mu2 = mean over uncensored of (x2 + gamma (x1 - mu1));
/// variances from the corresponding mean squared residuals.
inference::PseudoTrueEstimate map_estimate(const SampledDataset& dataset,
                                           double gamma, Unknowns unknowns);

struct PessimismResult {
  double frac_mu2_below_true = 0.0;
  double frac_var2_above_true = 0.0;
};

/// Fraction of replications whose flat-prior mode under-estimates the
/// second-period fundamental, and whose second-period variance estimate
/// exceeds the truth. Replications run in parallel with per-replication
/// generators keyed (seed, rep).
PessimismResult mc_pessimism_experiment(int n, int reps,
                                        const TrueModel& true_model, double c,
                                        double gamma, std::uint64_t seed);

/// Expected posterior mode over the mu2 grid for datasets of outcome
/// histories (only the draw from the stopping period is recorded), with a
/// correct dogmatic belief about mu1 and bias gamma. The censored-x1
/// integral in the likelihood of a second-period outcome uses 128-node
/// Gauss-Legendre.
double outcome_history_inference(const TrueModel& true_model, double c, int n,
                                 const sequential::PosteriorGrid& grid,
                                 double gamma, int reps, std::uint64_t seed);

/// Finite-urn model: n_balls balls, a fraction theta labeled "a", drawn
/// without replacement, urn refreshed every two draws; the censoring rule
/// stops observation after a first-period "b".
struct UrnSpec {
  int n_balls = 4;  // multiple of 4
  bool censor_on_first_b = true;
};

/// Signals in table-row order.
enum UrnSignal { kAA = 0, kAB = 1, kBA = 2, kBB = 3, kBCensored = 4 };

struct UrnResult {
  /// Likelihood of each signal (rows aa, ab, ba, bb, b-censored) under
  /// theta in {1/4, 1/2, 3/4} (columns), as exact rationals.
  std::array<std::array<Rational, 3>, 5> table;
  /// Expected log-likelihood of the objective 25/25/50 mix of {aa, ab,
  /// b-censored} under each theta; -inf where a signal is impossible.
  std::array<double, 3> expected_loglik;
  /// Maximizer of the mixture log-likelihood over [0, kappa] when requested
  /// (4-ball urn only).
  std::optional<double> q_a_star;
};

UrnResult freddy_urn(const UrnSpec& spec, std::optional<double> kappa);

}  // namespace gfstop::montecarlo
