#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfstop/stage_game.hpp"

namespace gfstop::sequential {

/// Discretized belief over fundamentals with log-weights. When axis1 is
/// empty the first-period fundamental is known (mu1_known) and the grid is
/// one-dimensional over mu2; otherwise the grid is axis1 x axis2 with
/// log_weights in row-major order (axis1 outer), optionally masked to a
/// parallelogram whose top and bottom edges have slope -gamma.
struct PosteriorGrid {
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<double> log_weights;
  double mu1_known = 0.0;

  static PosteriorGrid uniform_mu2(double lo, double hi, int nodes,
                                   double mu1_known);
  static PosteriorGrid uniform_2d(double lo1, double hi1, int nodes1,
                                  double lo2, double hi2, int nodes2,
                                  double mask_gamma = 0.0);

  bool two_dimensional() const { return !axis1.empty(); }
  std::size_t size() const { return log_weights.size(); }

  /// Shifts log-weights by their maximum and normalizes so that the weights
  /// sum to one.
  void normalize();

  /// Normalized weights (linear scale).
  std::vector<double> weights() const;

  double mean1() const;
  double mean2() const;
  double mode2() const;
  bool mode_on_boundary() const;
};

/// Multiplies in the likelihood of one stage-game history and renormalizes.
/// Censored histories contribute only the first-draw factor, which is
/// constant across a mu2-only grid.
PosteriorGrid posterior_update(PosteriorGrid grid, const History& history,
                               double gamma, double sd);

/// Cutoff maximizing posterior-expected payoff: the unique root of the
/// mixture indifference function over the grid nodes.
double myopic_cutoff(const PosteriorGrid& grid, const StageGame& game,
                     double gamma, double sd);

/// One path of the agents-acting-one-at-a-time environment.
struct SequentialRun {
  std::vector<double> cutoff;           // threshold used in round t
  std::vector<double> posterior_mean2;  // posterior mean after round t
  std::vector<History> history;
  std::uint64_t seed = 0;
  std::string scenario;
  bool support_warning = false;  // posterior mode stuck on the grid boundary
};

/// Simulates T rounds: each round draws (X1, X2) from the true model with a
/// counter-based generator keyed (seed, round), applies the myopic cutoff,
/// censors, and updates the posterior. Bit-identical for identical seeds.
SequentialRun simulate_sequential(const StageGame& game,
                                  const TrueModel& true_model, double gamma,
                                  PosteriorGrid prior, int T,
                                  std::uint64_t seed);

}  // namespace gfstop::sequential
