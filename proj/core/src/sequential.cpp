#include "gfstop/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"
#include "gfstop/rng.hpp"

namespace gfstop::sequential {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, int nodes) {
  if (nodes < 2 || !(hi > lo))
    throw DomainError("grid requires nodes >= 2 and hi > lo");
  std::vector<double> v(nodes);
  for (int i = 0; i < nodes; ++i)
    v[i] = lo + (hi - lo) * i / static_cast<double>(nodes - 1);
  return v;
}

}  // namespace

PosteriorGrid PosteriorGrid::uniform_mu2(double lo, double hi, int nodes,
                                         double mu1_known) {
  PosteriorGrid g;
  g.axis2 = linspace(lo, hi, nodes);
  g.log_weights.assign(g.axis2.size(), 0.0);
  g.mu1_known = mu1_known;
  g.normalize();
  return g;
}

PosteriorGrid PosteriorGrid::uniform_2d(double lo1, double hi1, int nodes1,
                                        double lo2, double hi2, int nodes2,
                                        double mask_gamma) {
  PosteriorGrid g;
  g.axis1 = linspace(lo1, hi1, nodes1);
  g.axis2 = linspace(lo2, hi2, nodes2);
  g.log_weights.assign(g.axis1.size() * g.axis2.size(), 0.0);
  if (mask_gamma > 0.0) {
    // Parallelogram support: top and bottom edges follow slope -gamma
    // through the center of the mu1 axis.
    const double center1 = 0.5 * (lo1 + hi1);
    for (std::size_t i = 0; i < g.axis1.size(); ++i) {
      for (std::size_t j = 0; j < g.axis2.size(); ++j) {
        const double shifted =
            g.axis2[j] + mask_gamma * (g.axis1[i] - center1);
        if (shifted < lo2 || shifted > hi2)
          g.log_weights[i * g.axis2.size() + j] = kNegInf;
      }
    }
  }
  g.normalize();
  return g;
}

void PosteriorGrid::normalize() {
  double max_lw = kNegInf;
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (max_lw == kNegInf)
    throw DomainError("posterior grid has no support");
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - max_lw);
  const double log_total = max_lw + std::log(total);
  for (double& lw : log_weights) lw -= log_total;
}

std::vector<double> PosteriorGrid::weights() const {
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i]);
  return w;
}

double PosteriorGrid::mean1() const {
  if (!two_dimensional()) return mu1_known;
  double acc = 0.0;
  for (std::size_t i = 0; i < axis1.size(); ++i)
    for (std::size_t j = 0; j < axis2.size(); ++j)
      acc += std::exp(log_weights[i * axis2.size() + j]) * axis1[i];
  return acc;
}

double PosteriorGrid::mean2() const {
  double acc = 0.0;
  if (!two_dimensional()) {
    for (std::size_t j = 0; j < axis2.size(); ++j)
      acc += std::exp(log_weights[j]) * axis2[j];
    return acc;
  }
  for (std::size_t i = 0; i < axis1.size(); ++i)
    for (std::size_t j = 0; j < axis2.size(); ++j)
      acc += std::exp(log_weights[i * axis2.size() + j]) * axis2[j];
  return acc;
}

double PosteriorGrid::mode2() const {
  const std::size_t arg =
      std::max_element(log_weights.begin(), log_weights.end()) -
      log_weights.begin();
  return axis2[arg % axis2.size()];
}

bool PosteriorGrid::mode_on_boundary() const {
  const std::size_t arg =
      std::max_element(log_weights.begin(), log_weights.end()) -
      log_weights.begin();
  const std::size_t j = arg % axis2.size();
  if (j == 0 || j + 1 == axis2.size()) return true;
  if (two_dimensional()) {
    const std::size_t i = arg / axis2.size();
    if (i == 0 || i + 1 == axis1.size()) return true;
  }
  return false;
}

PosteriorGrid posterior_update(PosteriorGrid grid, const History& history,
                               double gamma, double sd) {
  if (!(sd > 0.0)) throw DomainError("posterior_update requires sd > 0");
  const double inv_two_var = 1.0 / (2.0 * sd * sd);
  if (!grid.two_dimensional()) {
    // The x1 factor is constant in mu2, so censored histories are a no-op.
    if (history.x2) {
      const double shifted =
          *history.x2 + gamma * (history.x1 - grid.mu1_known);
      for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
        const double d = shifted - grid.axis2[j];
        grid.log_weights[j] -= d * d * inv_two_var;
      }
    }
    grid.normalize();
    return grid;
  }
  for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
    const double d1 = history.x1 - grid.axis1[i];
    const double lw1 = -d1 * d1 * inv_two_var;
    for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
      double lw = lw1;
      if (history.x2) {
        const double m =
            grid.axis2[j] - gamma * (history.x1 - grid.axis1[i]);
        const double d2 = *history.x2 - m;
        lw -= d2 * d2 * inv_two_var;
      }
      grid.log_weights[i * grid.axis2.size() + j] += lw;
    }
  }
  grid.normalize();
  return grid;
}

double myopic_cutoff(const PosteriorGrid& grid, const StageGame& game,
                     double gamma, double sd) {
  if (game.direction() != Direction::benefit)
    throw UnsupportedError("myopic_cutoff supports benefit-direction games");
  const std::vector<double> w = grid.weights();
  const double var = sd * sd;
  auto mixture_d = [&](double x1) {
    double cv = 0.0;
    if (!grid.two_dimensional()) {
      for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
        if (w[j] == 0.0) continue;
        cv += w[j] * stage::continuation_value(
                         game, x1,
                         {grid.mu1_known, grid.axis2[j], var, var, gamma});
      }
    } else {
      for (std::size_t i = 0; i < grid.axis1.size(); ++i)
        for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
          const double wij = w[i * grid.axis2.size() + j];
          if (wij == 0.0) continue;
          cv += wij * stage::continuation_value(
                          game, x1,
                          {grid.axis1[i], grid.axis2[j], var, var, gamma});
        }
    }
    return game.u1(x1) - cv;
  };
  // The mixture difference is strictly increasing; expand a bracket around
  // the posterior-mean belief, then bisect.
  const double center = grid.mean2();
  const double limit = std::abs(center) + std::abs(grid.mean1()) + 50.0 * sd;
  double lo = center - sd, hi = center + sd;
  double step = sd;
  while (mixture_d(lo) > 0.0 && lo > -limit) {
    step *= 2.0;
    lo -= step;
  }
  step = sd;
  while (mixture_d(hi) < 0.0 && hi < limit) {
    step *= 2.0;
    hi += step;
  }
  if (mixture_d(lo) > 0.0 || mixture_d(hi) < 0.0)
    throw NoRootError("myopic cutoff bracket not found");
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_d(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SequentialRun simulate_sequential(const StageGame& game,
                                  const TrueModel& true_model, double gamma,
                                  PosteriorGrid prior, int T,
                                  std::uint64_t seed) {
  if (T < 1) throw DomainError("simulate_sequential requires T >= 1");
  SequentialRun run;
  run.seed = seed;
  {
    std::ostringstream os;
    os << game.describe() << " mu=(" << true_model.mu1_true << ","
       << true_model.mu2_true << ") sd=" << true_model.sd
       << " gamma=" << gamma;
    run.scenario = os.str();
  }
  run.cutoff.reserve(T);
  run.posterior_mean2.reserve(T);
  run.history.reserve(T);
  PosteriorGrid posterior = std::move(prior);
  for (int t = 1; t <= T; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    const auto [z1, z2] = rng.next_normal_pair();
    const double x1 = true_model.mu1_true + true_model.sd * z1;
    const double x2 = true_model.mu2_true -
                      true_model.gamma_true * (x1 - true_model.mu1_true) +
                      true_model.sd * z2;
    const double cutoff =
        myopic_cutoff(posterior, game, gamma, true_model.sd);
    History h;
    h.x1 = x1;
    if (x1 <= cutoff) h.x2 = x2;
    posterior = posterior_update(std::move(posterior), h, gamma,
                                 true_model.sd);
    run.cutoff.push_back(cutoff);
    run.posterior_mean2.push_back(posterior.mean2());
    run.history.push_back(h);
  }
  run.support_warning = posterior.mode_on_boundary();
  return run;
}

}  // namespace gfstop::sequential
