#include "gfstop/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"
#include "gfstop/inference.hpp"

namespace gfstop::dynamics {

namespace {

SubjectiveModel belief_model(const TrueModel& t, double mu2, double gamma) {
  return {t.mu1_true, mu2, t.sd * t.sd, t.sd * t.sd, gamma};
}

// Direct iteration with a step-halving fallback when residuals oscillate
// without shrinking.
double fixed_point(const std::function<double(double)>& map, double start,
                   double tol, int max_iter, int* iterations_out) {
  double x = start;
  double prev_residual = 0.0;
  bool damped = false;
  for (int it = 1; it <= max_iter; ++it) {
    const double fx = map(x);
    const double residual = fx - x;
    if (std::abs(residual) <= tol) {
      if (iterations_out) *iterations_out = it;
      return fx;
    }
    if (it > 1 && residual * prev_residual < 0.0 &&
        std::abs(residual) >= std::abs(prev_residual))
      damped = true;
    x = damped ? 0.5 * (x + fx) : fx;
    prev_residual = residual;
    if (!std::isfinite(x))
      throw NonContractionError(
          "fixed-point iteration diverged (Assumption 2 likely violated)");
  }
  throw NonContractionError(
      "fixed-point iteration did not converge within the iteration budget "
      "(Assumption 2 likely violated)");
}

}  // namespace

double iteration_map(double mu2, const StageGame& game,
                     const TrueModel& true_model, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("iteration_map requires gamma > 0");
  const double c =
      stage::optimal_cutoff(game, belief_model(true_model, mu2, gamma));
  return inference::pseudo_true(true_model, c, gamma).mu2_star;
}

SteadyState steady_state(const StageGame& game, const TrueModel& true_model,
                         double gamma, double tol, int max_iter) {
  auto map = [&](double mu2) {
    return iteration_map(mu2, game, true_model, gamma);
  };
  int iterations = 0;
  const double mu2_inf =
      fixed_point(map, true_model.mu2_true, tol, max_iter, &iterations);
  for (double offset : {-5.0 * true_model.sd, 5.0 * true_model.sd}) {
    int it2 = 0;
    const double other =
        fixed_point(map, true_model.mu2_true + offset, tol, max_iter, &it2);
    iterations += it2;
    if (std::abs(other - mu2_inf) > 10.0 * tol) {
      std::ostringstream os;
      os << "fixed points from distant starts disagree (" << mu2_inf
         << " vs " << other << "); Assumption 2 likely violated";
      throw NonContractionError(os.str());
    }
  }
  SteadyState ss;
  ss.mu2_inf = mu2_inf;
  ss.c_inf =
      stage::optimal_cutoff(game, belief_model(true_model, mu2_inf, gamma));
  ss.iterations = iterations;
  ss.residual = std::abs(map(mu2_inf) - mu2_inf);
  return ss;
}

GenerationTrace run_generations(Environment env, const StageGame& game,
                                const TrueModel& true_model, double gamma,
                                double c0, int T) {
  if (T < 1) throw DomainError("run_generations requires T >= 1");
  GenerationTrace trace;
  trace.c0 = c0;
  std::vector<double> cutoffs{c0};
  for (int t = 1; t <= T; ++t) {
    double mu2;
    if (env == Environment::auxiliary) {
      mu2 = inference::pseudo_true(true_model, cutoffs.back(), gamma).mu2_star;
    } else {
      mu2 = inference::pseudo_true_multi(
                true_model, inference::CensoringSpec::equal(cutoffs), gamma)
                .mu2_star;
    }
    const double c =
        stage::optimal_cutoff(game, belief_model(true_model, mu2, gamma));
    trace.mu1.push_back(true_model.mu1_true);
    trace.mu2.push_back(mu2);
    trace.cutoff.push_back(c);
    trace.welfare_loss.push_back(welfare_loss(c, game, true_model));
    cutoffs.push_back(c);
  }
  return trace;
}

GenerationTrace run_generations_mean_var(const StageGame& game,
                                         const TrueModel& true_model,
                                         double gamma, double c0, int T) {
  if (T < 1) throw DomainError("run_generations_mean_var requires T >= 1");
  GenerationTrace trace;
  trace.c0 = c0;
  trace.has_var2 = true;
  double prev_cutoff = c0;
  for (int t = 1; t <= T; ++t) {
    const auto est =
        inference::pseudo_true_mean_var(true_model, prev_cutoff, gamma);
    const SubjectiveModel model{true_model.mu1_true, est.mu2_star,
                                *est.var1_star, *est.var2_star, gamma};
    const double c = stage::optimal_cutoff(game, model);
    trace.mu1.push_back(est.mu1_star);
    trace.mu2.push_back(est.mu2_star);
    trace.var2.push_back(*est.var2_star);
    trace.cutoff.push_back(c);
    trace.welfare_loss.push_back(welfare_loss(c, game, true_model));
    prev_cutoff = c;
  }
  return trace;
}

double welfare_loss(double c, const StageGame& game,
                    const TrueModel& true_model) {
  const double c_star = stage::objective_cutoff(game, true_model);
  const SubjectiveModel truth = true_model.as_subjective();
  return stage::strategy_value(c_star, game, truth) -
         stage::strategy_value(c, game, truth);
}

namespace {

GenerationTrace run_selection_mix(const StageGame& game,
                                  const TrueModel& true_model, double gamma,
                                  double alpha, double c0, int T) {
  GenerationTrace trace;
  trace.c0 = c0;
  double prev_cutoff = c0;
  for (int t = 1; t <= T; ++t) {
    // Generation 0 is homogeneous at c0; the neglecter/baseline mixture only
    // appears in the datasets of generations t >= 2.
    const auto est =
        t == 1 ? inference::pseudo_true(true_model, c0, gamma)
               : inference::pseudo_true_selection_mix(true_model, prev_cutoff,
                                                      alpha, gamma, game);
    const double c =
        stage::optimal_cutoff(game, belief_model(true_model, est.mu2_star,
                                                 gamma));
    trace.mu1.push_back(est.mu1_star);
    trace.mu2.push_back(est.mu2_star);
    trace.cutoff.push_back(c);
    trace.welfare_loss.push_back(welfare_loss(c, game, true_model));
    prev_cutoff = c;
  }
  return trace;
}

GenerationTrace run_society(const SocietySpec& spec, const StageGame& base,
                            const TrueModel& true_model, double gamma,
                            double c0, int T) {
  switch (spec.kind) {
    case SocietySpec::Kind::known_var:
      return run_generations(Environment::auxiliary, base, true_model, gamma,
                             c0, T);
    case SocietySpec::Kind::unknown_var:
      return run_generations_mean_var(base, true_model, gamma, c0, T);
    case SocietySpec::Kind::payoff_variant:
      if (!spec.game)
        throw DomainError("payoff_variant society requires a game");
      return run_generations(Environment::auxiliary, *spec.game, true_model,
                             gamma, c0, T);
    case SocietySpec::Kind::selection_mix:
      return run_selection_mix(base, true_model, gamma, spec.alpha, c0, T);
  }
  throw DomainError("unknown society kind");
}

}  // namespace

ComparePair compare_societies(const SocietySpec& spec_a,
                              const SocietySpec& spec_b,
                              const StageGame& base_game,
                              const TrueModel& true_model, double gamma,
                              double c0, int T) {
  ComparePair pair;
  pair.a = run_society(spec_a, base_game, true_model, gamma, c0, T);
  pair.b = run_society(spec_b, base_game, true_model, gamma, c0, T);
  return pair;
}

SteadyState steady_state_ref_dependence(const StageGame& game,
                                        const TrueModel& true_model,
                                        double gamma, double eta, double tol,
                                        int max_iter) {
  // Self-consistency of the two-argument update: prior beliefs mu_o feed the
  // encoding, the pseudo-true estimate feeds back as the next prior.
  auto update = [&](double mu2o) {
    const double c =
        stage::optimal_cutoff(game, belief_model(true_model, mu2o, gamma));
    return inference::pseudo_true_ref_dependence(
               true_model, true_model.mu1_true, mu2o, eta, c, gamma)
        .mu2_star;
  };
  int iterations = 0;
  const double mu2_inf =
      fixed_point(update, true_model.mu2_true, tol, max_iter, &iterations);
  SteadyState ss;
  ss.mu2_inf = mu2_inf;
  ss.c_inf =
      stage::optimal_cutoff(game, belief_model(true_model, mu2_inf, gamma));
  ss.iterations = iterations;
  ss.residual = std::abs(update(mu2_inf) - mu2_inf);
  return ss;
}

}  // namespace gfstop::dynamics
