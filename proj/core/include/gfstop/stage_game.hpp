#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace gfstop {

/// A feasible model Psi(mu1, mu2, var1, var2; gamma):
///   X1 ~ N(mu1, var1),  X2 | X1 = x1 ~ N(mu2 - gamma (x1 - mu1), var2).
struct SubjectiveModel {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double var1 = 1.0;
  double var2 = 1.0;
  double gamma = 0.0;
};

/// The objective draw-generating distribution. gamma_true = 0 means the two
/// draws are independent.
struct TrueModel {
  double mu1_true = 0.0;
  double mu2_true = 0.0;
  double sd = 1.0;
  double gamma_true = 0.0;

  SubjectiveModel as_subjective() const {
    return {mu1_true, mu2_true, sd * sd, sd * sd, gamma_true};
  }
};

/// A stage-game history: the first draw, and the second draw when the agent
/// continued (absent when censored).
struct History {
  double x1 = 0.0;
  std::optional<double> x2;
};

enum class Direction { benefit, cost };

/// Two-period optimal-stopping payoff family. Immutable after construction;
/// tabulated payoffs are probed for the regularity conditions on a sampled
/// grid when built.
class StageGame {
 public:
  struct SearchWithRecall {
    double q;  // probability the first draw remains available, in [0, 1)
  };
  struct CostDraws {};  // u1 = -x1, u2 = -x2
  struct Tabulated {
    std::function<double(double)> u1;
    std::function<double(double, double)> u2;
    Direction direction;
  };

  static StageGame search_with_recall(double q);
  static StageGame cost_draws();
  static StageGame tabulated(std::function<double(double)> u1,
                             std::function<double(double, double)> u2,
                             Direction direction, double probe_scale = 1.0);
  /// Imposes an extra waiting cost kappa >= 0 on continuing; the base game
  /// must be benefit-direction.
  static StageGame wait_cost(const StageGame& base, double kappa);

  double u1(double x1) const;
  double u2(double x1, double x2) const;
  Direction direction() const;
  double wait_cost_kappa() const { return kappa_; }

  const SearchWithRecall* as_search() const {
    return std::get_if<SearchWithRecall>(&family_);
  }
  const CostDraws* as_cost_draws() const {
    return std::get_if<CostDraws>(&family_);
  }
  const Tabulated* as_tabulated() const {
    return std::get_if<Tabulated>(&family_);
  }

  /// Numerical check that x2 -> u2(x1, x2) is linear (second differences
  /// vanish on a probe grid); exact for the built-in families.
  bool linear_in_x2() const;

  /// The x -> -x mirror image, a benefit-direction game when this one is
  /// cost-direction. Used to route cost games through the benefit solver.
  StageGame reflected() const;

  std::string describe() const;

 private:
  StageGame() = default;
  std::variant<SearchWithRecall, CostDraws, Tabulated> family_;
  double kappa_ = 0.0;
};

namespace stage {

/// Subjective expected payoff of continuing after X1 = x1,
/// E[u2(x1, X2)] with X2 ~ N(mu2 - gamma (x1 - mu1), var2).
double continuation_value(const StageGame& game, double x1,
                          const SubjectiveModel& model);

/// The indifference threshold C(mu1, mu2; gamma): unique root of
/// D(x1) = u1(x1) - continuation_value(x1). Benefit games stop iff x1 > c,
/// cost games stop iff x1 < c.
double optimal_cutoff(const StageGame& game, const SubjectiveModel& model);

/// Objectively optimal cutoff under the true model; +-inf encode
/// never/always stopping.
double objective_cutoff(const StageGame& game, const TrueModel& true_model);

/// Expected payoff of the cutoff strategy with threshold c (c may be +-inf)
/// under the given model.
double strategy_value(double c, const StageGame& game,
                      const SubjectiveModel& model);

/// E[max(k, X)] for X ~ N(m, s^2).
double expected_max(double k, double m, double s);

}  // namespace stage
}  // namespace gfstop
