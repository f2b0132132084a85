#include "gfstop/stage_game.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"

namespace gfstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Regularity probe for tabulated payoffs: strict monotonicity in each
// period's draw, and first-period payoff differences dominating
// second-period ones, sampled on a 41x41 grid over +-5 probe_scale.
// Cost-direction games are probed through their reflection.
void probe_tabulated(const StageGame::Tabulated& t, double scale) {
  const int n = 41;
  const double lo = -5.0 * scale, hi = 5.0 * scale;
  auto grid = [&](int i) { return lo + (hi - lo) * i / (n - 1); };
  const double sign = t.direction == Direction::benefit ? 1.0 : -1.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double a = grid(i), b = grid(i + 1);
    if (!(sign * (t.u1(b) - t.u1(a)) > 0.0)) {
      std::ostringstream os;
      os << "tabulated payoff probe failed: u1 not strictly "
         << (sign > 0 ? "increasing" : "decreasing") << " on [" << a << ", "
         << b << "]";
      throw AssumptionError(os.str());
    }
    for (int j = 0; j < n; ++j) {
      const double x2 = grid(j);
      if (j + 1 < n && !(sign * (t.u2(a, grid(j + 1)) - t.u2(a, x2)) > 0.0)) {
        std::ostringstream os;
        os << "tabulated payoff probe failed: u2(" << a << ", .) not strictly "
           << (sign > 0 ? "increasing" : "decreasing") << " at x2 = " << x2;
        throw AssumptionError(os.str());
      }
      const double du1 = sign * (t.u1(b) - t.u1(a));
      const double du2 = std::abs(t.u2(b, x2) - t.u2(a, x2));
      if (!(du1 > du2)) {
        std::ostringstream os;
        os << "tabulated payoff probe failed: |u2(" << b << ",x2) - u2(" << a
           << ",x2)| = " << du2 << " >= u1 increment " << du1 << " at x2 = "
           << x2;
        throw AssumptionError(os.str());
      }
      if (!std::isfinite(t.u2(a, x2))) {
        std::ostringstream os;
        os << "tabulated payoff probe failed: u2 not finite at (" << a << ", "
           << x2 << ")";
        throw AssumptionError(os.str());
      }
    }
  }
}

}  // namespace

StageGame StageGame::search_with_recall(double q) {
  if (!(q >= 0.0) || !(q < 1.0))
    throw DomainError("SearchWithRecall requires q in [0, 1)");
  StageGame g;
  g.family_ = SearchWithRecall{q};
  return g;
}

StageGame StageGame::cost_draws() {
  StageGame g;
  g.family_ = CostDraws{};
  return g;
}

StageGame StageGame::tabulated(std::function<double(double)> u1,
                               std::function<double(double, double)> u2,
                               Direction direction, double probe_scale) {
  Tabulated t{std::move(u1), std::move(u2), direction};
  probe_tabulated(t, probe_scale);
  StageGame g;
  g.family_ = std::move(t);
  return g;
}

StageGame StageGame::wait_cost(const StageGame& base, double kappa) {
  if (!(kappa >= 0.0)) throw DomainError("wait_cost requires kappa >= 0");
  if (base.direction() != Direction::benefit)
    throw DomainError("wait_cost wraps a benefit-direction game");
  StageGame g = base;
  g.kappa_ += kappa;
  return g;
}

double StageGame::u1(double x1) const {
  if (const auto* s = as_search()) {
    (void)s;
    return x1;
  }
  if (as_cost_draws()) return -x1;
  return as_tabulated()->u1(x1);
}

double StageGame::u2(double x1, double x2) const {
  double v;
  if (const auto* s = as_search()) {
    v = s->q * std::max(x1, x2) + (1.0 - s->q) * x2;
  } else if (as_cost_draws()) {
    v = -x2;
  } else {
    v = as_tabulated()->u2(x1, x2);
  }
  return v - kappa_;
}

Direction StageGame::direction() const {
  if (as_cost_draws()) return Direction::cost;
  if (const auto* t = as_tabulated()) return t->direction;
  return Direction::benefit;
}

bool StageGame::linear_in_x2() const {
  if (const auto* s = as_search()) return s->q == 0.0;
  if (as_cost_draws()) return true;
  for (double x1 : {-1.3, 0.0, 2.1}) {
    for (double x2 : {-2.0, -0.4, 0.7, 1.9}) {
      const double h = 0.37;
      const double second_diff =
          u2(x1, x2 + h) - 2.0 * u2(x1, x2) + u2(x1, x2 - h);
      if (std::abs(second_diff) > 1e-9) return false;
    }
  }
  return true;
}

StageGame StageGame::reflected() const {
  StageGame g;
  g.kappa_ = kappa_;
  if (const auto* s = as_search()) {
    // Mirror image u~_i(x) = u_i(-x): a cost-direction game.
    StageGame::Tabulated t;
    const double q = s->q;
    t.u1 = [](double x) { return -x; };
    t.u2 = [q](double x1, double x2) {
      return q * std::max(-x1, -x2) + (1.0 - q) * (-x2);
    };
    t.direction = Direction::cost;
    g.family_ = std::move(t);
    return g;
  }
  if (as_cost_draws()) {
    // -u of mirrored draws: u1 = x, u2 = x2, i.e. search without recall.
    g.family_ = SearchWithRecall{0.0};
    return g;
  }
  const auto& t = *as_tabulated();
  StageGame::Tabulated r;
  r.u1 = [u1 = t.u1](double x) { return u1(-x); };
  r.u2 = [u2 = t.u2](double x1, double x2) { return u2(-x1, -x2); };
  r.direction =
      t.direction == Direction::benefit ? Direction::cost : Direction::benefit;
  g.family_ = std::move(r);
  return g;
}

std::string StageGame::describe() const {
  std::ostringstream os;
  if (const auto* s = as_search()) {
    os << "search_with_recall(q=" << s->q << ")";
  } else if (as_cost_draws()) {
    os << "cost_draws";
  } else {
    os << "tabulated("
       << (direction() == Direction::benefit ? "benefit" : "cost") << ")";
  }
  if (kappa_ > 0.0) os << " + wait_cost(" << kappa_ << ")";
  return os.str();
}

namespace stage {

double expected_max(double k, double m, double s) {
  if (!(s > 0.0)) return std::max(k, m);
  const double z = (k - m) / s;
  const auto [pdf, cdf] = gauss::std_pdf_cdf(z);
  return k * cdf + m * (1.0 - cdf) + s * pdf;
}

double continuation_value(const StageGame& game, double x1,
                          const SubjectiveModel& model) {
  if (!(model.var2 > 0.0))
    throw DomainError("continuation_value requires var2 > 0");
  const double m = model.mu2 - model.gamma * (x1 - model.mu1);
  const double s = std::sqrt(model.var2);
  double v;
  if (const auto* sg = game.as_search()) {
    v = sg->q == 0.0 ? m
                     : sg->q * expected_max(x1, m, s) + (1.0 - sg->q) * m;
  } else if (game.as_cost_draws()) {
    v = -m;
  } else {
    const auto& t = *game.as_tabulated();
    v = gauss::gauss_expectation([&](double x2) { return t.u2(x1, x2); },
                                 {m, s}, 64);
  }
  return v - game.wait_cost_kappa();
}

namespace {

SubjectiveModel reflected_model(const SubjectiveModel& model) {
  return {-model.mu1, -model.mu2, model.var1, model.var2, model.gamma};
}

// Root of a strictly increasing D on an expanding bracket around the model
// means. Returns +-inf sentinels when allow_unbounded and D keeps one sign
// on the whole window; throws NoRootError otherwise.
double increasing_root(const std::function<double(double)>& D,
                       const SubjectiveModel& model, bool allow_unbounded) {
  const double sd = std::sqrt(std::max(model.var1, model.var2));
  const double center = model.mu1;
  const double limit =
      std::max(std::abs(model.mu1), std::abs(model.mu2)) + 50.0 * sd;
  double lo = center - sd, hi = center + sd;
  double dlo = D(lo), dhi = D(hi);
  double step = sd;
  while (dlo > 0.0 && lo > -limit) {
    step *= 2.0;
    lo -= step;
    dlo = D(lo);
  }
  step = sd;
  while (dhi < 0.0 && hi < limit) {
    step *= 2.0;
    hi += step;
    dhi = D(hi);
  }
  if (dlo > 0.0) {
    if (allow_unbounded) return -kInf;
    throw NoRootError(
        "no indifference point: stopping preferred on the whole search "
        "window (Assumption 1(c) likely violated)");
  }
  if (dhi < 0.0) {
    if (allow_unbounded) return kInf;
    throw NoRootError(
        "no indifference point: continuing preferred on the whole search "
        "window (Assumption 1(c) likely violated)");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (D(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double optimal_cutoff(const StageGame& game, const SubjectiveModel& model) {
  if (game.direction() == Direction::cost)
    return -optimal_cutoff(game.reflected(), reflected_model(model));
  if (!(model.gamma > 0.0))
    throw DomainError("optimal_cutoff requires gamma > 0 for benefit games");
  auto D = [&](double x1) {
    return game.u1(x1) - continuation_value(game, x1, model);
  };
  return increasing_root(D, model, /*allow_unbounded=*/false);
}

double objective_cutoff(const StageGame& game, const TrueModel& true_model) {
  if (game.direction() == Direction::cost)
    return -objective_cutoff(game.reflected(),
                             TrueModel{-true_model.mu1_true,
                                       -true_model.mu2_true, true_model.sd,
                                       true_model.gamma_true});
  const SubjectiveModel model = true_model.as_subjective();
  auto D = [&](double x1) {
    return game.u1(x1) - continuation_value(game, x1, model);
  };
  return increasing_root(D, model, /*allow_unbounded=*/true);
}

double strategy_value(double c, const StageGame& game,
                      const SubjectiveModel& model) {
  if (game.direction() == Direction::cost)
    return strategy_value(-c, game.reflected(), reflected_model(model));
  if (!(model.var1 > 0.0) || !(model.var2 > 0.0))
    throw DomainError("strategy_value requires positive variances");
  const double sd1 = std::sqrt(model.var1);
  const double span = 12.0 * sd1;
  auto stop_part = [&](double lo) {
    return gauss::adaptive_gauss_legendre(
        [&](double x) {
          return game.u1(x) * gauss::std_pdf((x - model.mu1) / sd1) / sd1;
        },
        lo, std::max(model.mu1, lo) + span, 1e-10);
  };
  auto continue_part = [&](double hi) {
    return gauss::adaptive_gauss_legendre(
        [&](double x) {
          return continuation_value(game, x, model) *
                 gauss::std_pdf((x - model.mu1) / sd1) / sd1;
        },
        std::min(model.mu1, hi) - span, hi, 1e-10);
  };
  if (c == kInf) return continue_part(model.mu1 + span);
  if (c == -kInf) return stop_part(model.mu1 - span);
  return stop_part(c) + continue_part(c);
}

}  // namespace stage
}  // namespace gfstop
