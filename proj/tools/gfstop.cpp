// gfstop: scenario runner for the misspecified-learning laboratory.
// Writes CSV plus a JSON sidecar sufficient to replay the scenario:
//   gfstop <command> [flags] [--config file.json] [--out dir] [--seed n]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_io.hpp"
#include "gfstop/dynamics.hpp"
#include "gfstop/errors.hpp"
#include "gfstop/inference.hpp"
#include "gfstop/mom.hpp"
#include "gfstop/montecarlo.hpp"
#include "gfstop/multiperiod.hpp"
#include "gfstop/parallel.hpp"
#include "gfstop/sequential.hpp"
#include "gfstop/stage_game.hpp"

namespace {

using cli::format_double;
using cli::json;
using cli::json_num;
using cli::num_from_json;
using cli::parse_double;
using namespace gfstop;

std::string str(double v) { return format_double(v); }

// Flags shared by every subcommand.
struct CommonParams {
  std::string out_dir = ".";
  std::string name;
  std::string config_file;
  std::uint64_t seed = 1;
};

struct GameParams {
  double q = 0.0;
  double wait_cost = 0.0;
  bool cost_draws = false;
};

struct ModelParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sd = 1.0;
  double gamma_true = 0.0;
};

void add_common(CLI::App* cmd, CommonParams& p) {
  cmd->add_option("--out", p.out_dir, "output directory");
  cmd->add_option("--name", p.name, "output base name (default: command)");
  cmd->add_option("--config", p.config_file,
                  "JSON config or sidecar; flags given on the command line "
                  "take precedence");
  cmd->add_option("--seed", p.seed, "random seed");
}

void add_game(CLI::App* cmd, GameParams& p) {
  cmd->add_option("--q", p.q, "search-with-recall probability in [0,1)");
  cmd->add_option("--wait-cost", p.wait_cost, "extra cost of continuing");
  cmd->add_flag("--cost-draws", p.cost_draws, "draws are costs (u = -x)");
}

void add_model(CLI::App* cmd, ModelParams& p) {
  cmd->add_option("--mu1", p.mu1, "true first-period fundamental");
  cmd->add_option("--mu2", p.mu2, "true second-period fundamental");
  cmd->add_option("--sd", p.sd, "true draw standard deviation");
  cmd->add_option("--gamma-true", p.gamma_true,
                  "objective reversal coefficient (0 = independent)");
}

StageGame build_game(const GameParams& p) {
  StageGame g = p.cost_draws ? StageGame::cost_draws()
                             : StageGame::search_with_recall(p.q);
  if (p.wait_cost > 0.0) g = StageGame::wait_cost(g, p.wait_cost);
  return g;
}

TrueModel build_model(const ModelParams& p) {
  return {p.mu1, p.mu2, p.sd, p.gamma_true};
}

// Resolves one subcommand's parameters against an optional JSON config:
// values present in the config replace defaults, explicit flags win.
class Merger {
 public:
  Merger(CLI::App* cmd, const CommonParams& common) : cmd_(cmd) {
    if (!common.config_file.empty()) {
      std::ifstream in(common.config_file);
      if (!in)
        throw DomainError("cannot read config file " + common.config_file);
      json whole = json::parse(in);
      cfg_ = whole.contains("params") ? whole["params"] : whole;
    }
  }

  void num(const char* flag, const char* key, double& var) {
    if (cmd_->count(flag) == 0 && cfg_.contains(key))
      var = num_from_json(cfg_[key]);
  }
  void integer(const char* flag, const char* key, int& var) {
    if (cmd_->count(flag) == 0 && cfg_.contains(key))
      var = cfg_[key].get<int>();
  }
  void seed(const char* flag, const char* key, std::uint64_t& var) {
    if (cmd_->count(flag) == 0 && cfg_.contains(key))
      var = cfg_[key].get<std::uint64_t>();
  }
  void text(const char* flag, const char* key, std::string& var) {
    if (cmd_->count(flag) == 0 && cfg_.contains(key))
      var = cfg_[key].get<std::string>();
  }
  void flag(const char* name, const char* key, bool& var) {
    if (cmd_->count(name) == 0 && cfg_.contains(key))
      var = cfg_[key].get<bool>();
  }
  void num_list(const char* flag, const char* key,
                std::vector<std::string>& var) {
    if (cmd_->count(flag) == 0 && cfg_.contains(key)) {
      var.clear();
      for (const auto& item : cfg_[key])
        var.push_back(item.is_string() ? item.get<std::string>()
                                       : format_double(item.get<double>()));
    }
  }

  void game(const char* prefix, GameParams& p) {
    (void)prefix;
    num("--q", "q", p.q);
    num("--wait-cost", "wait_cost", p.wait_cost);
    flag("--cost-draws", "cost_draws", p.cost_draws);
  }
  void model(ModelParams& p) {
    num("--mu1", "mu1", p.mu1);
    num("--mu2", "mu2", p.mu2);
    num("--sd", "sd", p.sd);
    num("--gamma-true", "gamma_true", p.gamma_true);
  }

 private:
  CLI::App* cmd_;
  json cfg_;
};

json game_json(const GameParams& p) {
  return {{"q", p.q}, {"wait_cost", p.wait_cost}, {"cost_draws", p.cost_draws}};
}

json model_json(const ModelParams& p) {
  return {{"mu1", json_num(p.mu1)},
          {"mu2", json_num(p.mu2)},
          {"sd", p.sd},
          {"gamma_true", p.gamma_true}};
}

void merge_params(json& target, const json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it)
    target[it.key()] = it.value();
}

std::vector<double> parse_cutoffs(const std::vector<std::string>& raw) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(parse_double(s));
  return out;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? str(*v) : "";
}

// ---------------------------------------------------------------- pseudo-true

struct PseudoTrueParams {
  CommonParams common;
  ModelParams model;
  GameParams game;
  double gamma = 0.5;
  std::string variant = "means";
  std::vector<std::string> cutoffs{"0"};
  double gamma_lo = 0.0, gamma_hi = 0.0;
  double alpha = 0.0;
  double eta = 0.0, mu1o = 0.0, mu2o = 0.0;
};

void run_pseudo_true(CLI::App* cmd, PseudoTrueParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.game("", p.game);
  m.num("--gamma", "gamma", p.gamma);
  m.text("--variant", "variant", p.variant);
  m.num_list("--c", "c", p.cutoffs);
  m.num("--gamma-lo", "gamma_lo", p.gamma_lo);
  m.num("--gamma-hi", "gamma_hi", p.gamma_hi);
  m.num("--alpha", "alpha", p.alpha);
  m.num("--eta", "eta", p.eta);
  m.num("--mu1o", "mu1o", p.mu1o);
  m.num("--mu2o", "mu2o", p.mu2o);

  const TrueModel truth = build_model(p.model);
  const std::vector<double> cs = parse_cutoffs(p.cutoffs);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "pseudo-true" : p.common.name,
                  "pseudo-true");
  json cfg = model_json(p.model);
  merge_params(cfg, game_json(p.game));
  json clist = json::array();
  for (const auto& c : p.cutoffs) clist.push_back(c);
  merge_params(cfg, {{"gamma", p.gamma},
                     {"variant", p.variant},
                     {"c", clist},
                     {"gamma_lo", p.gamma_lo},
                     {"gamma_hi", p.gamma_hi},
                     {"alpha", p.alpha},
                     {"eta", p.eta},
                     {"mu1o", json_num(p.mu1o)},
                     {"mu2o", json_num(p.mu2o)},
                     {"seed", p.common.seed}});
  out.params() = cfg;

  auto csv = out.csv();
  csv.row({"c", "variant", "mu1_star", "mu2_star", "var1_star", "var2_star",
           "gamma_star"});
  auto emit = [&](double c, const inference::PseudoTrueEstimate& est) {
    csv.row({str(c), p.variant, str(est.mu1_star), str(est.mu2_star),
             opt_str(est.var1_star), opt_str(est.var2_star),
             opt_str(est.gamma_star)});
  };
  if (p.variant == "multi") {
    emit(cs.front(), inference::pseudo_true_multi(
                         truth, inference::CensoringSpec::equal(cs), p.gamma));
  } else {
    for (double c : cs) {
      if (p.variant == "means")
        emit(c, inference::pseudo_true(truth, c, p.gamma));
      else if (p.variant == "mean-var")
        emit(c, inference::pseudo_true_mean_var(truth, c, p.gamma));
      else if (p.variant == "constrained")
        emit(c, inference::pseudo_true_constrained(p.model.mu1, p.model.sd, c,
                                                   p.gamma));
      else if (p.variant == "gamma-range")
        emit(c, inference::pseudo_true_gamma_range(truth, c, p.gamma_lo,
                                                   p.gamma_hi));
      else if (p.variant == "cost")
        emit(c, inference::pseudo_true_cost(truth, c, p.gamma));
      else if (p.variant == "selection-mix")
        emit(c, inference::pseudo_true_selection_mix(truth, c, p.alpha,
                                                     p.gamma,
                                                     build_game(p.game)));
      else if (p.variant == "ref-dependence")
        emit(c, inference::pseudo_true_ref_dependence(truth, p.mu1o, p.mu2o,
                                                      p.eta, c, p.gamma));
      else
        throw DomainError("unknown pseudo-true variant: " + p.variant);
    }
  }
  out.finish();
}

// ----------------------------------------------------------------- kl-oracle

struct OracleParams {
  CommonParams common;
  ModelParams model;
  double gamma = 0.5;
  std::string set = "means";
  std::vector<std::string> cutoffs{"0"};
  double gamma_lo = 0.0, gamma_hi = 0.0;
};

void run_kl_oracle(CLI::App* cmd, OracleParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.num("--gamma", "gamma", p.gamma);
  m.text("--set", "set", p.set);
  m.num_list("--c", "c", p.cutoffs);
  m.num("--gamma-lo", "gamma_lo", p.gamma_lo);
  m.num("--gamma-hi", "gamma_hi", p.gamma_hi);

  inference::ParameterSet set;
  if (p.set == "means")
    set = inference::ParameterSet::means;
  else if (p.set == "means-and-vars")
    set = inference::ParameterSet::means_and_vars;
  else if (p.set == "diagonal")
    set = inference::ParameterSet::diagonal;
  else if (p.set == "with-gamma")
    set = inference::ParameterSet::with_gamma;
  else
    throw DomainError("unknown oracle parameter set: " + p.set);

  const TrueModel truth = build_model(p.model);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "kl-oracle" : p.common.name,
                  "kl-oracle");
  json clist = json::array();
  for (const auto& c : p.cutoffs) clist.push_back(c);
  out.params() = model_json(p.model);
  merge_params(out.params(), {{"gamma", p.gamma},
                              {"set", p.set},
                              {"c", clist},
                              {"gamma_lo", p.gamma_lo},
                              {"gamma_hi", p.gamma_hi},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  csv.row({"c", "set", "mu1_star", "mu2_star", "var1_star", "var2_star",
           "gamma_star", "kl_at_minimum"});
  for (const auto& raw : p.cutoffs) {
    const double c = parse_double(raw);
    const auto est = inference::kl_oracle_minimize(truth, c, p.gamma, set,
                                                   p.gamma_lo, p.gamma_hi);
    const SubjectiveModel at{est.mu1_star, est.mu2_star,
                             est.var1_star.value_or(truth.sd * truth.sd),
                             est.var2_star.value_or(truth.sd * truth.sd),
                             est.gamma_star.value_or(p.gamma)};
    csv.row({str(c), p.set, str(est.mu1_star), str(est.mu2_star),
             opt_str(est.var1_star), opt_str(est.var2_star),
             opt_str(est.gamma_star),
             str(inference::kl_divergence(truth, at, c))});
  }
  out.finish();
}

// -------------------------------------------------------------- steady-state

struct SteadyStateParams {
  CommonParams common;
  ModelParams model;
  GameParams game;
  double gamma = 0.5;
  double tol = 1e-10;
  int max_iter = 10000;
};

void run_steady_state(CLI::App* cmd, SteadyStateParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.game("", p.game);
  m.num("--gamma", "gamma", p.gamma);
  m.num("--tol", "tol", p.tol);
  m.integer("--max-iter", "max_iter", p.max_iter);

  const StageGame game = build_game(p.game);
  const TrueModel truth = build_model(p.model);
  const auto ss = dynamics::steady_state(game, truth, p.gamma, p.tol,
                                         p.max_iter);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "steady-state" : p.common.name,
                  "steady-state");
  out.params() = model_json(p.model);
  merge_params(out.params(), game_json(p.game));
  merge_params(out.params(), {{"gamma", p.gamma},
                              {"tol", p.tol},
                              {"max_iter", p.max_iter},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  csv.row({"mu2_inf", "c_inf", "iterations", "residual", "c_objective"});
  csv.row({str(ss.mu2_inf), str(ss.c_inf), std::to_string(ss.iterations),
           str(ss.residual), str(stage::objective_cutoff(game, truth))});
  out.finish();
}

// ------------------------------------------------------------------ dynamics

struct DynamicsParams {
  CommonParams common;
  ModelParams model;
  GameParams game;
  double gamma = 0.5;
  double c0 = 0.0;
  int T = 50;
  std::vector<std::string> envs{"baseline", "auxiliary"};
  double eta = 0.0;
};

void write_trace(cli::CsvWriter& csv, const std::string& env,
                 const dynamics::GenerationTrace& trace) {
  for (std::size_t t = 0; t < trace.mu2.size(); ++t)
    csv.row({std::to_string(t + 1), env, str(trace.mu1[t]),
             str(trace.mu2[t]),
             trace.has_var2 ? str(trace.var2[t]) : std::string(),
             str(trace.cutoff[t]), str(trace.welfare_loss[t])});
}

void run_dynamics(CLI::App* cmd, DynamicsParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.game("", p.game);
  m.num("--gamma", "gamma", p.gamma);
  m.num("--c0", "c0", p.c0);
  m.integer("--T", "T", p.T);
  m.num_list("--env", "env", p.envs);

  const StageGame game = build_game(p.game);
  const TrueModel truth = build_model(p.model);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "dynamics" : p.common.name,
                  "dynamics");
  out.params() = model_json(p.model);
  merge_params(out.params(), game_json(p.game));
  json envs = json::array();
  for (const auto& e : p.envs) envs.push_back(e);
  merge_params(out.params(), {{"gamma", p.gamma},
                              {"c0", json_num(p.c0)},
                              {"T", p.T},
                              {"env", envs},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  csv.row({"t", "env", "mu1", "mu2", "var2", "cutoff", "welfare_loss"});
  for (const auto& env : p.envs) {
    if (env == "baseline")
      write_trace(csv, env,
                  dynamics::run_generations(dynamics::Environment::baseline,
                                            game, truth, p.gamma, p.c0, p.T));
    else if (env == "auxiliary")
      write_trace(csv, env,
                  dynamics::run_generations(dynamics::Environment::auxiliary,
                                            game, truth, p.gamma, p.c0, p.T));
    else if (env == "mean-var")
      write_trace(csv, env,
                  dynamics::run_generations_mean_var(game, truth, p.gamma,
                                                     p.c0, p.T));
    else
      throw DomainError("unknown environment: " + env);
  }
  out.finish();
}

// ---------------------------------------------------------------- sequential

struct SequentialParams {
  CommonParams common;
  ModelParams model;
  GameParams game;
  double gamma = 0.5;
  int T = 1000;
  int seeds = 1;
  double grid_lo = -3.0, grid_hi = 1.0;
  int grid_nodes = 401;
};

void run_sequential(CLI::App* cmd, SequentialParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.game("", p.game);
  m.num("--gamma", "gamma", p.gamma);
  m.integer("--T", "T", p.T);
  m.integer("--seeds", "seeds", p.seeds);
  m.num("--grid-lo", "grid_lo", p.grid_lo);
  m.num("--grid-hi", "grid_hi", p.grid_hi);
  m.integer("--grid-nodes", "grid_nodes", p.grid_nodes);

  const StageGame game = build_game(p.game);
  const TrueModel truth = build_model(p.model);
  const auto prior = sequential::PosteriorGrid::uniform_mu2(
      p.grid_lo, p.grid_hi, p.grid_nodes, truth.mu1_true);
  std::vector<sequential::SequentialRun> runs(p.seeds);
  parallel_for(static_cast<std::size_t>(p.seeds), [&](std::size_t s) {
    runs[s] = sequential::simulate_sequential(game, truth, p.gamma, prior,
                                              p.T, p.common.seed + s);
  });
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "sequential" : p.common.name,
                  "sequential");
  out.params() = model_json(p.model);
  merge_params(out.params(), game_json(p.game));
  merge_params(out.params(), {{"gamma", p.gamma},
                              {"T", p.T},
                              {"seeds", p.seeds},
                              {"grid_lo", p.grid_lo},
                              {"grid_hi", p.grid_hi},
                              {"grid_nodes", p.grid_nodes},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  csv.row({"seed", "t", "cutoff", "posterior_mean2", "x1", "x2",
           "support_warning"});
  for (const auto& run : runs) {
    for (std::size_t t = 0; t < run.cutoff.size(); ++t)
      csv.row({std::to_string(run.seed), std::to_string(t + 1),
               str(run.cutoff[t]), str(run.posterior_mean2[t]),
               str(run.history[t].x1),
               run.history[t].x2 ? str(*run.history[t].x2) : std::string(),
               run.support_warning ? "1" : "0"});
  }
  out.finish();
}

// ---------------------------------------------------------------- montecarlo

struct MonteCarloParams {
  CommonParams common;
  ModelParams model;
  double gamma = 0.5;
  std::string experiment = "pessimism";
  std::string c = "1";
  std::vector<std::string> cutoffs;
  int n = 100;
  int reps = 1000;
  double grid_lo = -1.5, grid_hi = 0.5;
  int grid_nodes = 401;
};

void run_montecarlo(CLI::App* cmd, MonteCarloParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.num("--gamma", "gamma", p.gamma);
  m.text("--experiment", "experiment", p.experiment);
  m.text("--c", "c", p.c);
  m.num_list("--c-list", "c_list", p.cutoffs);
  m.integer("--n", "n", p.n);
  m.integer("--reps", "reps", p.reps);
  m.num("--grid-lo", "grid_lo", p.grid_lo);
  m.num("--grid-hi", "grid_hi", p.grid_hi);
  m.integer("--grid-nodes", "grid_nodes", p.grid_nodes);

  const TrueModel truth = build_model(p.model);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "montecarlo" : p.common.name,
                  "montecarlo");
  json clist = json::array();
  for (const auto& c : p.cutoffs) clist.push_back(c);
  out.params() = model_json(p.model);
  merge_params(out.params(), {{"gamma", p.gamma},
                              {"experiment", p.experiment},
                              {"c", p.c},
                              {"c_list", clist},
                              {"n", p.n},
                              {"reps", p.reps},
                              {"grid_lo", p.grid_lo},
                              {"grid_hi", p.grid_hi},
                              {"grid_nodes", p.grid_nodes},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  if (p.experiment == "pessimism") {
    const auto r = montecarlo::mc_pessimism_experiment(
        p.n, p.reps, truth, parse_double(p.c), p.gamma, p.common.seed);
    csv.row({"n", "reps", "frac_mu2_below_true", "frac_var2_above_true"});
    csv.row({std::to_string(p.n), std::to_string(p.reps),
             str(r.frac_mu2_below_true), str(r.frac_var2_above_true)});
  } else if (p.experiment == "map") {
    const auto data = montecarlo::sample_histories(truth, parse_double(p.c),
                                                   p.n, p.common.seed);
    const auto est = montecarlo::map_estimate(
        data, p.gamma, montecarlo::Unknowns::means_and_vars);
    csv.row({"n", "c", "mu1_hat", "mu2_hat", "var1_hat", "var2_hat"});
    csv.row({std::to_string(p.n), p.c, str(est.mu1_star), str(est.mu2_star),
             opt_str(est.var1_star), opt_str(est.var2_star)});
  } else if (p.experiment == "outcome-history") {
    csv.row({"c", "expected_mode", "pseudo_true_mu2"});
    std::vector<std::string> cs = p.cutoffs.empty()
                                      ? std::vector<std::string>{p.c}
                                      : p.cutoffs;
    const auto grid = sequential::PosteriorGrid::uniform_mu2(
        p.grid_lo, p.grid_hi, p.grid_nodes, truth.mu1_true);
    for (const auto& raw : cs) {
      const double c = parse_double(raw);
      const double mode = montecarlo::outcome_history_inference(
          truth, c, p.n, grid, p.gamma, p.reps, p.common.seed);
      csv.row({str(c), str(mode),
               str(inference::pseudo_true(truth, c, p.gamma).mu2_star)});
    }
  } else {
    throw DomainError("unknown experiment: " + p.experiment);
  }
  out.finish();
}

// --------------------------------------------------------------- multiperiod

struct MultiPeriodParams {
  CommonParams common;
  int L = 3;
  double alpha = 0.5;
  double delta = 0.0;
  double sd = 1.0;
  std::vector<std::string> mu;
  std::vector<std::string> cutoffs;
};

void run_multiperiod(CLI::App* cmd, MultiPeriodParams& p) {
  Merger m(cmd, p.common);
  m.integer("--L", "L", p.L);
  m.num("--alpha", "alpha", p.alpha);
  m.num("--delta", "delta", p.delta);
  m.num("--sd", "sd", p.sd);
  m.num_list("--mu", "mu", p.mu);
  m.num_list("--cutoffs", "cutoffs", p.cutoffs);

  std::vector<double> mu =
      p.mu.empty() ? std::vector<double>(p.L, 0.0) : parse_cutoffs(p.mu);
  std::vector<double> cuts = p.cutoffs.empty()
                                 ? std::vector<double>(p.L - 1, 0.0)
                                 : parse_cutoffs(p.cutoffs);
  const auto spec =
      multiperiod::MultiPeriodSpec::alpha_delta(p.L, p.alpha, p.delta, mu,
                                                p.sd, cuts);
  const auto iterative =
      multiperiod::pseudo_true_L(spec, multiperiod::Method::iterative);
  const auto paths =
      multiperiod::pseudo_true_L(spec, multiperiod::Method::paths);
  const auto verdict = multiperiod::alpha_delta_classify(p.alpha, p.delta,
                                                         p.L);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "multiperiod" : p.common.name,
                  "multiperiod");
  json mu_json = json::array(), cut_json = json::array();
  for (double v : mu) mu_json.push_back(json_num(v));
  for (double v : cuts) cut_json.push_back(json_num(v));
  merge_params(out.params(), {{"L", p.L},
                              {"alpha", p.alpha},
                              {"delta", p.delta},
                              {"sd", p.sd},
                              {"mu", mu_json},
                              {"cutoffs", cut_json},
                              {"seed", p.common.seed}});
  const char* names[] = {"all_pessimistic", "optimism_possible", "boundary"};
  auto csv = out.csv();
  csv.row({"period", "mu_true", "mu_star_iterative", "mu_star_paths",
           "verdict"});
  for (int i = 0; i < p.L; ++i)
    csv.row({std::to_string(i + 1), str(mu[i]), str(iterative[i]),
             str(paths[i]), names[static_cast<int>(verdict)]});
  out.finish();
}

// ----------------------------------------------------------------------- mom

struct MomParams {
  CommonParams common;
  std::string family = "gaussian";
  double sd = 1.0;
  double gamma = 0.5;
  double alpha = -0.5;
  double m1 = 0.0;
  double m2 = 0.0;
  std::vector<std::string> cutoffs{"0"};
  bool dynamics = false;
  double c0 = 0.0;
  int T = 10;
  double q = 0.0;
};

void run_mom(CLI::App* cmd, MomParams& p) {
  Merger m(cmd, p.common);
  m.text("--family", "family", p.family);
  m.num("--sd", "sd", p.sd);
  m.num("--gamma", "gamma", p.gamma);
  m.num("--alpha", "alpha", p.alpha);
  m.num("--m1", "m1", p.m1);
  m.num("--m2", "m2", p.m2);
  m.num_list("--c", "c", p.cutoffs);
  m.flag("--dynamics", "dynamics", p.dynamics);
  m.num("--c0", "c0", p.c0);
  m.integer("--T", "T", p.T);
  m.num("--q", "q", p.q);

  const mom::FeasibleFamily family =
      p.family == "gaussian" ? mom::FeasibleFamily::gaussian(p.sd, p.gamma)
      : p.family == "gumbel"
          ? mom::FeasibleFamily::gumbel_biexponential(p.alpha)
      : p.family == "beta"
          ? mom::FeasibleFamily::beta()
          : throw DomainError("unknown family: " + p.family);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "mom" : p.common.name, "mom");
  json clist = json::array();
  for (const auto& c : p.cutoffs) clist.push_back(c);
  merge_params(out.params(), {{"family", p.family},
                              {"sd", p.sd},
                              {"gamma", p.gamma},
                              {"alpha", p.alpha},
                              {"m1", json_num(p.m1)},
                              {"m2", json_num(p.m2)},
                              {"c", clist},
                              {"dynamics", p.dynamics},
                              {"c0", json_num(p.c0)},
                              {"T", p.T},
                              {"q", p.q},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  if (p.dynamics) {
    const auto trace = mom::mom_dynamics(family,
                                         StageGame::search_with_recall(p.q),
                                         {p.m1, p.m2}, p.c0, p.T);
    csv.row({"t", "theta1", "theta2", "cutoff"});
    for (std::size_t t = 0; t < trace.mu2.size(); ++t)
      csv.row({std::to_string(t + 1), str(trace.mu1[t]), str(trace.mu2[t]),
               str(trace.cutoff[t])});
  } else {
    const auto [t1, t2] = mom::mom_estimate(
        family, {p.m1, p.m2},
        inference::CensoringSpec::equal(parse_cutoffs(p.cutoffs)));
    csv.row({"family", "theta1", "theta2"});
    csv.row({p.family, str(t1), str(t2)});
  }
  out.finish();
}

// -------------------------------------------------------------------- freddy

struct FreddyParams {
  CommonParams common;
  int n = 4;
  double kappa = -1.0;  // < 0 means not requested
};

void run_freddy(CLI::App* cmd, FreddyParams& p) {
  Merger m(cmd, p.common);
  m.integer("--n", "n", p.n);
  m.num("--kappa", "kappa", p.kappa);

  std::optional<double> kappa;
  if (p.kappa >= 0.0) kappa = p.kappa;
  const auto r = montecarlo::freddy_urn({p.n, true}, kappa);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "freddy" : p.common.name, "freddy");
  merge_params(out.params(),
               {{"n", p.n}, {"kappa", p.kappa}, {"seed", p.common.seed}});
  auto csv = out.csv();
  csv.row({"row", "theta_1_4", "theta_1_4_value", "theta_1_2",
           "theta_1_2_value", "theta_3_4", "theta_3_4_value"});
  const char* signals[] = {"aa", "ab", "ba", "bb", "b_censored"};
  for (int s = 0; s < 5; ++s) {
    const auto& row = r.table[s];
    csv.row({signals[s], row[0].str(), str(row[0].value()), row[1].str(),
             str(row[1].value()), row[2].str(), str(row[2].value())});
  }
  csv.row({"expected_loglik", "", str(r.expected_loglik[0]), "",
           str(r.expected_loglik[1]), "", str(r.expected_loglik[2])});
  if (r.q_a_star)
    csv.row({"q_a_star", "", str(*r.q_a_star), "", "", "", ""});
  out.finish();
}

// ------------------------------------------------------------------- compare

struct CompareParams {
  CommonParams common;
  ModelParams model;
  GameParams game;
  double gamma = 0.5;
  double c0 = 0.0;
  int T = 10;
  std::string society_a = "known-var";
  std::string society_b = "unknown-var";
};

dynamics::SocietySpec parse_society(const std::string& text,
                                    const StageGame& base) {
  if (text == "known-var") return dynamics::SocietySpec::known_var();
  if (text == "unknown-var") return dynamics::SocietySpec::unknown_var();
  if (text.rfind("wait-cost:", 0) == 0)
    return dynamics::SocietySpec::payoff_variant(
        StageGame::wait_cost(base, parse_double(text.substr(10))));
  if (text.rfind("selection:", 0) == 0)
    return dynamics::SocietySpec::selection_mix(
        parse_double(text.substr(10)));
  throw DomainError("unknown society spec: " + text);
}

void run_compare(CLI::App* cmd, CompareParams& p) {
  Merger m(cmd, p.common);
  m.model(p.model);
  m.game("", p.game);
  m.num("--gamma", "gamma", p.gamma);
  m.num("--c0", "c0", p.c0);
  m.integer("--T", "T", p.T);
  m.text("--society-a", "society_a", p.society_a);
  m.text("--society-b", "society_b", p.society_b);

  const StageGame game = build_game(p.game);
  const TrueModel truth = build_model(p.model);
  const auto pair = dynamics::compare_societies(
      parse_society(p.society_a, game), parse_society(p.society_b, game),
      game, truth, p.gamma, p.c0, p.T);
  cli::Output out(p.common.out_dir,
                  p.common.name.empty() ? "compare" : p.common.name,
                  "compare");
  out.params() = model_json(p.model);
  merge_params(out.params(), game_json(p.game));
  merge_params(out.params(), {{"gamma", p.gamma},
                              {"c0", json_num(p.c0)},
                              {"T", p.T},
                              {"society_a", p.society_a},
                              {"society_b", p.society_b},
                              {"seed", p.common.seed}});
  auto csv = out.csv();
  csv.row({"t", "mu2_a", "cutoff_a", "mu2_b", "cutoff_b", "mu2_b_minus_a",
           "cutoff_b_minus_a"});
  for (std::size_t t = 0; t < pair.a.mu2.size(); ++t)
    csv.row({std::to_string(t + 1), str(pair.a.mu2[t]),
             str(pair.a.cutoff[t]), str(pair.b.mu2[t]),
             str(pair.b.cutoff[t]), str(pair.b.mu2[t] - pair.a.mu2[t]),
             str(pair.b.cutoff[t] - pair.a.cutoff[t])});
  out.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gfstop: misspecified-learning optimal-stopping laboratory"};
  app.require_subcommand(1);

  PseudoTrueParams pseudo;
  auto* cmd_pseudo =
      app.add_subcommand("pseudo-true", "closed-form pseudo-true estimators");
  add_common(cmd_pseudo, pseudo.common);
  add_model(cmd_pseudo, pseudo.model);
  add_game(cmd_pseudo, pseudo.game);
  cmd_pseudo->add_option("--gamma", pseudo.gamma, "dogmatic bias");
  cmd_pseudo->add_option(
      "--variant", pseudo.variant,
      "means|mean-var|multi|constrained|gamma-range|cost|selection-mix|"
      "ref-dependence");
  cmd_pseudo->add_option("--c", pseudo.cutoffs,
                         "censoring thresholds (inf/-inf allowed)");
  cmd_pseudo->add_option("--gamma-lo", pseudo.gamma_lo, "gamma range lower");
  cmd_pseudo->add_option("--gamma-hi", pseudo.gamma_hi, "gamma range upper");
  cmd_pseudo->add_option("--alpha", pseudo.alpha,
                         "selection-neglecter fraction");
  cmd_pseudo->add_option("--eta", pseudo.eta, "reference-dependence scale");
  cmd_pseudo->add_option("--mu1o", pseudo.mu1o, "predecessor prior mu1");
  cmd_pseudo->add_option("--mu2o", pseudo.mu2o, "predecessor prior mu2");
  cmd_pseudo->callback([&] { run_pseudo_true(cmd_pseudo, pseudo); });

  OracleParams oracle;
  auto* cmd_oracle = app.add_subcommand(
      "kl-oracle", "derivative-free KL minimization cross-check");
  add_common(cmd_oracle, oracle.common);
  add_model(cmd_oracle, oracle.model);
  cmd_oracle->add_option("--gamma", oracle.gamma, "dogmatic bias");
  cmd_oracle->add_option("--set", oracle.set,
                         "means|means-and-vars|diagonal|with-gamma");
  cmd_oracle->add_option("--c", oracle.cutoffs, "censoring thresholds");
  cmd_oracle->add_option("--gamma-lo", oracle.gamma_lo, "gamma range lower");
  cmd_oracle->add_option("--gamma-hi", oracle.gamma_hi, "gamma range upper");
  cmd_oracle->callback([&] { run_kl_oracle(cmd_oracle, oracle); });

  SteadyStateParams steady;
  auto* cmd_steady =
      app.add_subcommand("steady-state", "fixed point of the iteration map");
  add_common(cmd_steady, steady.common);
  add_model(cmd_steady, steady.model);
  add_game(cmd_steady, steady.game);
  cmd_steady->add_option("--gamma", steady.gamma, "dogmatic bias");
  cmd_steady->add_option("--tol", steady.tol, "fixed-point tolerance");
  cmd_steady->add_option("--max-iter", steady.max_iter, "iteration budget");
  cmd_steady->callback([&] { run_steady_state(cmd_steady, steady); });

  DynamicsParams dyn;
  auto* cmd_dyn = app.add_subcommand(
      "dynamics", "deterministic generation-by-generation learning");
  add_common(cmd_dyn, dyn.common);
  add_model(cmd_dyn, dyn.model);
  add_game(cmd_dyn, dyn.game);
  cmd_dyn->add_option("--gamma", dyn.gamma, "dogmatic bias");
  cmd_dyn->add_option("--c0", dyn.c0, "generation-0 cutoff");
  cmd_dyn->add_option("--T", dyn.T, "number of generations");
  cmd_dyn->add_option("--env", dyn.envs, "baseline|auxiliary|mean-var");
  cmd_dyn->callback([&] { run_dynamics(cmd_dyn, dyn); });

  SequentialParams seq;
  auto* cmd_seq = app.add_subcommand(
      "sequential", "stochastic one-agent-per-round simulation");
  add_common(cmd_seq, seq.common);
  add_model(cmd_seq, seq.model);
  add_game(cmd_seq, seq.game);
  cmd_seq->add_option("--gamma", seq.gamma, "dogmatic bias");
  cmd_seq->add_option("--T", seq.T, "rounds per run");
  cmd_seq->add_option("--seeds", seq.seeds, "number of seeded runs");
  cmd_seq->add_option("--grid-lo", seq.grid_lo, "mu2 grid lower bound");
  cmd_seq->add_option("--grid-hi", seq.grid_hi, "mu2 grid upper bound");
  cmd_seq->add_option("--grid-nodes", seq.grid_nodes, "mu2 grid nodes");
  cmd_seq->callback([&] { run_sequential(cmd_seq, seq); });

  MonteCarloParams mc;
  auto* cmd_mc =
      app.add_subcommand("montecarlo", "finite-sample experiments");
  add_common(cmd_mc, mc.common);
  add_model(cmd_mc, mc.model);
  cmd_mc->add_option("--gamma", mc.gamma, "dogmatic bias");
  cmd_mc->add_option("--experiment", mc.experiment,
                     "pessimism|map|outcome-history");
  cmd_mc->add_option("--c", mc.c, "censoring threshold");
  cmd_mc->add_option("--c-list", mc.cutoffs,
                     "thresholds for outcome-history");
  cmd_mc->add_option("--n", mc.n, "dataset size");
  cmd_mc->add_option("--reps", mc.reps, "replications");
  cmd_mc->add_option("--grid-lo", mc.grid_lo, "mu2 grid lower bound");
  cmd_mc->add_option("--grid-hi", mc.grid_hi, "mu2 grid upper bound");
  cmd_mc->add_option("--grid-nodes", mc.grid_nodes, "mu2 grid nodes");
  cmd_mc->callback([&] { run_montecarlo(cmd_mc, mc); });

  MultiPeriodParams mp;
  auto* cmd_mp =
      app.add_subcommand("multiperiod", "L-period pseudo-true fundamentals");
  add_common(cmd_mp, mp.common);
  cmd_mp->add_option("--L", mp.L, "number of periods");
  cmd_mp->add_option("--alpha", mp.alpha, "bias scale");
  cmd_mp->add_option("--delta", mp.delta, "bias decay");
  cmd_mp->add_option("--sd", mp.sd, "draw standard deviation");
  cmd_mp->add_option("--mu", mp.mu, "true fundamentals (length L)");
  cmd_mp->add_option("--cutoffs", mp.cutoffs, "thresholds (length L-1)");
  cmd_mp->callback([&] { run_multiperiod(cmd_mp, mp); });

  MomParams mom_params;
  auto* cmd_mom =
      app.add_subcommand("mom", "method-of-moments inference and dynamics");
  add_common(cmd_mom, mom_params.common);
  cmd_mom->add_option("--family", mom_params.family, "gaussian|gumbel|beta");
  cmd_mom->add_option("--sd", mom_params.sd, "gaussian family sd");
  cmd_mom->add_option("--gamma", mom_params.gamma, "gaussian family bias");
  cmd_mom->add_option("--alpha", mom_params.alpha, "gumbel dependence");
  cmd_mom->add_option("--m1", mom_params.m1, "observed first-draw mean");
  cmd_mom->add_option("--m2", mom_params.m2,
                      "observed uncensored second-draw mean");
  cmd_mom->add_option("--c", mom_params.cutoffs, "censoring thresholds");
  cmd_mom->add_flag("--dynamics", mom_params.dynamics,
                    "run large-generations dynamics");
  cmd_mom->add_option("--c0", mom_params.c0, "generation-0 cutoff");
  cmd_mom->add_option("--T", mom_params.T, "generations");
  cmd_mom->add_option("--q", mom_params.q, "recall probability of the game");
  cmd_mom->callback([&] { run_mom(cmd_mom, mom_params); });

  FreddyParams freddy;
  auto* cmd_freddy =
      app.add_subcommand("freddy", "finite-urn likelihoods and inference");
  add_common(cmd_freddy, freddy.common);
  cmd_freddy->add_option("--n", freddy.n, "urn size (multiple of 4)");
  cmd_freddy->add_option("--kappa", freddy.kappa,
                         "non-average analyst share (4-ball urn)");
  cmd_freddy->callback([&] { run_freddy(cmd_freddy, freddy); });

  CompareParams comp;
  auto* cmd_comp =
      app.add_subcommand("compare", "paired society dynamics");
  add_common(cmd_comp, comp.common);
  add_model(cmd_comp, comp.model);
  add_game(cmd_comp, comp.game);
  cmd_comp->add_option("--gamma", comp.gamma, "dogmatic bias");
  cmd_comp->add_option("--c0", comp.c0, "generation-0 cutoff");
  cmd_comp->add_option("--T", comp.T, "generations");
  cmd_comp->add_option("--society-a", comp.society_a,
                       "known-var|unknown-var|wait-cost:<k>|selection:<a>");
  cmd_comp->add_option("--society-b", comp.society_b, "as society-a");
  cmd_comp->callback([&] { run_compare(cmd_comp, comp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    json record{{"error",
                 {{"type", "runtime"}, {"message", e.what()}}}};
    std::cerr << record.dump() << "\n";
    return 1;
  }
  return 0;
}
