// Command-line front end: scenario solving, mixed equilibria, the classic
// war-of-attrition benchmark, cooperative baselines, the market case study
// and counterfactual re-solves. Results go to stdout as JSON; series files
// go to --out-dir as CSV.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccag/casestudy.hpp"
#include "ccag/coopgame.hpp"
#include "ccag/equilibrium.hpp"
#include "ccag/mixed.hpp"
#include "ccag/model.hpp"
#include "ccag/scenario_io.hpp"

namespace {

using ccag::json;

constexpr int kExitNonConverged = 1;
constexpr int kExitFileNotFound = 2;
constexpr int kExitSchemaError = 3;
constexpr int kExitInvariant = 4;
constexpr int kExitUsage = 64;

struct GlobalFlags {
  std::uint64_t seed = 0;
  double tol = 0.0;
  int max_iter = 0;
  int grid = 0;
  double t_max = 0.0;
  double gamma = 0.0;
  std::string payoff_mode = "expected";
  std::string endurance_kind;
  std::string out_dir;
  std::string coalition;

  // which flags the user actually passed; only those override file values
  bool has_seed = false, has_tol = false, has_max_iter = false, has_grid = false,
       has_t_max = false, has_gamma = false, has_endurance = false;

  ccag::SolverConfig apply(ccag::SolverConfig config) const {
    if (has_seed) config.seed = seed;
    if (has_tol) config.tol = tol;
    if (has_max_iter) config.max_iter = max_iter;
    if (has_grid) config.grid_size = grid;
    if (has_t_max) config.t_max = t_max;
    config.validate();
    return config;
  }

  ccag::EnduranceSpec endurance(const ccag::EnduranceSpec& from_file) const {
    if (has_endurance) {
      if (endurance_kind == "weighted-sum") return ccag::EnduranceSpec{};
      if (endurance_kind == "variance")
        return ccag::EnduranceSpec::variance_penalized_of(has_gamma ? gamma : 0.0);
      if (endurance_kind == "weakest-link") return ccag::EnduranceSpec::weakest_link_of();
      throw ccag::schema_error("--endurance must be weighted-sum|variance|weakest-link");
    }
    return from_file;
  }

  ccag::PayoffMode mode() const {
    return payoff_mode == "conditional" ? ccag::PayoffMode::conditional
                                        : ccag::PayoffMode::expected;
  }
};

json config_json(const ccag::SolverConfig& config, const GlobalFlags& flags) {
  json j;
  j["max_iter"] = config.max_iter;
  j["tol"] = config.tol;
  j["damping"] = config.damping;
  j["grid_size"] = config.grid_size;
  j["t_max"] = config.t_max;
  j["seed"] = config.seed;
  j["payoff"] = flags.payoff_mode;
  return j;
}

json report_json(const ccag::EquilibriumReport& report) {
  json j;
  switch (report.kind) {
    case ccag::ReportKind::pure_converged: j["kind"] = "pure-converged"; break;
    case ccag::ReportKind::pure_cycle_detected: j["kind"] = "pure-cycle-detected"; break;
    case ccag::ReportKind::mixed: j["kind"] = "mixed"; break;
  }
  if (!report.efforts.empty()) j["efforts"] = report.efforts;
  if (!report.strategies.empty()) {
    json strategies = json::object();
    for (const auto& [pid, s] : report.strategies)
      strategies[pid] = {{"grid", s.grid}, {"probs", s.probs}};
    j["strategies"] = std::move(strategies);
    j["exploitability"] = report.exploitability;
  }
  j["residual"] = report.residual;
  j["iterations"] = report.iterations;
  return j;
}

json choice_json(const ccag::Scenario& scenario, const ccag::EffortProfile& profile,
                 ccag::PayoffMode mode) {
  json out = json::object();
  for (const auto& pid : scenario.player_ids()) {
    auto candidates = ccag::coalition_choice_payoffs(scenario, profile, pid, mode);
    json entry;
    for (const auto& [cid, value] : candidates) entry["payoffs"][cid] = value;
    entry["chosen"] = ccag::select_coalition(candidates);
    out[pid] = std::move(entry);
  }
  return out;
}

void emit(const std::string& command, const json& config, const json& payload,
          const std::vector<std::string>& warnings,
          std::chrono::steady_clock::time_point started) {
  json doc;
  doc["command"] = command;
  doc["config"] = config;
  doc["payload"] = payload;
  doc["warnings"] = warnings;
  doc["wall_time_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
          .count();
  std::cout << doc.dump(2) << '\n';
}

void write_file(const std::string& dir, const std::string& name,
                const std::function<void(std::ostream&)>& writer) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw ccag::file_not_found("cannot write to '" + dir + "/" + name + "'");
  writer(out);
}

int run_solve(const std::string& path, const GlobalFlags& flags, bool two_layer) {
  auto started = std::chrono::steady_clock::now();
  auto file = ccag::parse_scenario(path);
  auto config = flags.apply(file.solver);

  json payload;
  bool converged = true;
  std::vector<std::string> warnings;
  ccag::EffortProfile solved;
  if (two_layer) {
    auto reports = ccag::solve_two_layer(file.scenario, config);
    for (const auto& [cid, report] : reports) {
      payload["coalitions"][cid] = report_json(report);
      converged = converged && report.kind == ccag::ReportKind::pure_converged;
      solved.insert(report.efforts.begin(), report.efforts.end());
      for (const auto& w : report.warnings) warnings.push_back(cid + ": " + w);
    }
  } else {
    for (const auto& coalition : file.scenario.coalitions) {
      if (!flags.coalition.empty() && coalition.id != flags.coalition) continue;
      auto report = ccag::solve_pure_br(file.scenario, coalition.id, config);
      payload["coalitions"][coalition.id] = report_json(report);
      converged = converged && report.kind == ccag::ReportKind::pure_converged;
      solved.insert(report.efforts.begin(), report.efforts.end());
      for (const auto& w : report.warnings) warnings.push_back(coalition.id + ": " + w);
    }
    if (payload.is_null())
      throw ccag::invariant_violation("unknown coalition '" + flags.coalition + "'");
  }
  if (solved.size() == file.scenario.player_ids().size()) {
    payload["win_probabilities"] = ccag::win_probabilities(solved, file.scenario);
    payload["coalition_choice"] = choice_json(file.scenario, solved, flags.mode());
  }
  emit(two_layer ? "two-layer" : "solve", config_json(config, flags), payload, warnings, started);
  return converged ? 0 : kExitNonConverged;
}

int run_mixed(const std::string& path, const GlobalFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  auto file = ccag::parse_scenario(path);
  auto config = flags.apply(file.solver);
  std::string cid = flags.coalition.empty() ? file.scenario.coalitions.front().id : flags.coalition;
  const auto& coalition = file.scenario.coalition(cid);

  auto report = ccag::solve_mixed_fp(file.scenario, cid, config);
  json payload;
  payload["coalition"] = cid;
  payload["report"] = report_json(report);
  emit("mixed", config_json(config, flags), payload, {}, started);
  double target = std::max(config.tol, 1e-3 * std::max(coalition.reward, 1e-30));
  return report.exploitability <= target ? 0 : kExitNonConverged;
}

int run_woa(double prize, int samples, bool fictitious, const GlobalFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  ccag::SolverConfig config = flags.apply(ccag::SolverConfig{});
  json payload;
  payload["prize"] = prize;

  if (samples > 0) {
    auto draws = ccag::woa_sample(prize, samples, config.seed);
    payload["samples"] = draws;
    if (!flags.out_dir.empty())
      write_file(flags.out_dir, "woa_samples.csv", [&](std::ostream& os) {
        os << "sample\n";
        for (double t : draws) os << ccag::detail::fmt_double(t) << '\n';
      });
  }
  if (fictitious) {
    double t_max = config.t_max > 0.0 ? config.t_max : 5.0 * prize;
    auto game = ccag::woa_game(prize, ccag::make_grid(t_max, config.grid_size));
    auto fp_config = config;
    if (!flags.has_tol) fp_config.tol = 1e-3;
    if (!flags.has_max_iter) fp_config.max_iter = 20000;
    auto report = ccag::solve_fictitious_play(game, fp_config);
    const auto& s = report.strategies.begin()->second;
    double sup = 0.0, acc = 0.0;
    json cdf = json::array();
    for (std::size_t i = 0; i < s.probs.size(); ++i) {
      acc += s.probs[i];
      cdf.push_back(acc);
      sup = std::max(sup, std::abs(acc - ccag::woa_cdf(prize, s.grid[i])));
    }
    payload["fictitious_play"] = {{"grid", s.grid},
                                  {"cdf", cdf},
                                  {"exploitability", report.exploitability},
                                  {"iterations", report.iterations},
                                  {"sup_distance_to_exponential", sup}};
  }
  emit("woa", config_json(config, flags), payload, {}, started);
  return 0;
}

int run_shapley(const std::string& path, const GlobalFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  auto game = ccag::parse_game(path);
  json payload;
  payload["n"] = game.n;
  payload["shapley"] = ccag::shapley_value(game);
  emit("shapley", json::object(), payload, {}, started);
  return 0;
}

int run_core(const std::string& path, const std::vector<double>& allocation,
             const GlobalFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  auto game = ccag::parse_game(path);
  auto result = ccag::core_check(game, allocation);
  json payload;
  payload["in_core"] = result.in_core;
  payload["efficient"] = result.efficient;
  if (result.worst_violating_subset) {
    json members = json::array();
    for (int i = 0; i < game.n; ++i)
      if (*result.worst_violating_subset & (1u << i)) members.push_back(i);
    payload["worst_violating_subset"] = members;
    payload["worst_violation"] = result.worst_violation;
  }
  emit("core", json::object(), payload, {}, started);
  return 0;
}

int run_casestudy(const std::string& path, const GlobalFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  auto config = ccag::parse_casestudy_config(path);
  auto solver = flags.apply(config.solver);
  auto endurance = flags.endurance(config.endurance);

  std::vector<ccag::PriceSeries> prices;
  std::vector<ccag::ResilienceEstimate> estimates;
  std::map<std::string, std::string> coalition_of;
  for (const auto& asset : config.assets) {
    prices.push_back(ccag::load_price_csv(asset.file, asset.id));
    estimates.push_back(ccag::estimate_resilience(prices.back()));
    coalition_of[asset.id] = asset.coalition;
  }
  ccag::BuildOptions options;
  options.rule = config.rule;
  auto built = ccag::build_scenario(estimates, coalition_of, config.rewards, options);
  auto decision = ccag::two_stage_decision(built.scenario, built.profile, endurance);

  // yearly shares for the stage-one winner's members
  std::vector<ccag::PriceSeries> winner_prices;
  std::map<std::string, std::string> winner_map;
  for (const auto& series : prices)
    if (coalition_of.at(series.asset) == decision.chosen) {
      winner_prices.push_back(series);
      winner_map[series.asset] = decision.chosen;
    }
  auto yearly = ccag::yearly_share_series(winner_prices, config.years, winner_map, config.rule);

  json payload;
  for (const auto& est : estimates)
    payload["estimates"][est.asset] = {{"mean", est.stats.mean},
                                       {"std", est.stats.std},
                                       {"sharpe", est.sharpe},
                                       {"window", {est.window_start, est.window_end}}};
  for (const auto& [cid, value] : decision.endurance) payload["endurance"][cid] = value;
  payload["chosen_coalition"] = decision.chosen;
  payload["shares"] = decision.shares;
  payload["attractiveness_rule"] =
      config.rule == ccag::AttractivenessRule::uniform ? "uniform" : "mean-return";
  for (const auto& ys : yearly) payload["yearly_shares"][std::to_string(ys.year)] = ys.shares;

  if (!flags.out_dir.empty()) {
    write_file(flags.out_dir, "figure1_sharpe.csv",
               [&](std::ostream& os) { ccag::write_figure1(os, estimates); });
    write_file(flags.out_dir, "figure2_endurance.csv",
               [&](std::ostream& os) { ccag::write_figure2(os, decision.endurance); });
    write_file(flags.out_dir, "figure3_shares.csv",
               [&](std::ostream& os) { ccag::write_figure3(os, yearly); });
  }
  emit("casestudy", config_json(solver, flags), payload, built.warnings, started);
  return 0;
}

int run_counterfactual(const std::string& path, const std::string& target,
                       double multiplier, const std::string& player,
                       const GlobalFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  auto file = ccag::parse_scenario(path);
  auto config = flags.apply(file.solver);
  auto endurance = flags.endurance(file.endurance.value_or(ccag::EnduranceSpec{}));

  ccag::CounterfactualSpec spec;
  if (target == "reward")
    spec.target = ccag::CounterfactualTarget::reward;
  else if (target == "cost")
    spec.target = ccag::CounterfactualTarget::cost_coeff;
  else if (target == "effectiveness")
    spec.target = ccag::CounterfactualTarget::effectiveness;
  else if (target == "resilience")
    spec.target = ccag::CounterfactualTarget::resilience;
  else
    throw ccag::schema_error("--target must be reward|cost|effectiveness|resilience");
  spec.coalition_id = flags.coalition;
  spec.player_id = player;
  spec.multiplier = multiplier;

  ccag::EffortProfile profile;
  if (file.efforts) {
    profile = *file.efforts;
  } else {
    double t0 = (config.t_max > 0.0 ? config.t_max : ccag::default_t_max(file.scenario)) / 10.0;
    for (const auto& pid : file.scenario.player_ids()) profile[pid] = t0;
  }

  auto result = ccag::counterfactual_run(file.scenario, profile, spec, config, endurance);
  auto snapshot_json = [](const ccag::CounterfactualSnapshot& snap) {
    json j;
    j["given_profile"] = snap.given_profile;
    j["given_win_probabilities"] = snap.given_win_probs;
    j["given_shares"] = snap.given_shares;
    for (const auto& [cid, value] : snap.endurance) j["endurance"][cid] = value;
    j["stage_one_winner"] = snap.stage_one_winner;
    j["solved_efforts"] = snap.solved_efforts;
    j["solved_win_probabilities"] = snap.solved_win_probs;
    return j;
  };
  json payload;
  payload["baseline"] = snapshot_json(result.baseline);
  payload["perturbed"] = snapshot_json(result.perturbed);
  payload["deltas"] = {{"efforts", result.effort_deltas},
                       {"win_probabilities", result.win_prob_deltas},
                       {"shares", result.share_deltas}};
  payload["winner_changed"] = result.winner_changed;
  emit("counterfactual", config_json(config, flags), payload, {}, started);

  bool converged = true;
  for (const auto* snap : {&result.baseline, &result.perturbed})
    for (const auto& [cid, report] : snap->solved)
      converged = converged && report.kind == ccag::ReportKind::pure_converged;
  return converged ? 0 : kExitNonConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compound coalition-attrition contest toolkit"};
  app.require_subcommand(1);

  GlobalFlags flags;
  auto add_common = [&](CLI::App* cmd) {
    flags.has_seed = flags.has_tol = flags.has_max_iter = flags.has_grid = flags.has_t_max = false;
    cmd->add_option("--seed", flags.seed, "random seed");
    cmd->add_option("--tol", flags.tol, "solver tolerance");
    cmd->add_option("--max-iter", flags.max_iter, "iteration cap");
    cmd->add_option("--grid", flags.grid, "effort grid size");
    cmd->add_option("--t-max", flags.t_max, "effort grid upper bound");
    cmd->add_option("--payoff", flags.payoff_mode, "coalition-choice payoff: expected|conditional")
        ->check(CLI::IsMember({"expected", "conditional"}));
    cmd->add_option("--endurance", flags.endurance_kind,
                    "endurance kind: weighted-sum|variance|weakest-link")
        ->check(CLI::IsMember({"weighted-sum", "variance", "weakest-link"}));
    cmd->add_option("--gamma", flags.gamma, "variance penalty for --endurance variance");
    cmd->add_option("--out-dir", flags.out_dir, "directory for CSV series output");
  };

  std::string scenario_path, game_path, cf_target = "reward", cf_player;
  double woa_prize = 1.0, cf_multiplier = 1.0;
  int woa_samples = 0;
  bool woa_fp = false;
  std::vector<double> allocation;

  auto* solve = app.add_subcommand("solve", "pure best-response equilibrium per coalition");
  solve->add_option("scenario", scenario_path, "scenario JSON file")->required();
  solve->add_option("--coalition", flags.coalition, "restrict to one coalition");
  add_common(solve);

  auto* mixed = app.add_subcommand("mixed", "fictitious-play mixed equilibrium");
  mixed->add_option("scenario", scenario_path, "scenario JSON file")->required();
  mixed->add_option("--coalition", flags.coalition, "coalition to solve (default: first)");
  add_common(mixed);

  auto* woa = app.add_subcommand("woa", "classic war-of-attrition benchmark");
  woa->add_option("--prize", woa_prize, "prize value V")->required();
  woa->add_option("--samples", woa_samples, "number of quitting-time samples");
  woa->add_flag("--fp", woa_fp, "also run fictitious play on the discretized game");
  add_common(woa);

  auto* two_layer = app.add_subcommand("two-layer", "joint inter/intra coalition fixed point");
  two_layer->add_option("scenario", scenario_path, "scenario JSON file")->required();
  add_common(two_layer);

  auto* shapley = app.add_subcommand("shapley", "Shapley value of a characteristic game");
  shapley->add_option("game", game_path, "game JSON file")->required();
  add_common(shapley);

  auto* core = app.add_subcommand("core", "core membership check");
  core->add_option("game", game_path, "game JSON file")->required();
  core->add_option("--allocation", allocation, "allocation vector")->required()->delimiter(',');
  add_common(core);

  auto* casestudy = app.add_subcommand("casestudy", "market case-study pipeline");
  casestudy->add_option("config", scenario_path, "case-study config JSON")->required();
  add_common(casestudy);

  auto* counterfactual = app.add_subcommand("counterfactual", "perturb-and-resolve analysis");
  counterfactual->add_option("scenario", scenario_path, "scenario JSON file")->required();
  counterfactual->add_option("--target", cf_target, "reward|cost|effectiveness|resilience")
      ->required();
  counterfactual->add_option("--multiplier", cf_multiplier, "positive multiplier")->required();
  counterfactual->add_option("--coalition", flags.coalition, "coalition selector (empty = all)");
  counterfactual->add_option("--player", cf_player, "player selector (empty = all)");
  add_common(counterfactual);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  // record which tuning flags were actually given
  auto* active = app.get_subcommands().front();
  flags.has_seed = active->count("--seed") > 0;
  flags.has_tol = active->count("--tol") > 0;
  flags.has_max_iter = active->count("--max-iter") > 0;
  flags.has_grid = active->count("--grid") > 0;
  flags.has_t_max = active->count("--t-max") > 0;
  flags.has_gamma = active->count("--gamma") > 0;
  flags.has_endurance = active->count("--endurance") > 0;

  try {
    if (solve->parsed()) return run_solve(scenario_path, flags, false);
    if (two_layer->parsed()) return run_solve(scenario_path, flags, true);
    if (mixed->parsed()) return run_mixed(scenario_path, flags);
    if (woa->parsed()) return run_woa(woa_prize, woa_samples, woa_fp, flags);
    if (shapley->parsed()) return run_shapley(game_path, flags);
    if (core->parsed()) return run_core(game_path, allocation, flags);
    if (casestudy->parsed()) return run_casestudy(scenario_path, flags);
    if (counterfactual->parsed())
      return run_counterfactual(scenario_path, cf_target, cf_multiplier, cf_player, flags);
  } catch (const ccag::file_not_found& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFileNotFound;
  } catch (const ccag::schema_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchemaError;
  } catch (const ccag::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}
