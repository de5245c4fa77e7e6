#pragma once

// JSON file schemas: scenario files, characteristic-game files and the
// case-study configuration. Parsing is strict (unknown fields rejected, all
// numbers finite) and every core-model invariant is enforced at load time.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccag/casestudy.hpp"
#include "ccag/coopgame.hpp"
#include "ccag/equilibrium.hpp"
#include "ccag/errors.hpp"
#include "ccag/model.hpp"

namespace ccag {

using json = nlohmann::ordered_json;

namespace detail {

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw file_not_found("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw schema_error(path + ": " + e.what());
  }
}

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  if (!obj.is_object()) throw schema_error(context + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw schema_error(context + ": unknown field '" + key + "'");
}

inline double finite_number(const json& value, const std::string& context) {
  if (!value.is_number()) throw schema_error(context + ": expected a number");
  double x = value.get<double>();
  if (!std::isfinite(x)) throw schema_error(context + ": number must be finite");
  return x;
}

inline std::string nonempty_string(const json& value, const std::string& context) {
  if (!value.is_string() || value.get<std::string>().empty())
    throw schema_error(context + ": expected a nonempty string");
  return value.get<std::string>();
}

inline CostKind parse_cost_kind(const std::string& text, const std::string& context) {
  if (text == "quadratic") return CostKind::quadratic;
  if (text == "linear") return CostKind::linear;
  if (text == "power") return CostKind::power_law;
  throw schema_error(context + ": cost must be one of quadratic|linear|power");
}

inline EnduranceSpec parse_endurance(const json& obj, const std::string& context) {
  require_keys(obj, {"kind", "weights", "gamma"}, context);
  std::string kind = nonempty_string(obj.at("kind"), context + ".kind");
  if (kind == "weighted-sum") {
    if (!obj.contains("weights")) return EnduranceSpec{};
    std::vector<double> w;
    for (const auto& x : obj.at("weights")) w.push_back(finite_number(x, context + ".weights"));
    return EnduranceSpec::weighted_sum_of(std::move(w));
  }
  if (kind == "variance") {
    double gamma = obj.contains("gamma") ? finite_number(obj.at("gamma"), context + ".gamma") : 0.0;
    return EnduranceSpec::variance_penalized_of(gamma);
  }
  if (kind == "weakest-link") return EnduranceSpec::weakest_link_of();
  throw schema_error(context + ".kind: must be weighted-sum|variance|weakest-link");
}

inline SolverConfig parse_solver(const json& obj, const std::string& context) {
  require_keys(obj, {"max_iter", "tol", "damping", "grid_size", "t_max", "seed"}, context);
  SolverConfig config;
  if (obj.contains("max_iter")) config.max_iter = obj.at("max_iter").get<int>();
  if (obj.contains("tol")) config.tol = finite_number(obj.at("tol"), context + ".tol");
  if (obj.contains("damping")) config.damping = finite_number(obj.at("damping"), context + ".damping");
  if (obj.contains("grid_size")) config.grid_size = obj.at("grid_size").get<int>();
  if (obj.contains("t_max")) config.t_max = finite_number(obj.at("t_max"), context + ".t_max");
  if (obj.contains("seed")) config.seed = obj.at("seed").get<std::uint64_t>();
  try {
    config.validate();
  } catch (const invalid_config& e) {
    throw schema_error(context + ": " + e.what());
  }
  return config;
}

}  // namespace detail

struct ScenarioFile {
  Scenario scenario;
  std::optional<EffortProfile> efforts;
  std::optional<EnduranceSpec> endurance;
  SolverConfig solver;
};

// Parses and fully validates a scenario document; see docs/scenario-format.md
// for the schema and a commented example.
inline ScenarioFile parse_scenario(const std::string& path) {
  json doc = detail::load_json(path);
  detail::require_keys(doc, {"players", "coalitions", "efforts", "endurance", "solver"}, path);
  if (!doc.contains("players") || !doc.contains("coalitions"))
    throw schema_error(path + ": 'players' and 'coalitions' are required");

  std::map<std::string, PlayerParams> players;
  std::vector<std::string> player_order;
  for (const auto& p : doc.at("players")) {
    detail::require_keys(p, {"id", "effectiveness", "cost_coeff", "cost", "exponent"},
                         path + ".players");
    PlayerParams params;
    params.id = detail::nonempty_string(p.at("id"), path + ".players.id");
    if (p.contains("effectiveness"))
      params.effectiveness = detail::finite_number(p.at("effectiveness"), path + ".effectiveness");
    if (p.contains("cost_coeff"))
      params.cost_coeff = detail::finite_number(p.at("cost_coeff"), path + ".cost_coeff");
    if (p.contains("cost"))
      params.cost_kind = detail::parse_cost_kind(
          detail::nonempty_string(p.at("cost"), path + ".cost"), path + ".cost");
    if (p.contains("exponent"))
      params.exponent = detail::finite_number(p.at("exponent"), path + ".exponent");
    if (players.count(params.id))
      throw schema_error(path + ": duplicate player id '" + params.id + "'");
    player_order.push_back(params.id);
    players[params.id] = std::move(params);
  }

  ScenarioFile out;
  for (const auto& c : doc.at("coalitions")) {
    detail::require_keys(c, {"id", "members", "reward", "sub_coalitions"}, path + ".coalitions");
    Coalition coalition;
    coalition.id = detail::nonempty_string(c.at("id"), path + ".coalitions.id");
    if (c.contains("reward"))
      coalition.reward = detail::finite_number(c.at("reward"), path + ".reward");
    if (!c.contains("members")) throw schema_error(path + ": coalition needs 'members'");
    for (const auto& mid : c.at("members")) {
      std::string pid = detail::nonempty_string(mid, path + ".members");
      auto it = players.find(pid);
      if (it == players.end())
        throw schema_error(path + ": coalition '" + coalition.id + "' references unknown player '" +
                           pid + "'");
      coalition.members.push_back(it->second);
    }
    if (c.contains("sub_coalitions")) {
      for (const auto& g : c.at("sub_coalitions")) {
        detail::require_keys(g, {"id", "members", "reward"}, path + ".sub_coalitions");
        SubCoalition branch;
        branch.id = detail::nonempty_string(g.at("id"), path + ".sub_coalitions.id");
        for (const auto& mid : g.at("members"))
          branch.members.push_back(detail::nonempty_string(mid, path + ".sub_coalitions.members"));
        if (g.contains("reward"))
          branch.reward = detail::finite_number(g.at("reward"), path + ".sub_coalitions.reward");
        coalition.sub_coalitions.push_back(std::move(branch));
      }
    }
    out.scenario.coalitions.push_back(std::move(coalition));
  }
  out.scenario.validate();

  // every declared player must belong to some coalition (coverage invariant)
  for (const auto& pid : player_order)
    if (!out.scenario.coalition_of(pid))
      throw invariant_violation(path + ": player '" + pid +
                                "' belongs to no coalition (union of S_k must cover N)");

  if (doc.contains("efforts")) {
    EffortProfile profile;
    for (const auto& [pid, t] : doc.at("efforts").items()) {
      if (!players.count(pid))
        throw schema_error(path + ": efforts reference unknown player '" + pid + "'");
      double value = detail::finite_number(t, path + ".efforts");
      if (value < 0.0) throw invariant_violation(path + ": efforts must be >= 0");
      profile[pid] = value;
    }
    check_profile(profile, out.scenario);
    out.efforts = std::move(profile);
  }
  if (doc.contains("endurance"))
    out.endurance = detail::parse_endurance(doc.at("endurance"), path + ".endurance");
  if (doc.contains("solver")) out.solver = detail::parse_solver(doc.at("solver"), path + ".solver");
  return out;
}

// Characteristic-game file: {"n": 2, "values": [0, 1, 2, 4]} with values
// indexed by member bitmask (player i = bit i).
inline CharacteristicGame parse_game(const std::string& path) {
  json doc = detail::load_json(path);
  detail::require_keys(doc, {"n", "values"}, path);
  if (!doc.contains("n") || !doc.contains("values"))
    throw schema_error(path + ": 'n' and 'values' are required");
  CharacteristicGame game;
  game.n = doc.at("n").get<int>();
  for (const auto& x : doc.at("values")) game.v.push_back(detail::finite_number(x, path + ".values"));
  try {
    game.validate();
  } catch (const too_many_players&) {
    throw;
  } catch (const error& e) {
    throw schema_error(path + ": " + std::string(e.what()));
  }
  return game;
}

struct CaseStudyConfig {
  struct Asset {
    std::string id;
    std::string file;  // resolved against the config file's directory
    std::string coalition;
  };
  std::vector<Asset> assets;
  std::vector<std::pair<std::string, double>> rewards;
  std::vector<int> years;
  AttractivenessRule rule = AttractivenessRule::mean_return;
  EnduranceSpec endurance;
  SolverConfig solver;
};

inline CaseStudyConfig parse_casestudy_config(const std::string& path) {
  json doc = detail::load_json(path);
  detail::require_keys(doc, {"assets", "rewards", "years", "attractiveness", "endurance", "solver"},
                       path);
  if (!doc.contains("assets") || !doc.contains("rewards") || !doc.contains("years"))
    throw schema_error(path + ": 'assets', 'rewards' and 'years' are required");

  CaseStudyConfig config;
  auto base = std::filesystem::path(path).parent_path();
  for (const auto& a : doc.at("assets")) {
    detail::require_keys(a, {"id", "file", "coalition"}, path + ".assets");
    CaseStudyConfig::Asset asset;
    asset.id = detail::nonempty_string(a.at("id"), path + ".assets.id");
    asset.file = (base / detail::nonempty_string(a.at("file"), path + ".assets.file")).string();
    asset.coalition = detail::nonempty_string(a.at("coalition"), path + ".assets.coalition");
    config.assets.push_back(std::move(asset));
  }
  for (const auto& r : doc.at("rewards")) {
    detail::require_keys(r, {"coalition", "reward"}, path + ".rewards");
    config.rewards.emplace_back(detail::nonempty_string(r.at("coalition"), path + ".rewards"),
                                detail::finite_number(r.at("reward"), path + ".rewards"));
  }
  for (const auto& y : doc.at("years")) config.years.push_back(y.get<int>());
  if (doc.contains("attractiveness")) {
    std::string rule = detail::nonempty_string(doc.at("attractiveness"), path + ".attractiveness");
    if (rule == "mean-return")
      config.rule = AttractivenessRule::mean_return;
    else if (rule == "uniform")
      config.rule = AttractivenessRule::uniform;
    else
      throw schema_error(path + ": attractiveness must be mean-return|uniform");
  }
  if (doc.contains("endurance"))
    config.endurance = detail::parse_endurance(doc.at("endurance"), path + ".endurance");
  if (doc.contains("solver")) config.solver = detail::parse_solver(doc.at("solver"), path + ".solver");
  return config;
}

}  // namespace ccag
