#pragma once

// Market case study pipeline: price ingestion, Sharpe-based resilience
// estimation, scenario construction, the two-stage decision, yearly share
// series and counterfactual re-solves.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ccag/coopgame.hpp"
#include "ccag/equilibrium.hpp"
#include "ccag/errors.hpp"
#include "ccag/model.hpp"

namespace ccag {

inline constexpr double kResilienceFloor = 1e-6;

struct PriceSeries {
  std::string asset;
  // (ISO-8601 date, close); sorted ascending by date
  std::vector<std::pair<std::string, double>> observations;
};

namespace detail {

inline bool valid_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Loads `date,close` CSV rows; rows may arrive in any order and are sorted on
// load. Duplicate dates and non-positive prices are rejected.
inline PriceSeries load_price_csv(const std::string& path, const std::string& asset) {
  std::ifstream in(path);
  if (!in) throw file_not_found("cannot open price file '" + path + "'");
  PriceSeries series;
  series.asset = asset;
  std::string line;
  bool saw_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "date,close")
        throw schema_error(path + ":1: expected header 'date,close'");
      saw_header = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw schema_error(path + ":" + std::to_string(lineno) + ": expected 'date,close' row");
    std::string date = detail::trim(line.substr(0, comma));
    std::string price_text = detail::trim(line.substr(comma + 1));
    if (!detail::valid_iso_date(date))
      throw schema_error(path + ":" + std::to_string(lineno) + ": invalid ISO-8601 date '" + date + "'");
    double price;
    try {
      std::size_t used = 0;
      price = std::stod(price_text, &used);
      if (used != price_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw schema_error(path + ":" + std::to_string(lineno) + ": invalid price '" + price_text + "'");
    }
    if (!(price > 0.0) || !std::isfinite(price))
      throw schema_error(path + ":" + std::to_string(lineno) + ": price must be positive and finite");
    series.observations.emplace_back(date, price);
  }
  if (!saw_header) throw schema_error(path + ": empty file, expected 'date,close' header");
  std::sort(series.observations.begin(), series.observations.end());
  for (std::size_t i = 1; i < series.observations.size(); ++i)
    if (series.observations[i].first == series.observations[i - 1].first)
      throw schema_error(path + ": duplicate date '" + series.observations[i].first + "'");
  return series;
}

inline std::vector<double> compute_returns(const PriceSeries& series, bool log_returns = false) {
  if (series.observations.size() < 2)
    throw insufficient_data("compute_returns: need at least 2 observations");
  std::vector<double> returns;
  returns.reserve(series.observations.size() - 1);
  for (std::size_t i = 1; i < series.observations.size(); ++i) {
    double prev = series.observations[i - 1].second;
    double cur = series.observations[i].second;
    returns.push_back(log_returns ? std::log(cur / prev) : cur / prev - 1.0);
  }
  return returns;
}

struct ReturnStats {
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

inline ReturnStats return_stats(const std::vector<double>& returns, bool population = false) {
  if (returns.empty()) throw insufficient_data("return_stats: no returns");
  ReturnStats stats;
  stats.count = static_cast<int>(returns.size());
  for (double r : returns) stats.mean += r;
  stats.mean /= returns.size();
  if (returns.size() < 2) {
    if (!population) throw insufficient_data("return_stats: sample std needs >= 2 returns");
    stats.std = 0.0;
    return stats;
  }
  double ss = 0.0;
  for (double r : returns) ss += (r - stats.mean) * (r - stats.mean);
  stats.std = std::sqrt(ss / (returns.size() - (population ? 0 : 1)));
  return stats;
}

// Volatility-adjusted Sharpe ratio with zero risk-free rate.
inline double sharpe_resilience(const ReturnStats& stats) {
  if (!(stats.std > 0.0)) throw zero_volatility("sharpe_resilience: zero volatility");
  return stats.mean / stats.std;
}

struct ResilienceEstimate {
  std::string asset;
  ReturnStats stats;
  double sharpe = 0.0;
  std::string window_start, window_end;
};

inline ResilienceEstimate estimate_resilience(const PriceSeries& series, bool log_returns = false,
                                              bool population = false) {
  ResilienceEstimate est;
  est.asset = series.asset;
  est.stats = return_stats(compute_returns(series, log_returns), population);
  est.sharpe = sharpe_resilience(est.stats);
  est.window_start = series.observations.front().first;
  est.window_end = series.observations.back().first;
  return est;
}

enum class AttractivenessRule { mean_return, uniform };

struct BuildOptions {
  AttractivenessRule rule = AttractivenessRule::mean_return;
  double cost_coeff = 1.0;
  CostKind cost_kind = CostKind::quadratic;
};

struct BuiltScenario {
  Scenario scenario;
  EffortProfile profile;
  std::vector<std::string> warnings;
};

// Assembles a Scenario from resilience estimates. Resilience is floored at
// kResilienceFloor (t_i lives in [0, inf)); attractiveness comes from the
// configured rule, normalized to sum 1 within each coalition.
inline BuiltScenario build_scenario(const std::vector<ResilienceEstimate>& estimates,
                                    const std::map<std::string, std::string>& coalition_of,
                                    const std::vector<std::pair<std::string, double>>& rewards,
                                    const BuildOptions& options = {}) {
  BuiltScenario out;
  std::map<std::string, std::vector<const ResilienceEstimate*>> by_coalition;
  std::map<std::string, bool> seen;
  for (const auto& est : estimates) {
    if (seen[est.asset]) throw duplicate_asset("duplicate asset '" + est.asset + "'");
    seen[est.asset] = true;
    auto it = coalition_of.find(est.asset);
    if (it == coalition_of.end())
      throw unassigned_asset("asset '" + est.asset + "' has no coalition assignment");
    by_coalition[it->second].push_back(&est);
  }

  for (const auto& [cid, reward] : rewards) {
    auto it = by_coalition.find(cid);
    if (it == by_coalition.end()) continue;
    const auto& members = it->second;
    Coalition coalition;
    coalition.id = cid;
    coalition.reward = reward;

    double attract_total = 0.0;
    std::vector<double> attract(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (options.rule == AttractivenessRule::uniform) {
        attract[i] = 1.0;
      } else {
        attract[i] = members[i]->stats.mean;
        if (attract[i] < kResilienceFloor) {
          attract[i] = kResilienceFloor;
          out.warnings.push_back("attractiveness of '" + members[i]->asset +
                                 "' clamped to floor (non-positive mean return)");
        }
      }
      attract_total += attract[i];
    }

    for (std::size_t i = 0; i < members.size(); ++i) {
      PlayerParams p;
      p.id = members[i]->asset;
      p.effectiveness = attract[i] / attract_total;
      p.cost_coeff = options.cost_coeff;
      p.cost_kind = options.cost_kind;
      coalition.members.push_back(std::move(p));

      double t = members[i]->sharpe;
      if (t < kResilienceFloor) {
        out.warnings.push_back("resilience of '" + members[i]->asset +
                               "' clamped to floor (non-positive Sharpe)");
        t = kResilienceFloor;
      }
      out.profile[members[i]->asset] = t;
    }
    out.scenario.coalitions.push_back(std::move(coalition));
  }

  for (const auto& [asset, cid] : coalition_of) {
    bool found = false;
    for (const auto& [rid, r] : rewards) found = found || rid == cid;
    if (!found) throw unassigned_asset("coalition '" + cid + "' has no reward entry");
  }
  out.scenario.validate();
  return out;
}

struct TwoStageDecision {
  std::string chosen;
  std::vector<std::pair<std::string, double>> endurance;  // scenario order
  std::map<std::string, double> shares;                   // within chosen coalition
};

// Stage one: argmax endurance index across coalitions (tie -> scenario
// order). Stage two: intra-coalition shares within the winner.
inline TwoStageDecision two_stage_decision(const Scenario& scenario, const EffortProfile& profile,
                                           const EnduranceSpec& spec) {
  TwoStageDecision decision;
  for (const auto& c : scenario.coalitions) {
    std::vector<double> efforts, effectiveness;
    for (const auto& m : c.members) {
      efforts.push_back(effort_of(profile, m.id));
      effectiveness.push_back(m.effectiveness);
    }
    decision.endurance.emplace_back(c.id, endurance_index(spec, efforts, &effectiveness));
  }
  decision.chosen = select_coalition(decision.endurance);
  decision.shares = intra_shares(profile, scenario.coalition(decision.chosen));
  return decision;
}

struct YearShares {
  int year = 0;
  std::map<std::string, double> shares;  // per asset; sums to 1 within each coalition
};

// Recomputes resilience and attractiveness on each calendar-year window.
// Assets with insufficient data in a year are excluded and the remaining
// shares renormalized within their coalition.
inline std::vector<YearShares> yearly_share_series(
    const std::vector<PriceSeries>& prices, const std::vector<int>& years,
    const std::map<std::string, std::string>& coalition_of,
    AttractivenessRule rule = AttractivenessRule::mean_return) {
  std::vector<YearShares> out;
  for (int year : years) {
    std::string prefix = std::to_string(year);
    std::vector<ResilienceEstimate> estimates;
    for (const auto& series : prices) {
      PriceSeries window;
      window.asset = series.asset;
      for (const auto& obs : series.observations)
        if (obs.first.compare(0, 4, prefix) == 0) window.observations.push_back(obs);
      if (window.observations.size() < 3) continue;  // need >= 2 returns for a std
      ResilienceEstimate est;
      est.asset = window.asset;
      est.stats = return_stats(compute_returns(window));
      est.sharpe = est.stats.std > 0.0 ? est.stats.mean / est.stats.std : 0.0;
      est.window_start = window.observations.front().first;
      est.window_end = window.observations.back().first;
      estimates.push_back(std::move(est));
    }
    if (estimates.empty())
      throw empty_year("yearly_share_series: no asset has data in " + prefix);

    // group by coalition and normalize shares within each
    std::map<std::string, std::vector<const ResilienceEstimate*>> groups;
    for (const auto& est : estimates) {
      auto it = coalition_of.find(est.asset);
      if (it == coalition_of.end())
        throw unassigned_asset("asset '" + est.asset + "' has no coalition assignment");
      groups[it->second].push_back(&est);
    }
    YearShares ys;
    ys.year = year;
    for (const auto& [cid, members] : groups) {
      double total = 0.0;
      std::vector<double> weight(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) {
        double t = std::max(members[i]->sharpe, kResilienceFloor);
        double a = rule == AttractivenessRule::uniform
                       ? 1.0
                       : std::max(members[i]->stats.mean, kResilienceFloor);
        weight[i] = t * a;
        total += weight[i];
      }
      for (std::size_t i = 0; i < members.size(); ++i)
        ys.shares[members[i]->asset] = weight[i] / total;
    }
    out.push_back(std::move(ys));
  }
  return out;
}

enum class CounterfactualTarget { reward, cost_coeff, effectiveness, resilience };

struct CounterfactualSpec {
  CounterfactualTarget target = CounterfactualTarget::reward;
  std::string coalition_id;  // reward target, or scope for player targets; empty = all
  std::string player_id;     // player targets; empty = all players in scope
  double multiplier = 1.0;

  void validate() const {
    if (!(multiplier > 0.0)) throw invariant_violation("counterfactual multiplier must be > 0");
  }
};

struct CounterfactualSnapshot {
  EffortProfile given_profile;  // input (possibly resilience-scaled) profile
  std::map<std::string, double> given_win_probs;
  std::map<std::string, double> given_shares;  // across all coalitions
  std::vector<std::pair<std::string, double>> endurance;
  std::string stage_one_winner;
  std::map<std::string, EquilibriumReport> solved;
  EffortProfile solved_efforts;
  std::map<std::string, double> solved_win_probs;
};

struct CounterfactualResult {
  CounterfactualSnapshot baseline;
  CounterfactualSnapshot perturbed;
  std::map<std::string, double> effort_deltas;    // solved efforts
  std::map<std::string, double> win_prob_deltas;  // solved win probabilities
  std::map<std::string, double> share_deltas;     // given-profile shares
  bool winner_changed = false;
};

namespace detail {

inline CounterfactualSnapshot snapshot(const Scenario& scenario, const EffortProfile& profile,
                                       const SolverConfig& config, const EnduranceSpec& spec) {
  CounterfactualSnapshot snap;
  snap.given_profile = profile;
  snap.given_win_probs = win_probabilities(profile, scenario);
  for (const auto& c : scenario.coalitions) {
    auto shares = intra_shares(profile, c);
    snap.given_shares.insert(shares.begin(), shares.end());
    std::vector<double> efforts, effectiveness;
    for (const auto& m : c.members) {
      efforts.push_back(effort_of(profile, m.id));
      effectiveness.push_back(m.effectiveness);
    }
    snap.endurance.emplace_back(c.id, endurance_index(spec, efforts, &effectiveness));
  }
  snap.stage_one_winner = select_coalition(snap.endurance);
  snap.solved = solve_two_layer(scenario, config);
  for (const auto& [cid, report] : snap.solved)
    snap.solved_efforts.insert(report.efforts.begin(), report.efforts.end());
  snap.solved_win_probs = win_probabilities(snap.solved_efforts, scenario);
  return snap;
}

}  // namespace detail

inline CounterfactualResult counterfactual_run(const Scenario& scenario,
                                               const EffortProfile& profile,
                                               const CounterfactualSpec& spec,
                                               const SolverConfig& config,
                                               const EnduranceSpec& endurance) {
  spec.validate();
  scenario.validate();
  check_profile(profile, scenario);

  Scenario perturbed = scenario;
  EffortProfile perturbed_profile = profile;
  bool hit = false;
  auto in_scope = [&](const Coalition& c, const PlayerParams& p) {
    if (!spec.coalition_id.empty() && c.id != spec.coalition_id) return false;
    if (!spec.player_id.empty() && p.id != spec.player_id) return false;
    return true;
  };
  for (auto& c : perturbed.coalitions) {
    if (spec.target == CounterfactualTarget::reward) {
      if (spec.coalition_id.empty() || c.id == spec.coalition_id) {
        c.reward *= spec.multiplier;
        hit = true;
      }
      continue;
    }
    for (auto& p : c.members) {
      if (!in_scope(c, p)) continue;
      hit = true;
      switch (spec.target) {
        case CounterfactualTarget::cost_coeff: p.cost_coeff *= spec.multiplier; break;
        case CounterfactualTarget::effectiveness: p.effectiveness *= spec.multiplier; break;
        case CounterfactualTarget::resilience: perturbed_profile[p.id] *= spec.multiplier; break;
        case CounterfactualTarget::reward: break;
      }
    }
  }
  if (!hit)
    throw unknown_selector("counterfactual selector matches no coalition/player");

  CounterfactualResult result;
  result.baseline = detail::snapshot(scenario, profile, config, endurance);
  result.perturbed = detail::snapshot(perturbed, perturbed_profile, config, endurance);
  for (const auto& [pid, t] : result.baseline.solved_efforts)
    result.effort_deltas[pid] = result.perturbed.solved_efforts.at(pid) - t;
  for (const auto& [cid, p] : result.baseline.solved_win_probs)
    result.win_prob_deltas[cid] = result.perturbed.solved_win_probs.at(cid) - p;
  for (const auto& [pid, s] : result.baseline.given_shares)
    result.share_deltas[pid] = result.perturbed.given_shares.at(pid) - s;
  result.winner_changed =
      result.baseline.stage_one_winner != result.perturbed.stage_one_winner;
  return result;
}

// --- figure series writers -------------------------------------------------

namespace detail {

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace detail

inline void write_figure1(std::ostream& os, const std::vector<ResilienceEstimate>& estimates) {
  os << "asset,sharpe\n";
  for (const auto& est : estimates)
    os << est.asset << ',' << detail::fmt_double(est.sharpe) << '\n';
}

inline void write_figure2(std::ostream& os,
                          const std::vector<std::pair<std::string, double>>& endurance) {
  os << "coalition,endurance\n";
  for (const auto& [cid, value] : endurance)
    os << cid << ',' << detail::fmt_double(value) << '\n';
}

inline void write_figure3(std::ostream& os, const std::vector<YearShares>& series) {
  os << "year,asset,share\n";
  for (const auto& ys : series)
    for (const auto& [asset, share] : ys.shares)
      os << ys.year << ',' << asset << ',' << detail::fmt_double(share) << '\n';
}

}  // namespace ccag
