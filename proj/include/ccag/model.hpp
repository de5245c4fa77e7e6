#pragma once

// Domain types and static payoff formulas of the compound coalition contest:
// intra-coalition reward shares, coalition power, inter-coalition win
// probabilities and the per-player payoff variants built from them.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ccag/errors.hpp"

namespace ccag {

enum class CostKind { quadratic, linear, power_law };

struct PlayerParams {
  std::string id;
  double effectiveness = 1.0;  // a_i > 0
  double cost_coeff = 1.0;     // c_i > 0
  CostKind cost_kind = CostKind::quadratic;
  double exponent = 2.0;  // power-law only, p >= 1

  void validate() const {
    if (!(effectiveness > 0.0)) throw invariant_violation("player '" + id + "': effectiveness must be > 0");
    if (!(cost_coeff > 0.0)) throw invariant_violation("player '" + id + "': cost_coeff must be > 0");
    if (cost_kind == CostKind::power_law && !(exponent >= 1.0))
      throw invariant_violation("player '" + id + "': power-law exponent must be >= 1");
  }
};

struct SubCoalition {
  std::string id;
  std::vector<std::string> members;
  double reward = 0.0;
};

struct Coalition {
  std::string id;
  std::vector<PlayerParams> members;
  double reward = 0.0;
  std::vector<SubCoalition> sub_coalitions;

  const PlayerParams* find_member(const std::string& pid) const {
    for (const auto& m : members)
      if (m.id == pid) return &m;
    return nullptr;
  }

  void validate() const {
    if (members.empty()) throw invariant_violation("coalition '" + id + "': members must be nonempty");
    if (reward < 0.0) throw invariant_violation("coalition '" + id + "': reward must be >= 0");
    std::set<std::string> ids;
    for (const auto& m : members) {
      m.validate();
      if (!ids.insert(m.id).second)
        throw invariant_violation("coalition '" + id + "': duplicate member '" + m.id + "'");
    }
    if (!sub_coalitions.empty()) {
      std::set<std::string> branch_members;
      double branch_reward = 0.0;
      for (const auto& g : sub_coalitions) {
        if (g.members.empty())
          throw invariant_violation("sub-coalition '" + g.id + "': members must be nonempty");
        if (g.reward < 0.0)
          throw invariant_violation("sub-coalition '" + g.id + "': reward must be >= 0");
        branch_reward += g.reward;
        for (const auto& pid : g.members) {
          if (!ids.count(pid))
            throw invariant_violation("sub-coalition '" + g.id + "': member '" + pid +
                                      "' is not in coalition '" + id + "'");
          if (!branch_members.insert(pid).second)
            throw invariant_violation("sub-coalitions of '" + id + "' overlap on '" + pid + "'");
        }
      }
      if (branch_reward > reward + 1e-12)
        throw invariant_violation("coalition '" + id + "': sub-coalition rewards exceed coalition reward");
    }
  }
};

struct Scenario {
  std::vector<Coalition> coalitions;

  const Coalition& coalition(const std::string& cid) const {
    for (const auto& c : coalitions)
      if (c.id == cid) return c;
    throw invariant_violation("unknown coalition '" + cid + "'");
  }

  std::vector<std::string> player_ids() const {
    std::vector<std::string> out;
    for (const auto& c : coalitions)
      for (const auto& m : c.members) out.push_back(m.id);
    return out;
  }

  // player membership lookup: coalition index, or nullopt
  std::optional<std::size_t> coalition_of(const std::string& pid) const {
    for (std::size_t k = 0; k < coalitions.size(); ++k)
      if (coalitions[k].find_member(pid)) return k;
    return std::nullopt;
  }

  void validate() const {
    if (coalitions.empty()) throw invariant_violation("scenario has no coalitions");
    std::set<std::string> cids, pids;
    for (const auto& c : coalitions) {
      c.validate();
      if (!cids.insert(c.id).second)
        throw invariant_violation("duplicate coalition id '" + c.id + "'");
      for (const auto& m : c.members)
        if (!pids.insert(m.id).second)
          throw invariant_violation("coalition memberships overlap on player '" + m.id +
                                    "' (S_i and S_j must be disjoint)");
    }
  }
};

// Effort (resilience) per player id. std::map keeps iteration deterministic.
using EffortProfile = std::map<std::string, double>;

inline double effort_of(const EffortProfile& profile, const std::string& pid) {
  auto it = profile.find(pid);
  if (it == profile.end()) throw invariant_violation("profile missing player '" + pid + "'");
  if (it->second < 0.0) throw negative_effort("negative effort for player '" + pid + "'");
  return it->second;
}

inline void check_profile(const EffortProfile& profile, const Scenario& scenario) {
  auto ids = scenario.player_ids();
  if (profile.size() != ids.size())
    throw invariant_violation("profile domain does not match scenario player set");
  for (const auto& pid : ids) effort_of(profile, pid);
}

inline double cost(const PlayerParams& params, double t) {
  if (t < 0.0) throw negative_effort("cost: effort must be >= 0");
  switch (params.cost_kind) {
    case CostKind::quadratic: return params.cost_coeff * t * t;
    case CostKind::linear: return params.cost_coeff * t;
    case CostKind::power_law: return params.cost_coeff * std::pow(t, params.exponent);
  }
  throw invariant_violation("cost: unknown cost kind");
}

inline double coalition_power(const EffortProfile& profile, const Coalition& coalition) {
  double power = 0.0;
  for (const auto& m : coalition.members) power += effort_of(profile, m.id) * m.effectiveness;
  return power;
}

inline std::map<std::string, double> intra_shares(const EffortProfile& profile,
                                                  const Coalition& coalition) {
  double denom = coalition_power(profile, coalition);
  if (denom <= 0.0)
    throw degenerate_profile("intra_shares: total effective effort of '" + coalition.id +
                             "' is zero, shares undefined");
  std::map<std::string, double> shares;
  for (const auto& m : coalition.members)
    shares[m.id] = effort_of(profile, m.id) * m.effectiveness / denom;
  return shares;
}

inline std::map<std::string, double> win_probabilities(const EffortProfile& profile,
                                                       const Scenario& scenario) {
  double total = 0.0;
  std::map<std::string, double> powers;
  for (const auto& c : scenario.coalitions) {
    double p = coalition_power(profile, c);
    powers[c.id] = p;
    total += p;
  }
  if (total <= 0.0)
    throw degenerate_scenario("win_probabilities: total power across coalitions is zero");
  for (auto& [cid, p] : powers) p /= total;
  return powers;
}

// Conditional payoff: share of the prize assuming the coalition wins, net of cost.
inline double payoff(const EffortProfile& profile, const Coalition& coalition,
                     const std::string& pid) {
  const PlayerParams* player = coalition.find_member(pid);
  if (!player) throw invariant_violation("payoff: '" + pid + "' is not a member of '" + coalition.id + "'");
  auto shares = intra_shares(profile, coalition);
  return shares.at(pid) * coalition.reward - cost(*player, effort_of(profile, pid));
}

// Expected payoff: share discounted by the coalition's win probability.
inline double expected_payoff(const EffortProfile& profile, const Scenario& scenario,
                              const Coalition& coalition, const std::string& pid) {
  const PlayerParams* player = coalition.find_member(pid);
  if (!player)
    throw invariant_violation("expected_payoff: '" + pid + "' is not a member of '" + coalition.id + "'");
  auto probs = win_probabilities(profile, scenario);
  double t = effort_of(profile, pid);
  double own_power = coalition_power(profile, coalition);
  if (own_power <= 0.0)
    throw degenerate_profile("expected_payoff: power of coalition '" + coalition.id + "' is zero");
  double share = t * player->effectiveness / own_power;
  return probs.at(coalition.id) * share * coalition.reward - cost(*player, t);
}

inline double subcoalition_payoff(const EffortProfile& profile, const Coalition& coalition,
                                  const std::string& branch_id, const std::string& pid) {
  const SubCoalition* branch = nullptr;
  for (const auto& g : coalition.sub_coalitions)
    if (g.id == branch_id) branch = &g;
  if (!branch) throw invariant_violation("unknown sub-coalition '" + branch_id + "'");
  if (std::find(branch->members.begin(), branch->members.end(), pid) == branch->members.end())
    throw invariant_violation("'" + pid + "' is not in sub-coalition '" + branch_id + "'");
  const PlayerParams* player = coalition.find_member(pid);
  if (!player) throw invariant_violation("'" + pid + "' is not in coalition '" + coalition.id + "'");

  auto branch_power = [&](const SubCoalition& g) {
    double p = 0.0;
    for (const auto& mid : g.members) p += effort_of(profile, mid) * coalition.find_member(mid)->effectiveness;
    return p;
  };
  double own = branch_power(*branch);
  if (own <= 0.0)
    throw degenerate_profile("subcoalition_payoff: power of branch '" + branch_id + "' is zero");
  double total = 0.0;
  for (const auto& g : coalition.sub_coalitions) total += branch_power(g);
  double p_win = own / total;
  double share = effort_of(profile, pid) * player->effectiveness / own;
  return p_win * share * branch->reward - cost(*player, effort_of(profile, pid));
}

// Argmax over candidate payoffs; ties go to the earliest candidate in the
// given (scenario) order.
inline std::string select_coalition(const std::vector<std::pair<std::string, double>>& candidates) {
  if (candidates.empty()) throw empty_candidates("select_coalition: no candidates");
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (candidates[k].second > candidates[best].second) best = k;
  return candidates[best].first;
}

enum class PayoffMode { expected, conditional };

// Hypothetical payoff for a player if they belonged to each coalition at their
// current effort, used to evaluate the coalition-selection rule.
inline std::vector<std::pair<std::string, double>> coalition_choice_payoffs(
    const Scenario& scenario, const EffortProfile& profile, const std::string& pid,
    PayoffMode mode) {
  auto home = scenario.coalition_of(pid);
  if (!home) throw invariant_violation("coalition_choice: unknown player '" + pid + "'");
  const PlayerParams player = *scenario.coalitions[*home].find_member(pid);

  std::vector<std::pair<std::string, double>> out;
  for (std::size_t k = 0; k < scenario.coalitions.size(); ++k) {
    Scenario moved = scenario;
    auto& src = moved.coalitions[*home].members;
    src.erase(std::remove_if(src.begin(), src.end(),
                             [&](const PlayerParams& m) { return m.id == pid; }),
              src.end());
    moved.coalitions[k].members.push_back(player);
    if (moved.coalitions[*home].members.empty() && *home != k) {
      moved.coalitions.erase(moved.coalitions.begin() + static_cast<std::ptrdiff_t>(*home));
    }
    const Coalition& target = moved.coalition(scenario.coalitions[k].id);
    double value = mode == PayoffMode::expected
                       ? expected_payoff(profile, moved, target, pid)
                       : payoff(profile, target, pid);
    out.emplace_back(scenario.coalitions[k].id, value);
  }
  return out;
}

}  // namespace ccag
