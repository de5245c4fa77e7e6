#pragma once

// Shared scenario builders and random-instance generators for the tests.

#include <random>
#include <string>
#include <vector>

#include "ccag/model.hpp"

namespace ccag::testing {

inline PlayerParams player(const std::string& id, double a = 1.0, double c = 1.0,
                           CostKind kind = CostKind::quadratic, double p = 2.0) {
  PlayerParams params;
  params.id = id;
  params.effectiveness = a;
  params.cost_coeff = c;
  params.cost_kind = kind;
  params.exponent = p;
  return params;
}

inline Coalition symmetric_coalition(const std::string& id, int n, double reward, double c = 1.0,
                                     CostKind kind = CostKind::quadratic,
                                     const std::string& prefix = "p") {
  Coalition coalition;
  coalition.id = id;
  coalition.reward = reward;
  for (int i = 0; i < n; ++i)
    coalition.members.push_back(player(prefix + std::to_string(i + 1), 1.0, c, kind));
  return coalition;
}

inline Scenario single(Coalition coalition) {
  Scenario s;
  s.coalitions.push_back(std::move(coalition));
  return s;
}

inline EffortProfile uniform_profile(const Scenario& scenario, double t) {
  EffortProfile profile;
  for (const auto& pid : scenario.player_ids()) profile[pid] = t;
  return profile;
}

// Random scenario with 1-3 coalitions and up to max_players players total.
inline Scenario random_scenario(std::mt19937_64& rng, int max_players = 10) {
  std::uniform_int_distribution<int> ncoal(1, 3);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  int m = ncoal(rng);
  int remaining = std::uniform_int_distribution<int>(m, max_players)(rng);
  Scenario scenario;
  int pid = 0;
  for (int k = 0; k < m; ++k) {
    int size = k == m - 1 ? remaining
                          : std::uniform_int_distribution<int>(1, remaining - (m - 1 - k))(rng);
    remaining -= size;
    Coalition coalition;
    coalition.id = "S" + std::to_string(k + 1);
    coalition.reward = pos(rng);
    for (int i = 0; i < size; ++i)
      coalition.members.push_back(player("p" + std::to_string(++pid), pos(rng), pos(rng)));
    scenario.coalitions.push_back(std::move(coalition));
  }
  return scenario;
}

inline EffortProfile random_profile(std::mt19937_64& rng, const Scenario& scenario) {
  std::uniform_real_distribution<double> pos(0.05, 4.0);
  EffortProfile profile;
  for (const auto& pid : scenario.player_ids()) profile[pid] = pos(rng);
  return profile;
}

}  // namespace ccag::testing
