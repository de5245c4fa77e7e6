#pragma once

// Mixed-strategy layer: discretized effort games, fictitious play with
// measured exploitability, replicator dynamics and the classic two-player
// war-of-attrition benchmark.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ccag/equilibrium.hpp"
#include "ccag/errors.hpp"
#include "ccag/model.hpp"

namespace ccag {

inline double woa_cdf(double prize, double t) {
  if (!(prize > 0.0)) throw invalid_prize("woa_cdf: prize must be > 0");
  if (t < 0.0) throw negative_effort("woa_cdf: t must be >= 0");
  return 1.0 - std::exp(-t / prize);
}

namespace detail {

// Uniform double in [0,1) built from the top 53 bits, so sequences do not
// depend on the standard library's distribution implementation.
inline double canonical_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Inverse-CDF draws of the exponential quitting-time distribution.
inline std::vector<double> woa_sample(double prize, int count, std::uint64_t seed) {
  if (!(prize > 0.0)) throw invalid_prize("woa_sample: prize must be > 0");
  if (count < 1) throw invalid_config("woa_sample: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) x = -prize * std::log1p(-detail::canonical_uniform(rng));
  return out;
}

// A finite simultaneous-move game on a shared effort grid.
struct DiscreteGame {
  std::vector<std::string> player_ids;
  std::vector<double> grid;
  // payoff(player index, joint action indices) -> utility of that player
  std::function<double(int, const std::vector<int>&)> payoff;

  int num_players() const { return static_cast<int>(player_ids.size()); }
  int num_actions() const { return static_cast<int>(grid.size()); }
};

inline std::vector<double> make_grid(double t_max, int grid_size) {
  if (grid_size < 2) throw grid_too_coarse("grid_size must be >= 2");
  if (!(t_max > 0.0)) throw invalid_config("t_max must be > 0");
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) grid[i] = t_max * i / (grid_size - 1);
  return grid;
}

// Intra-coalition contest restricted to the grid.
inline DiscreteGame contest_game(const Coalition& coalition, std::vector<double> grid) {
  DiscreteGame game;
  for (const auto& m : coalition.members) game.player_ids.push_back(m.id);
  game.grid = std::move(grid);
  std::vector<PlayerParams> params = coalition.members;
  double prize = coalition.reward;
  std::vector<double> g = game.grid;
  game.payoff = [params, prize, g](int i, const std::vector<int>& actions) {
    double t = g[static_cast<std::size_t>(actions[static_cast<std::size_t>(i)])];
    double rest = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j)
      if (static_cast<int>(j) != i)
        rest += g[static_cast<std::size_t>(actions[j])] * params[j].effectiveness;
    return detail::contest_objective(params[static_cast<std::size_t>(i)], t, rest, prize);
  };
  return game;
}

// Classic two-player war of attrition: the contest ends when the loser quits,
// so both sides pay min(t_i, t_j) and the survivor collects the prize.
inline DiscreteGame woa_game(double prize, std::vector<double> grid) {
  if (!(prize > 0.0)) throw invalid_prize("woa_game: prize must be > 0");
  DiscreteGame game;
  game.player_ids = {"p1", "p2"};
  game.grid = std::move(grid);
  std::vector<double> g = game.grid;
  game.payoff = [prize, g](int i, const std::vector<int>& actions) {
    double own = g[static_cast<std::size_t>(actions[static_cast<std::size_t>(i)])];
    double other = g[static_cast<std::size_t>(actions[static_cast<std::size_t>(1 - i)])];
    if (own > other) return prize - other;
    if (own < other) return -own;
    return prize / 2.0 - own;
  };
  return game;
}

namespace detail {

// Expected payoff of every own action against the product distribution of the
// opponents' strategies. Exact enumeration for <= 3 players, seeded Monte
// Carlo otherwise.
class ExpectedPayoffs {
 public:
  ExpectedPayoffs(const DiscreteGame& game, std::uint64_t seed, int mc_draws = 100000)
      : game_(game), rng_(seed), mc_draws_(mc_draws) {
    int n = game.num_players();
    int a = game.num_actions();
    if (n == 2) {
      // cache the two payoff matrices once
      matrices_.assign(2, std::vector<double>(static_cast<std::size_t>(a) * a));
      std::vector<int> actions(2);
      for (int x = 0; x < a; ++x)
        for (int y = 0; y < a; ++y) {
          actions[0] = x;
          actions[1] = y;
          matrices_[0][static_cast<std::size_t>(x) * a + y] = game.payoff(0, actions);
          matrices_[1][static_cast<std::size_t>(y) * a + x] = game.payoff(1, actions);
        }
    }
  }

  // strategies[j] is player j's probability vector over the grid
  std::vector<double> against(int player, const std::vector<std::vector<double>>& strategies) {
    int n = game_.num_players();
    int a = game_.num_actions();
    std::vector<double> ev(static_cast<std::size_t>(a), 0.0);
    if (n == 1) {
      std::vector<int> actions(1);
      for (int x = 0; x < a; ++x) {
        actions[0] = x;
        ev[static_cast<std::size_t>(x)] = game_.payoff(0, actions);
      }
    } else if (n == 2) {
      const auto& mat = matrices_[static_cast<std::size_t>(player)];
      const auto& opp = strategies[static_cast<std::size_t>(1 - player)];
      for (int x = 0; x < a; ++x) {
        double s = 0.0;
        const double* row = &mat[static_cast<std::size_t>(x) * a];
        for (int y = 0; y < a; ++y) s += row[y] * opp[static_cast<std::size_t>(y)];
        ev[static_cast<std::size_t>(x)] = s;
      }
    } else if (n == 3) {
      int o1 = player == 0 ? 1 : 0;
      int o2 = player == 2 ? 1 : 2;
      std::vector<int> actions(3);
      for (int y = 0; y < a; ++y) {
        double p1 = strategies[static_cast<std::size_t>(o1)][static_cast<std::size_t>(y)];
        if (p1 == 0.0) continue;
        for (int z = 0; z < a; ++z) {
          double w = p1 * strategies[static_cast<std::size_t>(o2)][static_cast<std::size_t>(z)];
          if (w == 0.0) continue;
          actions[static_cast<std::size_t>(o1)] = y;
          actions[static_cast<std::size_t>(o2)] = z;
          for (int x = 0; x < a; ++x) {
            actions[static_cast<std::size_t>(player)] = x;
            ev[static_cast<std::size_t>(x)] += w * game_.payoff(player, actions);
          }
        }
      }
    } else {
      // Monte Carlo over opponents' joint draws
      std::vector<int> actions(static_cast<std::size_t>(n));
      for (int d = 0; d < mc_draws_; ++d) {
        for (int j = 0; j < n; ++j) {
          if (j == player) continue;
          actions[static_cast<std::size_t>(j)] =
              sample_index(strategies[static_cast<std::size_t>(j)]);
        }
        for (int x = 0; x < a; ++x) {
          actions[static_cast<std::size_t>(player)] = x;
          ev[static_cast<std::size_t>(x)] += game_.payoff(player, actions);
        }
      }
      for (auto& v : ev) v /= mc_draws_;
    }
    return ev;
  }

 private:
  int sample_index(const std::vector<double>& probs) {
    double u = canonical_uniform(rng_);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  const DiscreteGame& game_;
  std::mt19937_64 rng_;
  int mc_draws_;
  std::vector<std::vector<double>> matrices_;
};

inline double expected_value(const std::vector<double>& ev, const std::vector<double>& probs) {
  double s = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) s += ev[i] * probs[i];
  return s;
}

}  // namespace detail

// Max over players of (best grid response payoff - current expected payoff).
inline double exploitability(const DiscreteGame& game,
                             const std::vector<std::vector<double>>& strategies,
                             std::uint64_t seed = 0) {
  detail::ExpectedPayoffs engine(game, seed);
  double worst = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    auto ev = engine.against(i, strategies);
    double best = *std::max_element(ev.begin(), ev.end());
    double cur = detail::expected_value(ev, strategies[static_cast<std::size_t>(i)]);
    worst = std::max(worst, best - cur);
  }
  return worst;
}

inline double exploitability(const std::map<std::string, MixedStrategy>& strategies,
                             const Scenario& scenario, const std::string& coalition_id,
                             std::uint64_t seed = 0) {
  const Coalition& coalition = scenario.coalition(coalition_id);
  std::vector<std::vector<double>> probs;
  const std::vector<double>* grid = nullptr;
  for (const auto& m : coalition.members) {
    auto it = strategies.find(m.id);
    if (it == strategies.end())
      throw grid_mismatch("exploitability: missing strategy for '" + m.id + "'");
    it->second.validate();
    if (grid && it->second.grid != *grid)
      throw grid_mismatch("exploitability: strategies are not on a common grid");
    grid = &it->second.grid;
    probs.push_back(it->second.probs);
  }
  return exploitability(contest_game(coalition, *grid), probs, seed);
}

// Fictitious play on a discretized game. Every round each player
// best-responds to the opponents' empirical strategy averages; the averages
// are returned together with their measured exploitability. Stops early once
// exploitability drops below tol (checked every 50 rounds).
inline EquilibriumReport solve_fictitious_play(const DiscreteGame& game,
                                               const SolverConfig& config) {
  config.validate();
  if (game.num_actions() < 2) throw grid_too_coarse("fictitious play: grid too coarse");
  int n = game.num_players();
  int a = game.num_actions();

  detail::ExpectedPayoffs engine(game, config.seed);
  std::vector<std::vector<double>> avg(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(a), 1.0 / a));

  EquilibriumReport report;
  report.kind = ReportKind::mixed;
  for (int round = 1; round <= config.max_iter; ++round) {
    std::vector<int> best(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto ev = engine.against(i, avg);
      best[static_cast<std::size_t>(i)] =
          static_cast<int>(std::max_element(ev.begin(), ev.end()) - ev.begin());
    }
    double w = 1.0 / (round + 1);
    for (int i = 0; i < n; ++i) {
      auto& s = avg[static_cast<std::size_t>(i)];
      for (int x = 0; x < a; ++x) s[static_cast<std::size_t>(x)] *= 1.0 - w;
      s[static_cast<std::size_t>(best[static_cast<std::size_t>(i)])] += w;
    }
    report.iterations = round;
    if (round % 50 == 0 || round == config.max_iter) {
      report.exploitability = exploitability(game, avg, config.seed + 1);
      if (report.exploitability <= config.tol) break;
    }
  }
  report.residual = report.exploitability;
  for (int i = 0; i < n; ++i) {
    MixedStrategy s;
    s.grid = game.grid;
    s.probs = avg[static_cast<std::size_t>(i)];
    report.strategies[game.player_ids[static_cast<std::size_t>(i)]] = std::move(s);
  }
  return report;
}

inline EquilibriumReport solve_mixed_fp(const Scenario& scenario, const std::string& coalition_id,
                                        const SolverConfig& config) {
  config.validate();
  const Coalition& coalition = scenario.coalition(coalition_id);
  double t_max = config.t_max > 0.0 ? config.t_max : default_t_max(coalition);
  return solve_fictitious_play(contest_game(coalition, make_grid(t_max, config.grid_size)),
                               config);
}

struct ReplicatorResult {
  std::vector<double> state;
  bool clamped = false;  // some entry went negative and was clamped to 0
};

// One Euler step of the replicator dynamic, renormalized onto the simplex.
inline ReplicatorResult replicator_step(const std::vector<double>& state,
                                        const std::vector<double>& fitness, double dt) {
  if (state.empty() || state.size() != fitness.size())
    throw length_mismatch("replicator_step: state/fitness size mismatch");
  if (!(dt > 0.0)) throw invalid_config("replicator_step: dt must be > 0");
  double sum = 0.0;
  for (double x : state) {
    if (x < -1e-9) throw not_on_simplex("replicator_step: negative mass");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw not_on_simplex("replicator_step: state must sum to 1");

  double mean_fitness = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) mean_fitness += state[i] * fitness[i];

  ReplicatorResult out;
  out.state.resize(state.size());
  double total = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    double x = state[i] + dt * state[i] * (fitness[i] - mean_fitness);
    if (x < 0.0) {
      x = 0.0;
      out.clamped = true;
    }
    out.state[i] = x;
    total += x;
  }
  if (total <= 0.0) throw not_on_simplex("replicator_step: all mass clamped away");
  for (auto& x : out.state) x /= total;
  return out;
}

}  // namespace ccag
