#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "ccag/mixed.hpp"
#include "helpers.hpp"

using namespace ccag;
using namespace ccag::testing;

TEST_CASE("woa_cdf") {
  CHECK(woa_cdf(1.0, 0.0) == 0.0);
  CHECK(woa_cdf(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(woa_cdf(2.0, 2.0) == doctest::Approx(woa_cdf(1.0, 1.0)));  // scale invariance in t/V
  CHECK_THROWS_AS(woa_cdf(0.0, 1.0), invalid_prize);
  CHECK_THROWS_AS(woa_cdf(-1.0, 1.0), invalid_prize);
}

TEST_CASE("woa_sample") {
  SUBCASE("deterministic for a fixed seed") {
    auto a = woa_sample(1.0, 1000, 7);
    auto b = woa_sample(1.0, 1000, 7);
    CHECK(a == b);
    auto c = woa_sample(1.0, 1000, 8);
    CHECK(a != c);
  }
  SUBCASE("empirical CDF matches the exponential within KS 0.01") {
    auto samples = woa_sample(1.0, 100000, 7);
    std::sort(samples.begin(), samples.end());
    double sup = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double f = woa_cdf(1.0, samples[i]);
      double lo = static_cast<double>(i) / samples.size();
      double hi = static_cast<double>(i + 1) / samples.size();
      sup = std::max({sup, std::abs(f - lo), std::abs(f - hi)});
    }
    CHECK(sup <= 0.01);
  }
  SUBCASE("nonnegative samples") {
    for (double t : woa_sample(0.5, 1000, 3)) CHECK(t >= 0.0);
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(woa_sample(0.0, 10, 1), invalid_prize);
    CHECK_THROWS_AS(woa_sample(1.0, 0, 1), invalid_config);
  }
}

TEST_CASE("replicator_step") {
  SUBCASE("uniform fitness leaves the state unchanged") {
    std::vector<double> state{0.2, 0.3, 0.5};
    auto out = replicator_step(state, {1.0, 1.0, 1.0}, 0.1);
    for (std::size_t i = 0; i < state.size(); ++i)
      CHECK(std::abs(out.state[i] - state[i]) < 1e-12);
    CHECK_FALSE(out.clamped);
  }
  SUBCASE("output stays on the simplex") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      int n = std::uniform_int_distribution<int>(2, 8)(rng);
      std::vector<double> state(n), fitness(n);
      double total = 0.0;
      for (auto& x : state) total += (x = unif(rng) + 1e-3);
      for (auto& x : state) x /= total;
      for (auto& f : fitness) f = 4.0 * unif(rng) - 2.0;
      auto out = replicator_step(state, fitness, 0.05);
      double sum = std::accumulate(out.state.begin(), out.state.end(), 0.0);
      CHECK(std::abs(sum - 1.0) < 1e-12);
      for (double x : out.state) CHECK(x >= 0.0);
    }
  }
  SUBCASE("above-average fitness gains mass") {
    auto out = replicator_step({0.5, 0.5}, {1.0, 0.0}, 0.1);
    CHECK(out.state[0] > 0.5);
    CHECK(out.state[1] < 0.5);
  }
  SUBCASE("vertices are fixed points") {
    auto out = replicator_step({1.0, 0.0, 0.0}, {0.0, 100.0, 5.0}, 0.2);
    CHECK(out.state[0] == doctest::Approx(1.0));
  }
  SUBCASE("oversized step clamps and flags") {
    auto out = replicator_step({0.5, 0.5}, {10.0, -10.0}, 1.0);
    CHECK(out.clamped);
    CHECK(out.state[1] == 0.0);
    CHECK(out.state[0] == doctest::Approx(1.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(replicator_step({0.7, 0.7}, {0.0, 0.0}, 0.1), not_on_simplex);
    CHECK_THROWS_AS(replicator_step({0.5, 0.5}, {0.0, 0.0}, 0.0), invalid_config);
    CHECK_THROWS_AS(replicator_step({0.5, 0.5}, {0.0}, 0.1), length_mismatch);
  }
}

TEST_CASE("exploitability") {
  SUBCASE("single-player coalition with mass on the best grid point") {
    auto scenario = single(symmetric_coalition("S1", 1, 1.0));
    auto grid = make_grid(1.0, 101);
    // best response of a lone player: share is 1 for any t > 0, so minimize cost
    MixedStrategy s;
    s.grid = grid;
    s.probs.assign(grid.size(), 0.0);
    s.probs[1] = 1.0;  // smallest positive grid point
    double e = exploitability({{"p1", s}}, scenario, "S1");
    CHECK(e <= 1e-9);
  }
  SUBCASE("dominated pure strategy is exploitable") {
    auto scenario = single(symmetric_coalition("S1", 2, 1.0));
    auto grid = make_grid(1.0, 101);
    MixedStrategy s;
    s.grid = grid;
    s.probs.assign(grid.size(), 0.0);
    s.probs.back() = 1.0;  // t = 1: cost 1 for at most half the prize
    double e = exploitability({{"p1", s}, {"p2", s}}, scenario, "S1");
    CHECK(e > 0.1);
  }
  SUBCASE("mismatched grids are rejected") {
    auto scenario = single(symmetric_coalition("S1", 2, 1.0));
    MixedStrategy a, b;
    a.grid = make_grid(1.0, 11);
    a.probs.assign(11, 1.0 / 11);
    b.grid = make_grid(2.0, 11);
    b.probs = a.probs;
    CHECK_THROWS_AS(exploitability({{"p1", a}, {"p2", b}}, scenario, "S1"), grid_mismatch);
  }
}

TEST_CASE("solve_mixed_fp on the symmetric contest") {
  auto scenario = single(symmetric_coalition("S1", 2, 1.0));
  SolverConfig config;
  config.max_iter = 3000;
  config.tol = 1e-4;
  config.grid_size = 101;
  config.t_max = 1.0;
  auto report = solve_mixed_fp(scenario, "S1", config);
  REQUIRE(report.kind == ReportKind::mixed);
  REQUIRE(report.strategies.size() == 2);

  const auto& s1 = report.strategies.at("p1");
  const auto& s2 = report.strategies.at("p2");
  double tv = 0.0;
  for (std::size_t i = 0; i < s1.probs.size(); ++i)
    tv += std::abs(s1.probs[i] - s2.probs[i]);
  CHECK(tv / 2.0 <= 0.02);
  CHECK(report.exploitability <= 1e-3 * scenario.coalitions[0].reward);

  // mass should concentrate near the pure equilibrium sqrt(1/8)
  double mean = 0.0;
  for (std::size_t i = 0; i < s1.probs.size(); ++i) mean += s1.grid[i] * s1.probs[i];
  CHECK(mean == doctest::Approx(std::sqrt(1.0 / 8.0)).epsilon(0.05));
}

TEST_CASE("fictitious play exploitability decreases across checkpoints") {
  auto game = woa_game(1.0, make_grid(5.0, 101));
  SolverConfig config;
  config.tol = 1e-12;  // never stop early
  double prev = 1e9;
  for (int rounds : {200, 1000, 5000}) {
    config.max_iter = rounds;
    auto report = solve_fictitious_play(game, config);
    CHECK(report.exploitability < prev + 1e-9);
    prev = report.exploitability;
  }
  CHECK(prev <= 2e-3);
}

TEST_CASE("fictitious play approximates the war-of-attrition CDF") {
  auto game = woa_game(1.0, make_grid(5.0, 201));
  SolverConfig config;
  config.max_iter = 6000;
  config.tol = 1e-3;
  auto report = solve_fictitious_play(game, config);
  const auto& s = report.strategies.at("p1");
  double sup = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < s.probs.size(); ++i) {
    acc += s.probs[i];
    sup = std::max(sup, std::abs(acc - woa_cdf(1.0, s.grid[i])));
  }
  CHECK(sup <= 0.05);
  CHECK(report.exploitability <= 1e-3);
}

TEST_CASE("solve_mixed_fp is reproducible for a fixed seed") {
  Coalition coalition;
  coalition.id = "S1";
  coalition.reward = 1.0;
  for (int i = 0; i < 4; ++i)  // 4 players exercises the Monte Carlo path
    coalition.members.push_back(player("p" + std::to_string(i + 1)));
  auto scenario = single(coalition);
  SolverConfig config;
  config.max_iter = 20;
  config.grid_size = 15;
  config.t_max = 1.0;
  config.seed = 99;
  auto a = solve_mixed_fp(scenario, "S1", config);
  auto b = solve_mixed_fp(scenario, "S1", config);
  for (const auto& [pid, s] : a.strategies) {
    CHECK(s.probs == b.strategies.at(pid).probs);
  }
  CHECK(a.exploitability == b.exploitability);
}
