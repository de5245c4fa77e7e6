#pragma once

// Cooperative-game baselines (Shapley value, core membership) and the
// coalition endurance aggregators.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ccag/errors.hpp"

namespace ccag {

// Characteristic function stored densely: v[mask] is the value of the subset
// whose bits are set in mask. Exact methods only, so n is capped at 20.
struct CharacteristicGame {
  int n = 0;
  std::vector<double> v;  // size 1 << n

  void validate() const {
    if (n < 1) throw invariant_violation("characteristic game: n must be >= 1");
    if (n > 20) throw too_many_players("characteristic game: exact methods require n <= 20");
    if (v.size() != (std::size_t{1} << n))
      throw missing_subset_value("characteristic game: v must cover all 2^n subsets");
    if (std::abs(v[0]) > 0.0)
      throw invariant_violation("characteristic game: v(empty set) must be 0");
  }
};

inline std::vector<double> shapley_value(const CharacteristicGame& game) {
  game.validate();
  int n = game.n;
  std::vector<double> factorial(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k - 1)] * k;

  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  std::uint32_t full = (1u << n) - 1u;
  for (int i = 0; i < n; ++i) {
    std::uint32_t bit = 1u << i;
    std::uint32_t rest = full & ~bit;
    // iterate all subsets of N \ {i}
    std::uint32_t s = 0;
    while (true) {
      int size = std::popcount(s);
      double weight = factorial[static_cast<std::size_t>(size)] *
                      factorial[static_cast<std::size_t>(n - size - 1)] /
                      factorial[static_cast<std::size_t>(n)];
      phi[static_cast<std::size_t>(i)] += weight * (game.v[s | bit] - game.v[s]);
      if (s == rest) break;
      s = (s - rest) & rest;
    }
  }
  return phi;
}

struct CoreCheck {
  bool in_core = false;
  bool efficient = false;
  std::optional<std::uint32_t> worst_violating_subset;  // bitmask
  double worst_violation = 0.0;
};

inline CoreCheck core_check(const CharacteristicGame& game, const std::vector<double>& allocation) {
  game.validate();
  if (allocation.size() != static_cast<std::size_t>(game.n))
    throw length_mismatch("core_check: allocation length must equal n");

  CoreCheck result;
  std::uint32_t full = (1u << game.n) - 1u;
  double total = 0.0;
  for (double x : allocation) total += x;
  result.efficient = std::abs(total - game.v[full]) <= 1e-9;

  for (std::uint32_t s = 1; s <= full; ++s) {
    double sum = 0.0;
    for (int i = 0; i < game.n; ++i)
      if (s & (1u << i)) sum += allocation[static_cast<std::size_t>(i)];
    double violation = game.v[s] - sum;
    if (violation > 1e-9 && violation > result.worst_violation) {
      result.worst_violation = violation;
      result.worst_violating_subset = s;
    }
  }
  result.in_core = result.efficient && !result.worst_violating_subset;
  return result;
}

enum class EnduranceKind { weighted_sum, variance_penalized, weakest_link };

struct EnduranceSpec {
  EnduranceKind kind = EnduranceKind::weighted_sum;
  std::vector<double> weights;  // weighted_sum; empty means equal weights
  double gamma = 0.0;           // variance_penalized

  // Normalizes weights to sum to 1, so "weighted sum" and "weighted average"
  // coincide.
  static EnduranceSpec weighted_sum_of(std::vector<double> w) {
    EnduranceSpec spec;
    spec.kind = EnduranceKind::weighted_sum;
    double total = 0.0;
    for (double x : w) {
      if (x < 0.0) throw invariant_violation("endurance weights must be >= 0");
      total += x;
    }
    if (!(total > 0.0)) throw invariant_violation("endurance weights must not all be 0");
    for (auto& x : w) x /= total;
    spec.weights = std::move(w);
    return spec;
  }

  static EnduranceSpec variance_penalized_of(double gamma) {
    if (gamma < 0.0) throw invariant_violation("gamma must be >= 0");
    EnduranceSpec spec;
    spec.kind = EnduranceKind::variance_penalized;
    spec.gamma = gamma;
    return spec;
  }

  static EnduranceSpec weakest_link_of() {
    EnduranceSpec spec;
    spec.kind = EnduranceKind::weakest_link;
    return spec;
  }
};

// Coalition endurance aggregators:
//   weighted_sum        sum_j w_j t_j (weights normalized)
//   variance_penalized  (sum_j a_j t_j) * exp(-gamma * Var(t))  [population Var]
//   weakest_link        min_j t_j
inline double endurance_index(const EnduranceSpec& spec, const std::vector<double>& efforts,
                              const std::vector<double>* effectiveness = nullptr) {
  if (efforts.empty()) throw length_mismatch("endurance_index: efforts must be nonempty");
  switch (spec.kind) {
    case EnduranceKind::weighted_sum: {
      std::vector<double> w = spec.weights;
      if (w.empty()) w.assign(efforts.size(), 1.0 / static_cast<double>(efforts.size()));
      if (w.size() != efforts.size())
        throw length_mismatch("endurance_index: weights/efforts length mismatch");
      double s = 0.0;
      for (std::size_t i = 0; i < efforts.size(); ++i) s += w[i] * efforts[i];
      return s;
    }
    case EnduranceKind::variance_penalized: {
      if (!effectiveness)
        throw missing_effectiveness("endurance_index: variance-penalized form needs effectiveness");
      if (effectiveness->size() != efforts.size())
        throw length_mismatch("endurance_index: effectiveness/efforts length mismatch");
      double weighted = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < efforts.size(); ++i) {
        weighted += (*effectiveness)[i] * efforts[i];
        mean += efforts[i];
      }
      mean /= static_cast<double>(efforts.size());
      double var = 0.0;
      for (double t : efforts) var += (t - mean) * (t - mean);
      var /= static_cast<double>(efforts.size());
      return weighted * std::exp(-spec.gamma * var);
    }
    case EnduranceKind::weakest_link:
      return *std::min_element(efforts.begin(), efforts.end());
  }
  throw invariant_violation("endurance_index: unknown kind");
}

}  // namespace ccag
