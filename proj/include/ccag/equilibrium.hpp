#pragma once

// Pure-strategy equilibrium machinery: first-order conditions of the
// intra-coalition contest, damped best-response iteration, grid-based
// equilibrium verification and the two-layer fixed point.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ccag/errors.hpp"
#include "ccag/golden.hpp"
#include "ccag/model.hpp"

namespace ccag {

struct SolverConfig {
  int max_iter = 1000;
  double tol = 1e-10;
  double damping = 0.5;
  int grid_size = 201;
  double t_max = 0.0;  // <= 0 selects the default bound 2*sqrt(R_max/c_min)
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iter < 1) throw invalid_config("max_iter must be >= 1");
    if (!(tol > 0.0)) throw invalid_config("tol must be > 0");
    if (!(damping > 0.0 && damping <= 1.0)) throw invalid_config("damping must be in (0,1]");
    if (grid_size < 2) throw invalid_config("grid_size must be >= 2");
  }
};

inline double default_t_max(const Coalition& coalition) {
  double c_min = std::numeric_limits<double>::infinity();
  for (const auto& m : coalition.members) c_min = std::min(c_min, m.cost_coeff);
  double r = std::max(coalition.reward, 0.0);
  double bound = 2.0 * std::sqrt(r / c_min);
  return bound > 0.0 ? bound : 1.0;
}

inline double default_t_max(const Scenario& scenario) {
  double bound = 0.0;
  for (const auto& c : scenario.coalitions) bound = std::max(bound, default_t_max(c));
  return bound > 0.0 ? bound : 1.0;
}

enum class ReportKind { pure_converged, pure_cycle_detected, mixed };

struct MixedStrategy {
  std::vector<double> grid;
  std::vector<double> probs;

  void validate() const {
    if (grid.size() != probs.size() || grid.size() < 2)
      throw invalid_config("mixed strategy: grid/probs size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (probs[i] < 0.0) throw not_on_simplex("mixed strategy: negative probability");
      if (i > 0 && !(grid[i] > grid[i - 1]))
        throw invalid_config("mixed strategy: grid must be strictly ascending");
      sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw not_on_simplex("mixed strategy: probs must sum to 1");
  }
};

struct EquilibriumReport {
  ReportKind kind = ReportKind::pure_converged;
  EffortProfile efforts;
  std::map<std::string, MixedStrategy> strategies;
  double residual = 0.0;
  double exploitability = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

// FOC residuals of the quadratic-cost contest:
// a_i R sum_{j!=i} t_j a_j / (sum_j t_j a_j)^2 - 2 c_i t_i
inline std::map<std::string, double> foc_residuals(const EffortProfile& profile,
                                                   const Coalition& coalition) {
  for (const auto& m : coalition.members)
    if (m.cost_kind != CostKind::quadratic)
      throw unsupported_cost("foc_residuals: requires quadratic costs");
  double total = coalition_power(profile, coalition);
  if (total <= 0.0) throw degenerate_profile("foc_residuals: zero coalition power");
  std::map<std::string, double> out;
  for (const auto& m : coalition.members) {
    double t = effort_of(profile, m.id);
    double rest = total - t * m.effectiveness;
    out[m.id] = m.effectiveness * coalition.reward * rest / (total * total) - 2.0 * m.cost_coeff * t;
  }
  return out;
}

namespace detail {

// Tullock-form objective: t*a/(t*a + rest) * prize - cost(t). The value at the
// all-zero point is taken as 0, matching a vanishing stake.
inline double contest_objective(const PlayerParams& p, double t, double rest, double prize) {
  double own = t * p.effectiveness;
  double denom = own + rest;
  double share = denom > 0.0 ? own / denom : 0.0;
  return share * prize - cost(p, t);
}

inline double cost_derivative(const PlayerParams& p, double t) {
  switch (p.cost_kind) {
    case CostKind::quadratic: return 2.0 * p.cost_coeff * t;
    case CostKind::linear: return p.cost_coeff;
    case CostKind::power_law:
      return p.exponent == 1.0 ? p.cost_coeff
                               : p.cost_coeff * p.exponent * std::pow(t, p.exponent - 1.0);
  }
  throw invariant_violation("cost_derivative: unknown cost kind");
}

// The objective's derivative a R rest/(a t + rest)^2 - c'(t) is strictly
// decreasing (for rest > 0), so the maximizer is the unique sign change and
// bisection pins it to machine precision. Comparison-based search alone
// (golden section) only localizes a smooth maximum to ~sqrt(eps), which is
// too coarse for the 1e-10 fixed-point tolerance.
inline double best_response(const PlayerParams& p, double rest, double prize, double t_max,
                            double xtol) {
  if (!(rest > 0.0) || !(prize > 0.0))
    return golden_max([&](double t) { return contest_objective(p, t, rest, prize); }, 0.0, t_max,
                      xtol);
  auto slope = [&](double t) {
    double denom = p.effectiveness * t + rest;
    return p.effectiveness * prize * rest / (denom * denom) - cost_derivative(p, t);
  };
  if (slope(0.0) <= 0.0) return 0.0;
  if (slope(t_max) >= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

class CycleDetector {
 public:
  explicit CycleDetector(std::size_t window = 50) : window_(window) {}

  bool seen(const std::vector<double>& efforts) {
    std::vector<std::int64_t> key(efforts.size());
    for (std::size_t i = 0; i < efforts.size(); ++i)
      key[i] = static_cast<std::int64_t>(std::llround(efforts[i] * 1e8));
    for (const auto& h : history_)
      if (h == key) return true;
    history_.push_back(std::move(key));
    if (history_.size() > window_) history_.pop_front();
    return false;
  }

 private:
  std::size_t window_;
  std::deque<std::vector<std::int64_t>> history_;
};

}  // namespace detail

// Damped best-response iteration on the conditional (within-coalition) payoff.
inline EquilibriumReport solve_pure_br(const Scenario& scenario, const std::string& coalition_id,
                                       const SolverConfig& config) {
  config.validate();
  const Coalition& coalition = scenario.coalition(coalition_id);
  double t_max = config.t_max > 0.0 ? config.t_max : default_t_max(coalition);
  double xtol = 0.05 * config.tol * std::max(1.0, t_max);

  std::vector<double> efforts(coalition.members.size(), t_max / 10.0);
  detail::CycleDetector cycles;

  EquilibriumReport report;
  report.kind = ReportKind::pure_cycle_detected;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    double total = 0.0;
    for (std::size_t i = 0; i < efforts.size(); ++i)
      total += efforts[i] * coalition.members[i].effectiveness;

    double max_step = 0.0;
    std::vector<double> next(efforts.size());
    for (std::size_t i = 0; i < efforts.size(); ++i) {
      const auto& p = coalition.members[i];
      double rest = total - efforts[i] * p.effectiveness;
      double br = detail::best_response(p, rest, coalition.reward, t_max, xtol);
      next[i] = efforts[i] + config.damping * (br - efforts[i]);
      max_step = std::max(max_step, std::abs(next[i] - efforts[i]));
    }
    efforts = next;
    report.iterations = iter;
    report.residual = max_step;
    if (max_step < config.tol) {
      report.kind = ReportKind::pure_converged;
      break;
    }
    // near the fixed point successive profiles round to the same key, so the
    // repeat check only applies while the steps are still macroscopic
    if (max_step > 1e-6 && cycles.seen(efforts)) {
      report.warnings.push_back("best-response cycle detected");
      break;
    }
  }
  for (std::size_t i = 0; i < efforts.size(); ++i)
    report.efforts[coalition.members[i].id] = efforts[i];
  return report;
}

// Largest unilateral deviation gain over a grid scan with local golden-section
// refinement. A result <= tol certifies an approximate equilibrium; a larger
// value exhibits a profitable deviation.
inline double verify_pure_ne(const EffortProfile& profile, const Scenario& scenario,
                             const std::string& coalition_id, int grid_size, double t_max = 0.0,
                             PayoffMode mode = PayoffMode::conditional) {
  if (grid_size < 2) throw grid_too_coarse("verify_pure_ne: grid_size must be >= 2");
  const Coalition& coalition = scenario.coalition(coalition_id);
  if (t_max <= 0.0) t_max = default_t_max(coalition);

  auto value = [&](const EffortProfile& prof, const std::string& pid) {
    return mode == PayoffMode::conditional ? payoff(prof, coalition, pid)
                                           : expected_payoff(prof, scenario, coalition, pid);
  };

  double max_gain = 0.0;
  double step = t_max / (grid_size - 1);
  for (const auto& m : coalition.members) {
    double baseline = value(profile, m.id);  // throws degenerate_profile at the all-zero point
    EffortProfile probe = profile;
    double best = baseline;
    double best_t = effort_of(profile, m.id);
    for (int g = 0; g < grid_size; ++g) {
      probe[m.id] = g * step;
      try {
        double v = value(probe, m.id);
        if (v > best) {
          best = v;
          best_t = probe[m.id];
        }
      } catch (const degenerate_profile&) {
        // deviation lands on the undefined all-zero point; skip it
      }
    }
    double lo = std::max(0.0, best_t - step);
    double hi = std::min(t_max, best_t + step);
    double refined = golden_max(
        [&](double t) {
          probe[m.id] = t;
          try {
            return value(probe, m.id);
          } catch (const degenerate_profile&) {
            return -std::numeric_limits<double>::infinity();
          }
        },
        lo, hi, 1e-12 * std::max(1.0, t_max));
    probe[m.id] = refined;
    try {
      best = std::max(best, value(probe, m.id));
    } catch (const degenerate_profile&) {
    }
    max_gain = std::max(max_gain, best - baseline);
  }
  return max_gain;
}

// Two-layer fixed point: every player best-responds to the expected payoff,
// which folds in their effect on both their coalition's share denominator and
// the inter-coalition win probability. The composition collapses to a single
// Tullock objective against the total effective effort of all other players.
inline std::map<std::string, EquilibriumReport> solve_two_layer(const Scenario& scenario,
                                                                const SolverConfig& config) {
  config.validate();
  scenario.validate();
  double t_max = config.t_max > 0.0 ? config.t_max : default_t_max(scenario);
  double xtol = 0.05 * config.tol * std::max(1.0, t_max);

  struct Slot {
    const Coalition* coalition;
    const PlayerParams* player;
  };
  std::vector<Slot> slots;
  for (const auto& c : scenario.coalitions)
    for (const auto& m : c.members) slots.push_back({&c, &m});

  std::vector<double> efforts(slots.size(), t_max / 10.0);
  detail::CycleDetector cycles;

  ReportKind kind = ReportKind::pure_cycle_detected;
  double residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    double total = 0.0;
    for (std::size_t i = 0; i < slots.size(); ++i)
      total += efforts[i] * slots[i].player->effectiveness;

    double max_step = 0.0;
    std::vector<double> next(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& p = *slots[i].player;
      double rest = total - efforts[i] * p.effectiveness;
      double br = detail::best_response(p, rest, slots[i].coalition->reward, t_max, xtol);
      next[i] = efforts[i] + config.damping * (br - efforts[i]);
      max_step = std::max(max_step, std::abs(next[i] - efforts[i]));
    }
    efforts = next;
    iterations = iter;
    residual = max_step;
    if (max_step < config.tol) {
      kind = ReportKind::pure_converged;
      break;
    }
    if (max_step > 1e-6 && cycles.seen(efforts)) {
      warnings.push_back("best-response cycle detected");
      break;
    }
  }

  std::map<std::string, EquilibriumReport> out;
  for (const auto& c : scenario.coalitions) {
    EquilibriumReport r;
    r.kind = kind;
    r.residual = residual;
    r.iterations = iterations;
    r.warnings = warnings;
    out[c.id] = std::move(r);
  }
  for (std::size_t i = 0; i < slots.size(); ++i)
    out[slots[i].coalition->id].efforts[slots[i].player->id] = efforts[i];
  return out;
}

}  // namespace ccag
