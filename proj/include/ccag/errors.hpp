#pragma once

#include <stdexcept>
#include <string>

namespace ccag {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// core model
struct negative_effort : error { using error::error; };
struct degenerate_profile : error { using error::error; };
struct degenerate_scenario : error { using error::error; };
struct empty_candidates : error { using error::error; };
struct invariant_violation : error { using error::error; };

// equilibrium
struct unsupported_cost : error { using error::error; };
struct invalid_config : error { using error::error; };
struct invalid_prize : error { using error::error; };
struct grid_too_coarse : error { using error::error; };
struct grid_mismatch : error { using error::error; };
struct not_on_simplex : error { using error::error; };

// coopgame
struct too_many_players : error { using error::error; };
struct missing_subset_value : error { using error::error; };
struct length_mismatch : error { using error::error; };
struct missing_effectiveness : error { using error::error; };

// casestudy
struct insufficient_data : error { using error::error; };
struct zero_volatility : error { using error::error; };
struct unassigned_asset : error { using error::error; };
struct duplicate_asset : error { using error::error; };
struct empty_year : error { using error::error; };
struct unknown_selector : error { using error::error; };

// io
struct file_not_found : error { using error::error; };
struct schema_error : error { using error::error; };

}  // namespace ccag
