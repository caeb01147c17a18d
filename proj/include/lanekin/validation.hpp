#pragma once

// Independent oracles: a second transcription of the table of games,
// conservation meters and convergence-order estimation.

#include <cstdint>
#include <span>
#include <vector>

#include "lanekin/table_of_games.hpp"

namespace lanekin::validation {

/// Dense row (lane-major, lanes x classes) from the straight-line oracle.
std::vector<double> brute_force_row(const InteractionContext& ctx);

/// Sum of every entry of brute_force_row(ctx).
double brute_force_row_sum(const InteractionContext& ctx);

/// max_t |m(t) - m(0)| / max(m(0), 1e-300).
double check_conservation(std::span<const double> masses);

/// log2(e_coarse / e_fine). Throws UndefinedOrderError for non-positive input.
double convergence_order(double e_coarse, double e_fine);

struct DualCheckResult {
  long contexts = 0;
  double max_sum_discrepancy = 0.0;    ///< |raw_sum - oracle sum|
  double max_entry_discrepancy = 0.0;  ///< max |entry - oracle entry|
  long lane_violations = 0;            ///< entries outside admissible_lanes(r)
};

/// Compares transition_row (strict) with the oracle on `count` random
/// contexts drawn with a fixed seed.
DualCheckResult dual_implementation_check(int classes, int lanes, long count,
                                          std::uint64_t seed);

}  // namespace lanekin::validation
