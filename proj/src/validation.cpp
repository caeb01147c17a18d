#include "lanekin/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lanekin::validation {

double check_conservation(std::span<const double> masses) {
  if (masses.empty()) return 0.0;
  const double m0 = masses.front();
  const double denom = std::max(m0, 1e-300);
  double worst = 0.0;
  for (double m : masses) worst = std::max(worst, std::abs(m - m0) / denom);
  return worst;
}

double convergence_order(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
    throw UndefinedOrderError("convergence order needs two positive errors");
  }
  return std::log2(e_coarse / e_fine);
}

DualCheckResult dual_implementation_check(int classes, int lanes, long count,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::uniform_int_distribution<int> lane(0, lanes - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DualCheckResult res;
  std::vector<double> rho_star(static_cast<std::size_t>(lanes));
  TransitionRow row;
  for (long k = 0; k < count; ++k) {
    for (double& v : rho_star) v = unit(rng) / lanes;
    const InteractionContext ctx{cls(rng), cls(rng), lane(rng), unit(rng), rho_star, classes};
    transition_row(ctx, TablePolicy::kStrict, row);
    const std::vector<double> dense = brute_force_row(ctx);

    double oracle_sum = 0.0;
    for (double v : dense) oracle_sum += v;
    res.max_sum_discrepancy = std::max(res.max_sum_discrepancy, std::abs(row.raw_sum - oracle_sum));

    std::vector<double> mine(dense.size(), 0.0);
    const auto allowed = admissible_lanes(ctx.lane, lanes);
    for (const auto& e : row.entries) {
      mine[static_cast<std::size_t>(e.lane * classes + e.cls)] += e.prob;
      if (std::find(allowed.begin(), allowed.end(), e.lane) == allowed.end()) ++res.lane_violations;
    }
    for (std::size_t j = 0; j < dense.size(); ++j) {
      res.max_entry_discrepancy = std::max(res.max_entry_discrepancy, std::abs(mine[j] - dense[j]));
    }
    ++res.contexts;
  }
  return res;
}

}  // namespace lanekin::validation
