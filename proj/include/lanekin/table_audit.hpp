#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "lanekin/table_of_games.hpp"

namespace lanekin {

/// Sample grid for the audit. Each lane's load L*rho* is drawn from
/// `load_levels`; every combination across lanes is visited.
struct AuditGrid {
  int classes = 6;
  int lanes = 3;
  std::vector<double> alphas{0.3, 0.6, 0.95};
  std::vector<double> load_levels{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct AuditFinding {
  GameCase game_case;
  int h, p, r;  ///< zero-based
  double alpha;
  long sample;  ///< mixed-radix index into load_levels^lanes
  double raw_sum;
  double min_entry;
};

struct AuditReport {
  AuditGrid grid;
  std::vector<AuditFinding> findings;  ///< one per (alpha, sample, h, p, r)
  double max_deviation = 0.0;          ///< max |raw_sum - 1|
  long defective_rows = 0;             ///< rows with |raw_sum - 1| > tolerance
  long negative_entries = 0;           ///< rows with min_entry < 0
  double tolerance = 1e-12;
  std::array<long, kGameCaseCount> case_hits{};
  std::array<double, kGameCaseCount> case_max_deviation{};
  std::array<bool, kGameCaseCount> case_expected{};
  std::array<GameCase, kGameCaseCount> worst_case_order{};

  /// Loads of every lane for a sample index.
  std::vector<double> sample_loads(long sample) const;

  /// Fraction of the cases reachable for (classes, lanes) that were hit.
  double coverage() const;
};

/// Cases that exist for a given grid size, derived from the lane and class
/// conditions of each case (independently of `classify`).
std::array<bool, kGameCaseCount> expected_cases(int classes, int lanes);

AuditReport audit_table(const AuditGrid& grid);

/// CSV: case,h,p,r,alpha,sample,loads,raw_sum,min_entry (one-based h,p,r).
void write_audit_csv(const AuditReport& report, std::ostream& os);

/// Per-case summary CSV: case,expected,hits,max_deviation.
void write_audit_summary_csv(const AuditReport& report, std::ostream& os);

}  // namespace lanekin
