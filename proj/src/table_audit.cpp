#include "lanekin/table_audit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace lanekin {

std::array<bool, kGameCaseCount> expected_cases(int classes, int lanes) {
  std::array<bool, kGameCaseCount> e{};
  const bool interior_lane = lanes >= 3;
  const bool interior_class = classes >= 3;
  auto set = [&](GameCase c, bool v) { e[static_cast<std::size_t>(case_index(c))] = v; };
  // I: h < p, so h can be any class but the last; I(a) needs h >= 2nd class.
  set(GameCase::kIa, classes >= 3);
  set(GameCase::kIb, true);
  set(GameCase::kIc, true);
  // II: h > p; II(a) needs an h strictly between the first and last class.
  set(GameCase::kIIa, classes >= 3);
  set(GameCase::kIIb, true);
  set(GameCase::kIIc, true);
  set(GameCase::kIIIa, interior_class && interior_lane);
  set(GameCase::kIIIb, interior_class);
  set(GameCase::kIIIc, interior_class);
  set(GameCase::kIIId, interior_lane);
  set(GameCase::kIIIe, true);
  set(GameCase::kIIIf, true);
  set(GameCase::kIIIg, interior_lane);
  set(GameCase::kIIIh, true);
  set(GameCase::kIIIi, true);
  return e;
}

std::vector<double> AuditReport::sample_loads(long sample) const {
  std::vector<double> loads(static_cast<std::size_t>(grid.lanes));
  const long base = static_cast<long>(grid.load_levels.size());
  for (int l = 0; l < grid.lanes; ++l) {
    loads[static_cast<std::size_t>(l)] = grid.load_levels[static_cast<std::size_t>(sample % base)];
    sample /= base;
  }
  return loads;
}

double AuditReport::coverage() const {
  int expected = 0;
  int hit = 0;
  for (int c = 0; c < kGameCaseCount; ++c) {
    if (!case_expected[static_cast<std::size_t>(c)]) continue;
    ++expected;
    if (case_hits[static_cast<std::size_t>(c)] > 0) ++hit;
  }
  return expected == 0 ? 1.0 : static_cast<double>(hit) / expected;
}

AuditReport audit_table(const AuditGrid& grid) {
  AuditReport rep;
  rep.grid = grid;
  rep.case_expected = expected_cases(grid.classes, grid.lanes);

  long samples = 1;
  for (int l = 0; l < grid.lanes; ++l) samples *= static_cast<long>(grid.load_levels.size());

  std::vector<double> rho_star(static_cast<std::size_t>(grid.lanes));
  TransitionRow row;
  for (double alpha : grid.alphas) {
    for (long s = 0; s < samples; ++s) {
      const auto loads = rep.sample_loads(s);
      for (int l = 0; l < grid.lanes; ++l) {
        rho_star[static_cast<std::size_t>(l)] = loads[static_cast<std::size_t>(l)] / grid.lanes;
      }
      for (int r = 0; r < grid.lanes; ++r) {
        for (int h = 0; h < grid.classes; ++h) {
          for (int p = 0; p < grid.classes; ++p) {
            const InteractionContext ctx{h, p, r, alpha, rho_star, grid.classes};
            transition_row(ctx, TablePolicy::kStrict, row);
            const double dev = std::abs(row.raw_sum - 1.0);
            const auto ci = static_cast<std::size_t>(case_index(row.game_case));
            rep.case_hits[ci] += 1;
            rep.case_max_deviation[ci] = std::max(rep.case_max_deviation[ci], dev);
            rep.max_deviation = std::max(rep.max_deviation, dev);
            if (dev > rep.tolerance) ++rep.defective_rows;
            if (row.min_entry < 0.0) ++rep.negative_entries;
            rep.findings.push_back({row.game_case, h, p, r, alpha, s, row.raw_sum, row.min_entry});
          }
        }
      }
    }
  }

  for (int c = 0; c < kGameCaseCount; ++c) rep.worst_case_order[static_cast<std::size_t>(c)] = static_cast<GameCase>(c);
  std::stable_sort(rep.worst_case_order.begin(), rep.worst_case_order.end(),
                   [&](GameCase a, GameCase b) {
                     return rep.case_max_deviation[static_cast<std::size_t>(case_index(a))] >
                            rep.case_max_deviation[static_cast<std::size_t>(case_index(b))];
                   });
  return rep;
}

void write_audit_csv(const AuditReport& report, std::ostream& os) {
  os << "case,h,p,r,alpha,sample,loads,raw_sum,min_entry\n";
  os << std::setprecision(17);
  for (const auto& f : report.findings) {
    os << case_label(f.game_case) << ',' << f.h + 1 << ',' << f.p + 1 << ',' << f.r + 1 << ','
       << f.alpha << ',' << f.sample << ',';
    const auto loads = report.sample_loads(f.sample);
    for (std::size_t l = 0; l < loads.size(); ++l) os << (l ? ";" : "") << loads[l];
    os << ',' << f.raw_sum << ',' << f.min_entry << '\n';
  }
}

void write_audit_summary_csv(const AuditReport& report, std::ostream& os) {
  os << "case,expected,hits,max_deviation\n";
  os << std::setprecision(17);
  for (int c = 0; c < kGameCaseCount; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    os << case_label(static_cast<GameCase>(c)) << ',' << (report.case_expected[ci] ? 1 : 0) << ','
       << report.case_hits[ci] << ',' << report.case_max_deviation[ci] << '\n';
  }
}

}  // namespace lanekin
