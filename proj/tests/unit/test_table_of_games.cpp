#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "lanekin/table_audit.hpp"
#include "lanekin/table_of_games.hpp"

using namespace lanekin;

namespace {

std::vector<double> loads(std::initializer_list<double> l) {
  std::vector<double> out;
  for (double v : l) out.push_back(v / static_cast<double>(l.size()));
  return out;
}

struct RandomContext {
  std::vector<double> rho_star;
  InteractionContext ctx;
};

RandomContext draw(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nc(2, 8);
  std::uniform_int_distribution<int> nl(2, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomContext rc;
  const int classes = nc(rng);
  const int lanes = nl(rng);
  for (int l = 0; l < lanes; ++l) rc.rho_star.push_back(u(rng) / lanes);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::uniform_int_distribution<int> ln(0, lanes - 1);
  rc.ctx = {cls(rng), cls(rng), ln(rng), u(rng), {}, classes};
  return rc;
}

}  // namespace

TEST_CASE("classification covers every case") {
  CHECK(classify(1, 3, 1, 6, 3) == GameCase::kIa);
  CHECK(classify(0, 3, 1, 6, 3) == GameCase::kIb);
  CHECK(classify(2, 3, 0, 6, 3) == GameCase::kIc);
  CHECK(classify(3, 1, 1, 6, 3) == GameCase::kIIa);
  CHECK(classify(5, 1, 0, 6, 3) == GameCase::kIIb);
  CHECK(classify(5, 1, 2, 6, 3) == GameCase::kIIc);
  CHECK(classify(2, 2, 1, 6, 3) == GameCase::kIIIa);
  CHECK(classify(2, 2, 0, 6, 3) == GameCase::kIIIb);
  CHECK(classify(2, 2, 2, 6, 3) == GameCase::kIIIc);
  CHECK(classify(0, 0, 1, 6, 3) == GameCase::kIIId);
  CHECK(classify(0, 0, 0, 6, 3) == GameCase::kIIIe);
  CHECK(classify(0, 0, 2, 6, 3) == GameCase::kIIIf);
  CHECK(classify(5, 5, 1, 6, 3) == GameCase::kIIIg);
  CHECK(classify(5, 5, 0, 6, 3) == GameCase::kIIIh);
  CHECK(classify(5, 5, 2, 6, 3) == GameCase::kIIIi);
  CHECK(case_label(GameCase::kIIIe) == "III(e)");
  CHECK_THROWS_AS(classify(6, 0, 0, 6, 3), LaneIndexError);
  CHECK_THROWS_AS(classify(0, 0, 3, 6, 3), LaneIndexError);
}

TEST_CASE("overtaking in the fastest lane copies the leader's speed") {
  const auto rs = loads({0.3, 0.8, 0.9});
  for (int h = 1; h < 6; ++h) {
    for (int p = 0; p < h; ++p) {
      const auto row = transition_row({h, p, 2, 0.7, rs, 6}, TablePolicy::kStrict);
      CHECK(row.game_case == GameCase::kIIc);
      REQUIRE(row.entries.size() == 1);
      CHECK(row.probability(p, 2) == 1.0);
    }
  }
}

TEST_CASE("slowest class behind a faster vehicle") {
  // h = 0, p = 2 in the middle lane with load 0.3.
  const auto rs = loads({0.5, 0.3, 0.1});
  const auto row = transition_row({0, 2, 1, 0.6, rs, 6}, TablePolicy::kStrict);
  CHECK(row.game_case == GameCase::kIb);
  CHECK(row.probability(0, 1) == doctest::Approx(0.3));
  CHECK(row.probability(1, 1) == doctest::Approx(0.7 / 1.5));
  CHECK(row.probability(2, 1) == doctest::Approx(0.7 / 3.0));
  CHECK(row.raw_sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("slower candidate in an interior lane") {
  // h = 1, p = 4, r = 1; loads 0.4 in lane 0 and 0.6 in lane 1.
  const auto rs = loads({0.4, 0.6, 0.2});
  const double a = 0.3;
  const double S = 0.6 * (1.0 - 0.4);
  const auto row = transition_row({1, 4, 1, a, rs, 6}, TablePolicy::kStrict);
  CHECK(row.game_case == GameCase::kIa);
  CHECK(row.probability(1, 1) == doctest::Approx(0.448).epsilon(1e-14));
  const double norm = 11.0 / 6.0;
  for (int i = 2; i <= 4; ++i) {
    CHECK(row.probability(i, 1) == doctest::Approx(a * (1.0 - S) / (i - 1) / norm).epsilon(1e-14));
  }
  CHECK(row.probability(5, 1) == 0.0);
  CHECK(row.probability(0, 0) == doctest::Approx(0.252).epsilon(1e-14));
  CHECK(row.probability(1, 0) == doctest::Approx(0.108).epsilon(1e-14));
  CHECK(row.probability(1, 2) == 0.0);
  CHECK(row.raw_sum == doctest::Approx(1.0).epsilon(1e-14));

  SUBCASE("alpha = 1 never keeps the same speed in lane r") {
    const auto r1 = transition_row({1, 4, 1, 1.0, rs, 6}, TablePolicy::kStrict);
    CHECK(r1.probability(1, 1) == 0.0);
    CHECK(r1.probability(0, 0) == 0.0);
    CHECK(r1.probability(1, 0) == doctest::Approx(S));
  }
}

TEST_CASE("equal speeds in an interior lane do not sum to one") {
  const auto rs = loads({0.5, 0.5, 0.5});
  const auto strict = transition_row({2, 2, 1, 0.5, rs, 6}, TablePolicy::kStrict);
  CHECK(strict.game_case == GameCase::kIIIa);
  CHECK(strict.raw_sum == doctest::Approx(0.9375).epsilon(1e-14));
  CHECK(strict.sum() == doctest::Approx(0.9375).epsilon(1e-14));

  const auto renorm = transition_row({2, 2, 1, 0.5, rs, 6}, TablePolicy::kRenormalize);
  CHECK(renorm.renormalized);
  CHECK(renorm.raw_sum == doctest::Approx(0.9375).epsilon(1e-14));
  CHECK(renorm.sum() == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& e : renorm.entries) {
    CHECK(e.prob == doctest::Approx(strict.probability(e.cls, e.lane) / 0.9375).epsilon(1e-14));
  }
}

TEST_CASE("rows over random contexts") {
  std::mt19937_64 rng(20240601);
  long accel_checked = 0;
  long brake_checked = 0;
  for (int k = 0; k < 12000; ++k) {
    RandomContext rc = draw(rng);
    rc.ctx.rho_star = rc.rho_star;
    const InteractionContext& c = rc.ctx;
    const auto strict = transition_row(c, TablePolicy::kStrict);
    const auto row = transition_row(c, TablePolicy::kRenormalize);
    const auto allowed = admissible_lanes(c.lane, c.lanes());

    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(strict.raw_sum == doctest::Approx(row.raw_sum).epsilon(1e-15));
    for (const auto& e : row.entries) {
      CHECK(e.prob >= 0.0);
      CHECK(e.cls >= 0);
      CHECK(e.cls < c.classes);
      CHECK(std::find(allowed.begin(), allowed.end(), e.lane) != allowed.end());
    }

    const int h = c.candidate;
    const int p = c.field;
    const int r = c.lane;
    if (row.game_case == GameCase::kIa) {
      // Acceleration in lane r: weight 1 / (i - h) over h+1..p.
      const double base = strict.probability(h + 1, r);
      for (int i = h + 2; i <= p; ++i) {
        CHECK(strict.probability(i, r) * (i - h) == doctest::Approx(base).epsilon(1e-12));
      }
      for (int i = p + 1; i < c.classes; ++i) CHECK(strict.probability(i, r) == 0.0);
      ++accel_checked;
      // Braking into lane r-1: weight (h - i) over 0..h-1.
      const double b0 = strict.probability(h - 1, r - 1);
      for (int i = 0; i < h; ++i) {
        CHECK(strict.probability(i, r - 1) == doctest::Approx(b0 * (h - i)).epsilon(1e-12));
      }
      for (int i = h + 1; i < c.classes; ++i) CHECK(strict.probability(i, r - 1) == 0.0);
      ++brake_checked;
    }
    if (row.game_case == GameCase::kIIc) {
      CHECK(row.probability(p, r) == 1.0);
    }
    if (h < p) {
      // Never faster than the field vehicle in lane r.
      for (const auto& e : row.entries) {
        if (e.lane == r) CHECK(e.cls <= p);
      }
    }
  }
  CHECK(accel_checked > 100);
  CHECK(brake_checked > 100);
}

TEST_CASE("strict rows never exceed the tolerance for negativity") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10000; ++k) {
    RandomContext rc = draw(rng);
    rc.ctx.rho_star = rc.rho_star;
    const auto row = transition_row(rc.ctx, TablePolicy::kStrict);
    CHECK(row.min_entry >= 0.0);
    CHECK(row.raw_sum > 0.0);
  }
}

TEST_CASE("lane table agrees with row evaluation") {
  const auto rs = loads({0.2, 0.55, 0.9});
  for (int r = 0; r < 3; ++r) {
    const LaneTable table(r, 0.45, rs, 6, TablePolicy::kRenormalize);
    for (int h = 0; h < 6; ++h) {
      for (int p = 0; p < 6; ++p) {
        const auto row = transition_row({h, p, r, 0.45, rs, 6}, TablePolicy::kRenormalize);
        const auto block = table.destinations(h, p);
        double s = 0.0;
        for (int l = 0; l < 3; ++l) {
          for (int i = 0; i < 6; ++i) {
            CHECK(table(h, p, i, l) == row.probability(i, l));
            CHECK(block[static_cast<std::size_t>(l * 6 + i)] == row.probability(i, l));
            s += table(h, p, i, l);
          }
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("audit reaches every case and records the defect") {
  const AuditReport rep = audit_table(AuditGrid{});
  CHECK(rep.coverage() == 1.0);
  CHECK(rep.findings.size() == 3u * 125u * 6u * 6u * 3u);
  CHECK(rep.negative_entries == 0);
  CHECK(rep.defective_rows > 0);
  CHECK(rep.case_max_deviation[case_index(GameCase::kIIIa)] > 0.0);
  CHECK(rep.case_max_deviation[case_index(GameCase::kIIc)] == 0.0);
  for (int c = 0; c < kGameCaseCount; ++c) {
    CHECK(rep.case_expected[static_cast<std::size_t>(c)]);
    CHECK(rep.case_hits[static_cast<std::size_t>(c)] > 0);
  }

  std::ostringstream csv, summary;
  write_audit_csv(rep, csv);
  write_audit_summary_csv(rep, summary);
  CHECK(csv.str().rfind("case,h,p,r,alpha,sample,loads,raw_sum,min_entry\n", 0) == 0);
  const std::string text = summary.str();
  CHECK(text.rfind("case,expected,hits,max_deviation\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == kGameCaseCount + 1);
}

TEST_CASE("two lanes have no interior-lane cases") {
  const auto expected = expected_cases(6, 2);
  CHECK(expected[case_index(GameCase::kIa)]);
  CHECK(expected[case_index(GameCase::kIIa)]);
  CHECK_FALSE(expected[case_index(GameCase::kIIIa)]);
  CHECK_FALSE(expected[case_index(GameCase::kIIId)]);
  CHECK_FALSE(expected[case_index(GameCase::kIIIg)]);
  CHECK(expected[case_index(GameCase::kIIIe)]);
  const AuditReport rep = audit_table({6, 2, {0.5}, {0.0, 1.0}});
  CHECK(rep.coverage() == 1.0);
  CHECK(rep.case_hits[case_index(GameCase::kIIIa)] == 0);
}
