#pragma once

// Table of games: probability that a candidate vehicle in lane r at speed
// class h ends in class i of lane l after meeting a field vehicle of class p
// in the same lane.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanekin/core.hpp"

namespace lanekin {

/// Case analysis of the table. I: candidate slower than the field vehicle,
/// II: candidate faster, III: equal speeds.
enum class GameCase {
  kIa,    ///< h > first class, r > slowest lane
  kIb,    ///< h = first class, r > slowest lane
  kIc,    ///< r = slowest lane
  kIIa,   ///< h < last class, r < fastest lane
  kIIb,   ///< h = last class, r < fastest lane
  kIIc,   ///< r = fastest lane
  kIIIa,  ///< interior class, interior lane
  kIIIb,  ///< interior class, slowest lane
  kIIIc,  ///< interior class, fastest lane
  kIIId,  ///< first class, interior lane
  kIIIe,  ///< first class, slowest lane
  kIIIf,  ///< first class, fastest lane
  kIIIg,  ///< last class, interior lane
  kIIIh,  ///< last class, slowest lane
  kIIIi,  ///< last class, fastest lane
};

inline constexpr int kGameCaseCount = 15;

std::string_view case_label(GameCase c) noexcept;
inline int case_index(GameCase c) noexcept { return static_cast<int>(c); }

/// Which case applies to candidate class h, field class p in lane r.
GameCase classify(int h, int p, int r, int classes, int lanes);

/// One interaction. `rho_star` holds the perceived density of every lane
/// (not scaled by L) and must outlive the context.
struct InteractionContext {
  int candidate = 0;  ///< h
  int field = 0;      ///< p
  int lane = 0;       ///< r
  double alpha = 0.0;
  std::span<const double> rho_star;
  int classes = 0;

  int lanes() const noexcept { return static_cast<int>(rho_star.size()); }
};

struct TransitionEntry {
  int cls = 0;
  int lane = 0;
  double prob = 0.0;
};

struct TransitionRow {
  std::vector<TransitionEntry> entries;
  double raw_sum = 0.0;
  double min_entry = 0.0;  ///< smallest entry before renormalization
  bool renormalized = false;
  GameCase game_case = GameCase::kIa;

  double probability(int cls, int lane) const noexcept;
  double sum() const noexcept;
};

/// Entries below this magnitude of negativity are roundoff and snap to 0.
inline constexpr double kNegativeTolerance = 1e-13;

/// Evaluates the row for `ctx`. With kRenormalize the entries are divided by
/// the raw sum; raw_sum is recorded either way.
/// Throws DegenerateRowError (zero raw sum under renormalization) or
/// ModelViolationError (negative entry).
TransitionRow transition_row(const InteractionContext& ctx, TablePolicy policy);

/// Allocation-free variant that reuses `out`.
void transition_row(const InteractionContext& ctx, TablePolicy policy, TransitionRow& out);

/// Dense tensor of every row for one lane at fixed (alpha, rho_star):
/// value(h, p, i, l) over all candidate/field/destination combinations.
/// Used by the solvers, which sweep every (h, p) pair per lane.
class LaneTable {
 public:
  LaneTable(int lane, double alpha, std::span<const double> rho_star, int classes,
            TablePolicy policy);

  double operator()(int h, int p, int i, int l) const noexcept {
    return values_[((static_cast<std::size_t>(h) * classes_ + static_cast<std::size_t>(p)) *
                        static_cast<std::size_t>(lanes_) +
                    static_cast<std::size_t>(l)) *
                       static_cast<std::size_t>(classes_) +
                   static_cast<std::size_t>(i)];
  }
  /// Destination block for (h, p), laid out lane-major (l * classes + i).
  std::span<const double> destinations(int h, int p) const noexcept {
    const std::size_t block = static_cast<std::size_t>(lanes_) * static_cast<std::size_t>(classes_);
    return std::span<const double>(values_).subspan(
        (static_cast<std::size_t>(h) * classes_ + static_cast<std::size_t>(p)) * block, block);
  }

 private:
  int classes_;
  int lanes_;
  std::vector<double> values_;
};

}  // namespace lanekin
