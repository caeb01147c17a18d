#pragma once

// Grids, lane topology, kinetic state containers and macroscopic moments.
//
// Indexing: every C++ and Python interface is zero-based (lane 0 is the
// slowest lane, class 0 is the zero speed). Text output (CSV) is one-based.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lanekin/error.hpp"

namespace lanekin {

/// Uniform velocity grid 0 = v_0 < v_1 < ... < v_{n-1} = 1.
class VelocityGrid {
 public:
  explicit VelocityGrid(int n);

  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const noexcept { return values_; }
  double spacing() const noexcept { return 1.0 / (size() - 1); }
  double max_speed() const noexcept { return values_.back(); }

 private:
  std::vector<double> values_;
};

VelocityGrid build_velocity_grid(int n);

/// Lanes reachable in one interaction from lane `r` (adjacent lanes only),
/// in increasing order.
std::vector<int> admissible_lanes(int r, int lanes);

/// Per-lane, per-class occupancies for the spatially homogeneous state.
/// Storage is lane-major: index = lane * classes + cls.
class KineticField {
 public:
  KineticField() = default;
  KineticField(int lanes, int classes, double fill = 0.0);

  int lanes() const noexcept { return lanes_; }
  int classes() const noexcept { return classes_; }

  double& operator()(int lane, int cls) { return data_[index(lane, cls)]; }
  double operator()(int lane, int cls) const { return data_[index(lane, cls)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> lane(int l) const {
    return std::span<const double>(data_).subspan(index(l, 0), static_cast<std::size_t>(classes_));
  }

  double lane_density(int l) const;
  double total() const;
  double min_entry() const;
  bool all_finite() const;

  /// Sum of absolute entries.
  double l1_norm() const;
  double l1_distance(const KineticField& other) const;

  friend bool operator==(const KineticField&, const KineticField&) = default;

 private:
  std::size_t index(int lane, int cls) const {
    return static_cast<std::size_t>(lane) * static_cast<std::size_t>(classes_) +
           static_cast<std::size_t>(cls);
  }

  int lanes_ = 0;
  int classes_ = 0;
  std::vector<double> data_;
};

struct LaneMoments {
  double rho = 0.0;
  double q = 0.0;
  std::optional<double> U;      ///< empty when rho == 0
  std::optional<double> Theta;  ///< empty when rho == 0
};

struct Macroscopics {
  std::vector<LaneMoments> lanes;
  double rho = 0.0;
  double q = 0.0;
  std::optional<double> U;      ///< (1/L) sum of lane U; empty if any lane is empty
  std::optional<double> Theta;  ///< sum of lane Theta; empty if any lane is empty
};

/// Moments of one lane given its class occupancies.
LaneMoments lane_moments(std::span<const double> f, const VelocityGrid& grid);

/// Moments of a lanes x classes block stored lane-major.
Macroscopics macroscopics(std::span<const double> f, int lanes, const VelocityGrid& grid);
Macroscopics macroscopics(const KineticField& field, const VelocityGrid& grid);

/// Diagnostic for the admissible regime 0 <= rho_l <= 1/L.
struct AdmissibilityReport {
  long violations = 0;
  double worst_excess = 0.0;  ///< max of rho_l - 1/L over violating lanes
  bool ok() const noexcept { return violations == 0; }
};

AdmissibilityReport check_admissible(const KineticField& field, double tol = 1e-12);

/// Relaxation target for the optional external-action term. `target` holds
/// f_e per (lane, class), lane-major. In spatial runs the action is applied
/// on [x_begin, x_end) only.
struct ExternalAction {
  std::vector<double> target;
  double x_begin = 0.0;
  double x_end = 1.0;
};

enum class TablePolicy { kRenormalize, kStrict };

struct ModelParams {
  double eta0 = 1.0;
  std::vector<double> gamma_eta;  ///< one per lane
  std::vector<double> gamma_mu;   ///< one per lane
  double alpha = 0.6;             ///< road quality when no profile is given
  std::function<double(double)> alpha_profile;  ///< optional alpha(x)
  double xi_max = 0.1;
  std::optional<ExternalAction> external_action;
  TablePolicy policy = TablePolicy::kRenormalize;

  /// Defaults for `lanes` lanes: eta0 = 1, gamma_eta = gamma_mu = 1.
  static ModelParams defaults(int lanes, double alpha);

  double alpha_at(double x) const { return alpha_profile ? alpha_profile(x) : alpha; }

  /// Throws InvalidParamsError when an invariant does not hold.
  void validate(int lanes, int classes) const;
};

}  // namespace lanekin
