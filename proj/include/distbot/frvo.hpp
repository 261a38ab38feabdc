#pragma once

#include <span>
#include <vector>

#include "distbot/core.hpp"

namespace distbot::frvo {

/// Neighbours whose footprint gap is below this are tracked whatever their
/// bearing.
inline constexpr double kNearField = 0.3;
/// Gap below which a reciprocal pair locks its passing side.
inline constexpr double kSideLockGap = 0.5;

struct Params {
  double range = 5.0;    // interaction radius R, meters
  double horizon = 2.0;  // seconds
  double v_max = 1.5;    // m/s
  int directions = 64;   // polar sampling grid
  int magnitudes = 16;
};

/// Truncated velocity-obstacle cone.
///
/// A velocity v is inside when the relative velocity scale * (v - apex)
/// brings the two footprint discs closer than `combined_radius` at some
/// time in [0, horizon]. `scale` is 2 for a reciprocal obstacle (each agent
/// takes half of the correction) and 1 when the other agent does not react.
/// When the discs already overlap the obstacle degenerates to a half-plane
/// that only admits velocities separating the pair within the horizon.
///
/// A reciprocal pair that is engaged (on a collision course within the
/// horizon, or closer than kSideLockGap) also agrees on a passing side
/// (+1 left, -1 right of the line to the other agent). Both agents derive the
/// same side from their relative velocity; the obstacle then also covers
/// every velocity that is not strictly beyond the agreed boundary line, so the
/// two halves of the correction can never cancel.
struct VelocityObstacle {
  Vec2 apex = Vec2::Zero();
  Vec2 left_dir = Vec2::UnitX();
  Vec2 right_dir = Vec2::UnitX();
  double horizon = 2.0;
  Vec2 rel_position = Vec2::UnitX();
  double combined_radius = 0.0;
  double scale = 2.0;
  bool degenerate = false;
  int passing_side = 0;

  bool contains(const Vec2& v) const;
  /// Center and radius of the truncation disc in velocity space.
  Vec2 cutoff_center() const;
  double cutoff_radius() const;
};

VelocityObstacle make_velocity_obstacle(const Vec2& rel_position,
                                        double combined_radius,
                                        const Vec2& apex, double scale,
                                        double horizon);

struct NeighborSet {
  std::vector<PedestrianState> members;
};

/// Union of per-neighbor cones.
struct FrvoRegion {
  std::vector<VelocityObstacle> obstacles;

  bool contains(const Vec2& v) const;
  bool empty() const { return obstacles.empty(); }
};

struct SelectOptions {
  double grid_rotation = 0.0;  // rotates the polar sampling grid
  double min_speed = 0.0;      // candidates slower than this are skipped
};

struct Selection {
  Vec2 velocity = Vec2::Zero();
  bool blocked = false;
};

struct StepResult {
  PedestrianState state;
  bool blocked = false;
};

/// Others within `range` whose footprint reaches into the frontal half-plane
/// of the subject's facing direction, plus any closer than kNearField.
NeighborSet neighbor_set(const PedestrianState& subject,
                         std::span<const PedestrianState> all, double range);

/// Velocity obstacle induced on `subject` by `other`. The apex is the mean
/// velocity when `other` reciprocates (it is reciprocal and has the subject in
/// its own neighbour set); otherwise the apex is other's velocity and
/// the subject carries the whole correction.
VelocityObstacle compute_vo(const PedestrianState& subject,
                            const PedestrianState& other, double horizon);

FrvoRegion frvo_union(const PedestrianState& subject,
                      const NeighborSet& neighbors, double horizon);

/// The sampled admissible velocity nearest to `v_pref`. Candidates: v_pref,
/// the projections of v_pref onto every cone boundary, zero, and a polar
/// grid over the v_max disc. Ties go to the earlier candidate. Throws
/// std::invalid_argument if |v_pref| > v_max.
Selection select_best_velocity(const Vec2& v_pref, const FrvoRegion& region,
                               double v_max, const Params& params = {},
                               const SelectOptions& options = {});

/// Candidate set used by select_best_velocity, in evaluation order.
std::vector<Vec2> velocity_candidates(const Vec2& v_pref,
                                      const FrvoRegion& region, double v_max,
                                      const Params& params,
                                      const SelectOptions& options);

StepResult step_pedestrian(const PedestrianState& p,
                           std::span<const PedestrianState> all, double dt,
                           const Params& params = {});

}  // namespace distbot::frvo
