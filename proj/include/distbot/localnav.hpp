#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "distbot/core.hpp"
#include "distbot/frvo.hpp"
#include "distbot/planner.hpp"

namespace distbot::localnav {

struct Params {
  int beams = 360;
  double max_range = 10.0;
  double v_max = 1.0;
  double omega_max = 1.5;
  double robot_radius = 0.35;
  double margin = 0.1;          // extra clearance around scan points
  double horizon = 1.0;         // seconds
  double cluster_jump = 0.3;    // range jump that splits two arcs, meters
  double point_spacing = 0.1;   // max gap between kept points of an arc
  double heading_gain = 2.0;    // omega = gain * heading error
  double slow_radius = 1.0;     // goal distance below which speed tapers
  double goal_tolerance = 0.2;
  double dt = 0.1;
};

/// Uniform 360 degree scan; beam i points at 2*pi*i/n in the robot frame.
struct Scan2D {
  std::vector<double> ranges;
  double max_range = 10.0;

  double beam_angle(std::size_t i) const {
    return 2.0 * kPi * static_cast<double>(i) / static_cast<double>(ranges.size());
  }
};

struct VelocityCommand {
  double linear = 0.0;
  double angular = 0.0;
  bool blocked = false;

  bool operator==(const VelocityCommand&) const = default;
};

struct PolicyInput {
  Scan2D scan;
  Vec2 goal = Vec2::Zero();  // robot frame
  VelocityCommand current_velocity;
};

/// Ray cast against occupied cells and pedestrian footprint discs.
Scan2D world_to_scan(const Pose2& robot, const planner::OccupancyGrid& grid,
                     std::span<const PedestrianState> pedestrians,
                     const Params& params = {});

/// Static velocity obstacles, in the robot frame, for the scan points that
/// can be reached within the horizon.
frvo::FrvoRegion scan_obstacles(const Scan2D& scan, const Params& params);

/// Sealed policy interface, so a learned policy can be dropped in.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual VelocityCommand step(const PolicyInput& input) const = 0;
  virtual std::string name() const = 0;
};

/// Velocity-obstacle pursuit: pick the admissible velocity nearest the goal
/// pursuit velocity, then turn toward it and drive along the new heading.
class ReactiveVoPolicy : public Policy {
 public:
  explicit ReactiveVoPolicy(Params params = {}) : params_(params) {}
  VelocityCommand step(const PolicyInput& input) const override;
  std::string name() const override { return "reactive_vo"; }
  const Params& params() const { return params_; }

 private:
  Params params_;
};

/// Throws std::invalid_argument for unknown names.
std::unique_ptr<Policy> make_policy(const std::string& name, const Params& params);

VelocityCommand policy_step(const PolicyInput& input, const Params& params = {});

/// Unicycle update: rotate first, then translate along the new heading.
Pose2 integrate(const Pose2& pose, const VelocityCommand& cmd, double dt);

/// Closed boundary: true iff distance <= tol. Throws unless tol > 0.
bool goal_reached(const Pose2& robot, const Vec2& goal, double tol);

}  // namespace distbot::localnav
