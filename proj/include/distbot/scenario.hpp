#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distbot/core.hpp"
#include "distbot/frvo.hpp"
#include "distbot/localnav.hpp"
#include "distbot/planner.hpp"
#include "distbot/sensing.hpp"
#include "distbot/socialgraph.hpp"
#include "distbot/tracker.hpp"

namespace distbot::engine {

/// Load or validation failure. `path` names the offending field
/// ("pedestrians[2].start"); parse errors carry line and column instead.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Box {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};

struct JunctionSpec {
  int id = 0;
  Vec2 position = Vec2::Zero();
  std::vector<int> neighbors;
};

struct MapSpec {
  double width = 20.0;   // meters
  double height = 20.0;
  double resolution = 0.1;
  Vec2 origin = Vec2::Zero();
  bool border_walls = true;
  std::vector<Box> obstacles;
  std::vector<JunctionSpec> junctions;  // synthesized when empty
};

struct PedestrianSpec {
  int id = 0;
  Vec2 start = Vec2::Zero();
  std::vector<Vec2> waypoints;  // empty: stands still
  bool loop = true;
  bool wander = false;          // random goals inside wander_region
  std::optional<Box> wander_region;  // defaults to the map inset by 0.5 m
  double speed = 1.0;
  double l = 0.45;
  double w = 0.25;
  std::uint64_t spawn_tick = 0;
  std::optional<std::uint64_t> despawn_tick;
};

struct RobotSpec {
  Vec2 start = Vec2::Zero();
  double heading = 0.0;
  double v_max = 1.0;
  double omega_max = 1.5;
  double radius = 0.35;
  // Extra clearance pedestrians keep from the robot body.
  double personal_space = 0.1;
};

enum class MissionKind { surveillance, follow, hold };

struct MissionSpec {
  MissionKind kind = MissionKind::surveillance;
  int follow_target = -1;          // pedestrian id, follow mode only
  double follow_distance = 1.2;
  double standoff = 3.0;           // approach goal distance from a centroid
  int replan_ticks = 10;
  std::uint64_t advise_timeout = 300;
  double waypoint_tolerance = 0.4;
};

struct ComplianceSpec {
  double p_comply = 0.5;
  double dispersal_distance = 3.0;
  std::uint64_t dwell_ticks = 600;
  double address_radius = 1.0;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t duration = 600;
  double dt = 0.1;
  MapSpec map;
  std::vector<PedestrianSpec> pedestrians;
  RobotSpec robot;
  MissionSpec mission;
  ComplianceSpec compliance;
  sensing::CameraRig rig;
  sensing::NoiseParams noise;
  tracker::Params tracker;
  social::Thresholds social;
  std::uint64_t crowd_window = 300;
  planner::RouteParams routing;
  planner::AdvisoryParams advisory;
  localnav::Params localnav;
  std::string policy = "reactive_vo";
  frvo::Params frvo;
};

const char* to_string(MissionKind k);

/// Strict parse: unknown keys are rejected, defaults filled in, then
/// validate() runs. Throws ScenarioError.
Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

/// Full document with every default written out.
nlohmann::json to_json(const Scenario& s);

/// Invariant checks with field paths. Throws ScenarioError.
void validate(const Scenario& s);

/// Planning grid rasterized from the static map.
planner::OccupancyGrid rasterize(const MapSpec& map);

}  // namespace distbot::engine
