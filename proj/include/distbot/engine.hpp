#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distbot/core.hpp"
#include "distbot/localnav.hpp"
#include "distbot/metrics.hpp"
#include "distbot/planner.hpp"
#include "distbot/scenario.hpp"
#include "distbot/socialgraph.hpp"
#include "distbot/tracker.hpp"

namespace distbot::engine {

enum class Mode { patrol, approaching, advising, follow, hold };

const char* to_string(Mode m);

struct MissionState {
  Mode mode = Mode::patrol;
  int target = -1;              // crowd id while approaching or advising
  std::vector<int> route;       // crowd ids in visit order
  std::vector<Vec2> path;       // current waypoints
  std::size_t path_index = 0;
  std::uint64_t mode_since = 0;
  std::uint64_t last_plan = 0;
};

/// Ground-truth pedestrian plus its scripted behaviour.
struct Agent {
  PedestrianSpec spec;
  PedestrianState state;
  bool active = false;
  std::size_t waypoint = 0;
  std::optional<Vec2> goal;
  bool complying = false;
  Vec2 dispersal = Vec2::Zero();
  std::optional<std::uint64_t> dwell_until;  // set on reaching the dispersal goal
  int stalled = 0;  // consecutive ticks spent nearly still while holding a goal
};

/// One run. Each step() advances a tick through the pipeline and returns
/// the replay record for it.
class Engine {
 public:
  explicit Engine(Scenario scenario);

  const Scenario& scenario() const { return s_; }
  nlohmann::json header() const;
  bool done() const { return clock_.tick >= s_.duration; }
  nlohmann::json step();

  const SimClock& clock() const { return clock_; }
  const Pose2& robot() const { return robot_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const MissionState& mission() const { return mission_; }
  const std::vector<social::CrowdGraph>& crowds() const { return crowds_; }
  const tracker::Tracker& tracks() const { return tracker_; }

 private:
  struct Advised {
    planner::AdvisoryEvent event;
    std::vector<int> addressed;
    std::vector<int> complied;
  };

  void step_pedestrians();
  void update_agent_goal(Agent& a);
  std::vector<sensing::Detection> sense();
  void update_mission(const std::vector<planner::AdvisoryEvent>& events,
                      const std::map<int, double>& distances);
  bool plan_to(const Vec2& goal);
  void start_patrol();
  void advance_patrol();
  std::optional<Vec2> navigation_goal();
  void drive(const std::optional<Vec2>& goal);
  Advised comply(const planner::AdvisoryEvent& e,
                 const social::SocialGraph& graph);

  Scenario s_;
  SimClock clock_;
  Rng world_rng_, sense_rng_, patrol_rng_, comply_rng_;
  std::vector<Agent> agents_;
  std::map<int, sensing::Feature> identities_;
  Pose2 robot_;
  localnav::VelocityCommand command_;
  planner::OccupancyGrid grid_;      // static map, for the scan
  planner::OccupancyGrid planning_;  // inflated by the robot radius
  std::unique_ptr<localnav::Policy> policy_;
  tracker::Tracker tracker_;
  std::vector<social::CrowdGraph> crowds_;
  int next_crowd_id_ = 0;
  planner::AdvisoryTracker advisory_;
  std::set<int> advised_;
  MissionState mission_;
  bool replanned_ = false;

  std::vector<planner::Junction> junctions_;
  int junction_target_ = -1;  // index into junctions_
  int junction_last_ = -1;
  int exit_last_ = -1;
};

/// Runs the whole scenario. Writes the replay to `log` when given; the
/// summary is computed from the same records.
MetricsSummary run(const Scenario& scenario, std::ostream* log);
MetricsSummary run_to_file(const Scenario& scenario, const std::string& path);

}  // namespace distbot::engine
