#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "distbot/core.hpp"
#include "distbot/socialgraph.hpp"

namespace distbot::planner {

// ---------------------------------------------------------------- occupancy

enum class Cell : std::uint8_t { unknown, free, occupied };

using CellIndex = Eigen::Vector2i;

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  /// Throws std::invalid_argument unless resolution > 0 and the size is
  /// positive.
  OccupancyGrid(int width, int height, double resolution, Vec2 origin,
                Cell fill = Cell::unknown);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  bool in_bounds(const CellIndex& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.x() < width_ && c.y() < height_;
  }
  Cell at(const CellIndex& c) const { return cells_[index(c)]; }
  void set(const CellIndex& c, Cell v) { cells_[index(c)] = v; }

  /// Cell containing a world point (floor binning), if in bounds.
  std::optional<CellIndex> cell_of(const Vec2& p) const;
  CellIndex cell_of_unchecked(const Vec2& p) const;
  Vec2 center_of(const CellIndex& c) const;

  /// True for in-bounds free cells only; unknown counts as blocked.
  bool is_free(const CellIndex& c) const {
    return in_bounds(c) && at(c) == Cell::free;
  }
  bool is_free(const Vec2& p) const;

  /// Marks every cell overlapping the axis-aligned box [lo, hi].
  void fill_box(const Vec2& lo, const Vec2& hi, Cell v);

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t index(const CellIndex& c) const {
    return static_cast<std::size_t>(c.y()) * width_ + c.x();
  }
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.1;
  Vec2 origin_ = Vec2::Zero();
  std::vector<Cell> cells_;
};

struct ProjectionParams {
  int width = 100;
  int height = 100;
  double resolution = 0.1;
  Vec2 origin = Vec2::Zero();
  double h_min = 0.30;  // ground filter
  double h_max = 2.0;
  /// When set, cells between the sensor and every return are marked free.
  std::optional<Vec2> sensor_origin;
};

/// Closest-point-within-height projection of a 3D cloud to a 2D grid.
OccupancyGrid project_occupancy(const std::vector<Eigen::Vector3d>& points,
                                const ProjectionParams& params);

/// Cells touched by the segment a-b, including both neighbours whenever the
/// segment passes exactly through a cell corner.
std::vector<CellIndex> supercover(const OccupancyGrid& grid, const Vec2& a,
                                  const Vec2& b);

bool line_of_sight(const OccupancyGrid& grid, const Vec2& a, const Vec2& b);

// ------------------------------------------------------------------- patrol

struct Junction {
  int id = 0;
  Vec2 position = Vec2::Zero();
  std::vector<int> neighbors;    // junction ids, one per exit
  std::vector<Vec2> exits;       // unit directions toward each neighbour
  std::vector<double> counts;    // decayed crowd observations per exit
  std::vector<std::int64_t> last_visited;  // tick, -1 when never taken
};

/// Builds the exit table of a junction toward the given neighbours.
Junction make_junction(int id, const Vec2& position,
                       const std::vector<std::pair<int, Vec2>>& neighbors);

/// Laplace-smoothed appearance probability of each exit.
std::vector<double> exit_probabilities(const Junction& j);

/// Index of the exit with maximal probability; ties go to the least recently
/// taken exit, then to an RNG draw. Throws std::invalid_argument when there
/// are no exits.
int choose_exit(const Junction& j, Rng& rng);

/// The chosen exit direction.
Vec2 patrol_direction(const Junction& j, Rng& rng);

void record_departure(Junction& j, int exit, std::uint64_t tick);
void record_crowd(Junction& j, int exit, double amount = 1.0);
void decay_counts(Junction& j, double factor = 0.99);

// ------------------------------------------------------------------ routing

struct CrowdNode {
  int crowd_id = 0;
  Vec2 location = Vec2::Zero();
  int weight = 2;
  std::uint64_t deadline = 0;  // tick
};

struct RouteParams {
  double lambda = 0.5;  // energy per meter
  int n_max = 10;
};

struct Route {
  std::vector<int> order;            // indices into the crowd list
  std::vector<double> edge_energy;   // lambda * leg length, in visit order
  std::vector<double> arrival_tick;  // fractional ticks
  double energy = 0.0;
  int weight_total = 0;
  double cost = 0.0;  // energy - weight_total - order.size()

  bool empty() const { return order.empty(); }
};

/// Minimum-cost visit sequence by depth-first branch and bound. Legs are
/// straight lines travelled at `speed`; a visit must arrive by its deadline.
/// Throws std::invalid_argument when speed <= 0 or there are more than
/// n_max crowds.
Route route_crowds(const std::vector<CrowdNode>& crowds, const Vec2& robot_pos,
                   const SimClock& clock, double speed,
                   const RouteParams& params = {});

// --------------------------------------------------------------------- path

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Path {
  std::vector<Vec2> waypoints;
  double raw_length = 0.0;  // grid path before smoothing, meters

  double length() const;
};

/// 8-connected A* without corner cutting, then line-of-sight shortcutting.
/// Throws UnreachableError when start or goal is blocked or disconnected.
Path plan_path(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal);

// ----------------------------------------------------------------- advisory

struct AdvisoryEvent {
  std::uint64_t tick = 0;
  int crowd_id = 0;
  double distance = 0.0;
  int message_id = 0;
};

struct AdvisoryParams {
  double trigger = 5.0;
  double hysteresis = 1.0;
};

/// Fires once per approach: an advisory stays active until the crowd is gone
/// or farther than trigger + hysteresis.
class AdvisoryTracker {
 public:
  explicit AdvisoryTracker(AdvisoryParams params = {}) : params_(params) {}

  std::vector<AdvisoryEvent> check(const Vec2& robot,
                                   const std::vector<social::CrowdGraph>& crowds,
                                   const SimClock& clock);
  /// Same rule on precomputed (crowd id, distance) pairs, in the given order.
  std::vector<AdvisoryEvent> check(
      const std::vector<std::pair<int, double>>& distances, std::uint64_t tick);

  const std::set<int>& active() const { return active_; }

 private:
  AdvisoryParams params_;
  std::set<int> active_;
  int next_message_ = 0;
};

}  // namespace distbot::planner
