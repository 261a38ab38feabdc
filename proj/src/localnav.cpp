#include "distbot/localnav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace distbot::localnav {

namespace {

constexpr double kMinRange = 1e-3;

// Distance along the unit ray to the first occupied cell it enters, walking
// cells in order of crossing time.
double grid_hit(const planner::OccupancyGrid& grid, const Vec2& from,
                const Vec2& dir, double max_range) {
  const double res = grid.resolution();
  const Vec2 g0 = (from - grid.origin()) / res;
  planner::CellIndex c(static_cast<int>(std::floor(g0.x())),
                       static_cast<int>(std::floor(g0.y())));
  auto blocked = [&](const planner::CellIndex& k) {
    return grid.in_bounds(k) && grid.at(k) == planner::Cell::occupied;
  };
  if (blocked(c)) return kMinRange;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int sx = dir.x() > 0 ? 1 : (dir.x() < 0 ? -1 : 0);
  const int sy = dir.y() > 0 ? 1 : (dir.y() < 0 ? -1 : 0);
  // Crossing "times" are in meters along the ray.
  const double dx = sx ? res / std::abs(dir.x()) : kInf;
  const double dy = sy ? res / std::abs(dir.y()) : kInf;
  double tx = sx > 0 ? (c.x() + 1 - g0.x()) * dx
                     : (sx < 0 ? (g0.x() - c.x()) * dx : kInf);
  double ty = sy > 0 ? (c.y() + 1 - g0.y()) * dy
                     : (sy < 0 ? (g0.y() - c.y()) * dy : kInf);
  while (true) {
    const double t = std::min(tx, ty);
    if (t > max_range) return max_range;
    if (std::abs(tx - ty) < 1e-12) {
      const bool side = blocked({c.x() + sx, c.y()}) || blocked({c.x(), c.y() + sy});
      c += planner::CellIndex(sx, sy);
      tx += dx;
      ty += dy;
      if (side || blocked(c)) return std::max(t, kMinRange);
    } else if (tx < ty) {
      c.x() += sx;
      tx += dx;
      if (blocked(c)) return std::max(t, kMinRange);
    } else {
      c.y() += sy;
      ty += dy;
      if (blocked(c)) return std::max(t, kMinRange);
    }
  }
}

double disc_hit(const Vec2& from, const Vec2& dir, const Vec2& center, double r) {
  const Vec2 c = center - from;
  const double b = c.dot(dir);
  const double cc = c.squaredNorm() - r * r;
  if (cc <= 0.0) return kMinRange;  // inside the disc
  const double disc = b * b - cc;
  if (disc < 0.0 || b <= 0.0) return std::numeric_limits<double>::infinity();
  return b - std::sqrt(disc);
}

// Robot-frame unit vector of every beam, cached per beam count.
const std::vector<Vec2>& beam_directions(std::size_t n) {
  thread_local std::vector<Vec2> dirs;
  if (dirs.size() != n) {
    Scan2D probe;
    probe.ranges.resize(n);
    dirs.clear();
    for (std::size_t i = 0; i < n; ++i) dirs.push_back(unit_from_angle(probe.beam_angle(i)));
  }
  return dirs;
}

}  // namespace

Scan2D world_to_scan(const Pose2& robot, const planner::OccupancyGrid& grid,
                     std::span<const PedestrianState> pedestrians,
                     const Params& params) {
  Scan2D scan;
  scan.max_range = params.max_range;
  scan.ranges.resize(static_cast<std::size_t>(params.beams));
  std::vector<double> radii;
  radii.reserve(pedestrians.size());
  for (const auto& p : pedestrians) radii.push_back(p.radius());
  const auto& beams = beam_directions(scan.ranges.size());
  const double c = std::cos(robot.heading), sn = std::sin(robot.heading);
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const Vec2 dir(c * beams[i].x() - sn * beams[i].y(), sn * beams[i].x() + c * beams[i].y());
    double r = grid_hit(grid, robot.position, dir, params.max_range);
    for (std::size_t k = 0; k < pedestrians.size(); ++k) {
      r = std::min(r, disc_hit(robot.position, dir, pedestrians[k].x, radii[k]));
    }
    scan.ranges[i] = std::clamp(r, kMinRange, params.max_range);
  }
  return scan;
}

frvo::FrvoRegion scan_obstacles(const Scan2D& scan, const Params& params) {
  frvo::FrvoRegion region;
  const std::size_t n = scan.ranges.size();
  const double radius = params.robot_radius + params.margin;
  const double reach = radius + params.v_max * params.horizon;

  const auto& beams = beam_directions(n);
  auto hit = [&](std::size_t i) { return scan.ranges[i] < scan.max_range; };
  auto point = [&](std::size_t i) { return Vec2(scan.ranges[i] * beams[i]); };
  auto emit = [&](std::size_t i) {
    if (scan.ranges[i] > reach) return;
    region.obstacles.push_back(frvo::make_velocity_obstacle(
        point(i), radius, Vec2::Zero(), 1.0, params.horizon));
  };

  Vec2 last_kept = Vec2::Zero();
  bool in_arc = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!hit(i)) {
      in_arc = false;
      continue;
    }
    const bool arc_end = i + 1 == n || !hit(i + 1) ||
                         std::abs(scan.ranges[i + 1] - scan.ranges[i]) > params.cluster_jump;
    if (!in_arc || arc_end ||
        (point(i) - last_kept).norm() >= params.point_spacing) {
      emit(i);
      last_kept = point(i);
    }
    in_arc = !arc_end;
  }
  return region;
}

VelocityCommand ReactiveVoPolicy::step(const PolicyInput& input) const {
  const Params& p = params_;
  const double dist = input.goal.norm();
  if (!(dist > p.goal_tolerance)) return {};

  const double speed = std::min(p.v_max, p.v_max * dist / p.slow_radius);
  const Vec2 v_pref = input.goal / dist * speed;
  const auto region = scan_obstacles(input.scan, p);
  frvo::Params fp;
  fp.horizon = p.horizon;
  fp.v_max = p.v_max;

  const auto choice = frvo::select_best_velocity(v_pref, region, p.v_max, fp);
  if (choice.blocked) return {0.0, 0.0, true};

  // A stalled choice still needs a heading to turn toward.
  Vec2 aim = choice.velocity;
  if (aim.norm() < 0.05 * p.v_max) {
    frvo::SelectOptions probe;
    probe.min_speed = 0.3 * p.v_max;
    const auto alt = frvo::select_best_velocity(v_pref, region, p.v_max, fp, probe);
    aim = alt.blocked ? v_pref : alt.velocity;
  }

  const double theta = angle_of(aim);
  const double omega = std::clamp(p.heading_gain * theta, -p.omega_max, p.omega_max);
  const double after_turn = theta - omega * p.dt;
  double linear = std::clamp(choice.velocity.norm() * std::cos(after_turn),
                             -p.v_max, p.v_max);

  // The executed velocity lies along the new heading; back off until it is
  // admissible. Turning in place never moves the footprint.
  const Vec2 along = unit_from_angle(omega * p.dt);
  for (double scale : {1.0, 0.5, 0.25}) {
    if (!region.contains(scale * linear * along)) {
      return {scale * linear, omega, false};
    }
  }
  return {0.0, omega, false};
}

std::unique_ptr<Policy> make_policy(const std::string& name, const Params& params) {
  if (name == "reactive_vo") return std::make_unique<ReactiveVoPolicy>(params);
  throw std::invalid_argument("unknown policy: " + name);
}

VelocityCommand policy_step(const PolicyInput& input, const Params& params) {
  return ReactiveVoPolicy(params).step(input);
}

Pose2 integrate(const Pose2& pose, const VelocityCommand& cmd, double dt) {
  Pose2 out;
  out.heading = normalize_angle(pose.heading + cmd.angular * dt);
  out.position = pose.position + cmd.linear * dt * unit_from_angle(out.heading);
  return out;
}

bool goal_reached(const Pose2& robot, const Vec2& goal, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("goal_reached: tol must be > 0");
  return (robot.position - goal).norm() <= tol;
}

}  // namespace distbot::localnav
