#include "distbot/frvo.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace distbot::frvo {

namespace {

constexpr double kNudge = 1e-7;
constexpr double kFacingEps = 1e-6;

Vec2 left_normal(const Vec2& d) { return {-d.y(), d.x()}; }

}  // namespace

VelocityObstacle make_velocity_obstacle(const Vec2& rel_position,
                                        double combined_radius,
                                        const Vec2& apex, double scale,
                                        double horizon) {
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be > 0");
  VelocityObstacle vo;
  vo.apex = apex;
  vo.horizon = horizon;
  vo.rel_position = rel_position;
  vo.combined_radius = combined_radius;
  vo.scale = scale;

  const double dist = rel_position.norm();
  const Vec2 axis = dist > 0.0 ? Vec2(rel_position / dist) : Vec2::UnitX();
  if (dist <= combined_radius) {
    vo.degenerate = true;
    vo.left_dir = left_normal(axis);
    vo.right_dir = -vo.left_dir;
    if (dist == 0.0) vo.rel_position = axis * 1e-12;
    return vo;
  }
  const double half_angle = std::asin(combined_radius / dist);
  vo.left_dir = rotate<double>(axis, half_angle);
  vo.right_dir = rotate<double>(axis, -half_angle);
  return vo;
}

namespace {

bool truncated_cone_contains(const Vec2& u, const Vec2& p, double r,
                             double horizon, bool degenerate) {
  if (degenerate) {
    const double dist = p.norm();
    return u.dot(p / dist) > -(r - dist) / horizon;
  }
  const double uu = u.squaredNorm();
  if (uu == 0.0) return p.squaredNorm() < r * r;
  const double t = std::clamp(u.dot(p) / uu, 0.0, horizon);
  return (u * t - p).squaredNorm() < r * r;
}

}  // namespace

bool VelocityObstacle::contains(const Vec2& v) const {
  if (truncated_cone_contains(scale * (v - apex), rel_position,
                              combined_radius, horizon, degenerate)) {
    return true;
  }
  if (passing_side == 0) return false;
  // Side lock: only the open half-plane beyond the agreed boundary line.
  const Vec2& boundary = passing_side > 0 ? left_dir : right_dir;
  return cross2(boundary, Vec2(v - apex)) * passing_side <= 0.0;
}

Vec2 VelocityObstacle::cutoff_center() const {
  return apex + rel_position / (horizon * scale);
}

double VelocityObstacle::cutoff_radius() const {
  return combined_radius / (horizon * scale);
}

bool FrvoRegion::contains(const Vec2& v) const {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const VelocityObstacle& vo) { return vo.contains(v); });
}

NeighborSet neighbor_set(const PedestrianState& subject,
                         std::span<const PedestrianState> all, double range) {
  NeighborSet out;
  const Vec2 front = subject.facing_dir();
  for (const auto& other : all) {
    if (other.id == subject.id) continue;
    const Vec2 d = other.x - subject.x;
    if (d.norm() > range) continue;
    // Bodies that still reach past the subject's shoulder line count as
    // frontal, so a neighbour being passed is not dropped mid-manoeuvre.
    const double reach = subject.radius() + other.radius();
    if (d.dot(front) <= -reach && d.norm() - reach >= kNearField) continue;
    out.members.push_back(other);
  }
  return out;
}

VelocityObstacle compute_vo(const PedestrianState& subject,
                            const PedestrianState& other, double horizon) {
  const Vec2 rel = other.x - subject.x;
  const double radius = subject.radius() + other.radius();
  const bool shared =
      other.reciprocal && ((-rel).dot(other.facing_dir()) > -radius ||
                           rel.norm() - radius < kNearField);
  if (shared) {
    auto vo = make_velocity_obstacle(rel, radius, 0.5 * (subject.v + other.v),
                                     2.0, horizon);
    if (!vo.degenerate) {
      // Both agents evaluate the same cross product (negated twice), so they
      // agree on the side.
      const Vec2 u = subject.v - other.v;
      const bool engaged =
          truncated_cone_contains(u, rel, radius, horizon, false) ||
          rel.norm() - radius < kSideLockGap;
      if (engaged) vo.passing_side = cross2(rel, u) >= 0.0 ? 1 : -1;
    }
    return vo;
  }
  return make_velocity_obstacle(rel, radius, other.v, 1.0, horizon);
}

FrvoRegion frvo_union(const PedestrianState& subject,
                      const NeighborSet& neighbors, double horizon) {
  FrvoRegion region;
  region.obstacles.reserve(neighbors.members.size());
  for (const auto& other : neighbors.members) {
    region.obstacles.push_back(compute_vo(subject, other, horizon));
  }
  return region;
}

namespace {

// Unit directions of the polar grid, cached per (count, rotation).
const std::vector<Vec2>& grid_directions(int count, double rotation) {
  thread_local std::map<std::pair<int, double>, std::vector<Vec2>> cache;
  auto [it, fresh] = cache.try_emplace({count, rotation});
  if (fresh) {
    if (cache.size() > 64) {  // rotated grids are rare; keep the cache small
      cache.clear();
      it = cache.try_emplace({count, rotation}).first;
    }
    for (int i = 0; i < count; ++i) {
      it->second.push_back(unit_from_angle(rotation + 2.0 * kPi * i / count));
    }
  }
  return it->second;
}

}  // namespace

namespace {

// Feeds every candidate to `f` in evaluation order.
template <class F>
void visit_candidates(const Vec2& v_pref, const FrvoRegion& region, double v_max,
                      const Params& params, const SelectOptions& options, F&& f) {
  // Boundary projections come right after v_pref: they are usually close to
  // the optimum, which lets the selection skip most grid membership tests.
  f(v_pref);

  auto clip = [v_max](Vec2 c) -> Vec2 {
    const double n = c.norm();
    return n > v_max ? Vec2(c * (v_max / n)) : c;
  };

  for (const auto& vo : region.obstacles) {
    if (vo.degenerate) {
      const Vec2 axis = vo.rel_position.normalized();
      const double limit = vo.apex.dot(axis) -
                           (vo.combined_radius - vo.rel_position.norm()) /
                               (vo.horizon * vo.scale);
      const double excess = v_pref.dot(axis) - limit;
      f(clip(v_pref - (excess + kNudge) * axis));
      continue;
    }
    if (vo.passing_side != 0) {
      // Projection onto the full agreed boundary line (both directions).
      const Vec2& dir = vo.passing_side > 0 ? vo.left_dir : vo.right_dir;
      const Vec2 out_normal =
          vo.passing_side > 0 ? left_normal(dir) : Vec2(-left_normal(dir));
      const double s = (v_pref - vo.apex).dot(dir);
      f(clip(vo.apex + s * dir + kNudge * out_normal));
    }
    const Vec2 rel = v_pref - vo.apex;
    const double sl = std::max(0.0, rel.dot(vo.left_dir));
    f(clip(vo.apex + sl * vo.left_dir + kNudge * left_normal(vo.left_dir)));
    const double sr = std::max(0.0, rel.dot(vo.right_dir));
    f(clip(vo.apex + sr * vo.right_dir - kNudge * left_normal(vo.right_dir)));
    const Vec2 center = vo.cutoff_center();
    Vec2 radial = v_pref - center;
    radial = radial.norm() > 0.0 ? Vec2(radial.normalized())
                                 : Vec2(-vo.rel_position.normalized());
    f(clip(center + (vo.cutoff_radius() + kNudge) * radial));
  }

  f(Vec2::Zero());
  for (const Vec2& dir : grid_directions(params.directions, options.grid_rotation)) {
    for (int k = 1; k <= params.magnitudes; ++k) {
      f(Vec2(dir * (v_max * k / params.magnitudes)));
    }
  }
}

}  // namespace

std::vector<Vec2> velocity_candidates(const Vec2& v_pref,
                                      const FrvoRegion& region, double v_max,
                                      const Params& params,
                                      const SelectOptions& options) {
  std::vector<Vec2> out;
  out.reserve(2 + params.directions * params.magnitudes +
              4 * region.obstacles.size());
  visit_candidates(v_pref, region, v_max, params, options,
                   [&](const Vec2& c) { out.push_back(c); });
  return out;
}

Selection select_best_velocity(const Vec2& v_pref, const FrvoRegion& region,
                               double v_max, const Params& params,
                               const SelectOptions& options) {
  if (v_pref.norm() > v_max * (1.0 + 1e-9)) {
    throw std::invalid_argument("select_best_velocity: |v_pref| > v_max");
  }
  if (region.empty() && v_pref.norm() >= options.min_speed) {
    return {v_pref, false};
  }

  const double speed_cap = v_max * (1.0 + 1e-12);
  const double speed_floor = options.min_speed * (1.0 - 1e-12);

  Selection best{Vec2::Zero(), true};
  double best_cost = std::numeric_limits<double>::infinity();
  visit_candidates(v_pref, region, v_max, params, options, [&](const Vec2& c) {
    const double speed = c.norm();
    if (speed > speed_cap || speed < speed_floor) return;
    const double cost = (c - v_pref).norm();
    if (!(cost < best_cost - 1e-12)) return;
    if (region.contains(c)) return;
    best = {c, false};
    best_cost = cost;
  });
  return best;
}

StepResult step_pedestrian(const PedestrianState& p,
                           std::span<const PedestrianState> all, double dt,
                           const Params& params) {
  if (dt <= 0.0) throw std::invalid_argument("step_pedestrian: dt must be > 0");
  Vec2 pref = p.v_pref;
  if (pref.norm() > params.v_max) pref *= params.v_max / pref.norm();

  const auto neighbors = neighbor_set(p, all, params.range);
  const auto region = frvo_union(p, neighbors, params.horizon);
  const auto choice = select_best_velocity(pref, region, params.v_max, params);

  StepResult out{p, choice.blocked};
  out.state.v = choice.velocity;
  if (choice.blocked) return out;
  out.state.x = p.x + choice.velocity * dt;
  if (choice.velocity.norm() > kFacingEps) {
    out.state.facing = angle_of(choice.velocity);
  }
  return out;
}

}  // namespace distbot::frvo
