#include "distbot/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "distbot/frvo.hpp"
#include "distbot/replay.hpp"
#include "distbot/sensing.hpp"

namespace distbot::engine {

using nlohmann::json;

namespace {

constexpr double kGoalReached = 0.15;  // pedestrian goal tolerance, meters
constexpr int kWanderPatience = 30;     // ticks nearly still before a new wander goal

planner::OccupancyGrid inflate(const planner::OccupancyGrid& grid, double radius) {
  planner::OccupancyGrid out = grid;
  const int k = static_cast<int>(std::ceil(radius / grid.resolution()));
  const double r_cells = radius / grid.resolution();
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (grid.at({x, y}) != planner::Cell::occupied) continue;
      for (int dy = -k; dy <= k; ++dy) {
        for (int dx = -k; dx <= k; ++dx) {
          const planner::CellIndex c(x + dx, y + dy);
          if (grid.in_bounds(c) && std::hypot(dx, dy) <= r_cells) {
            out.set(c, planner::Cell::occupied);
          }
        }
      }
    }
  }
  return out;
}

Box map_box(const MapSpec& m, double inset) {
  return {m.origin + Vec2(inset, inset),
          m.origin + Vec2(m.width - inset, m.height - inset)};
}

Vec2 clamp_to(const Box& b, const Vec2& p) {
  return p.cwiseMax(b.min).cwiseMin(b.max);
}

// Corner ring used when the map has no junction graph.
std::vector<JunctionSpec> default_junctions(const MapSpec& m) {
  const double inset = std::min(2.0, 0.25 * std::min(m.width, m.height));
  const Box b = map_box(m, inset);
  const std::vector<Vec2> corners{
      b.min, {b.max.x(), b.min.y()}, b.max, {b.min.x(), b.max.y()}};
  std::vector<JunctionSpec> out;
  for (int i = 0; i < 4; ++i) {
    out.push_back({i, corners[i], {(i + 3) % 4, (i + 1) % 4}});
  }
  return out;
}

const char* status_name(tracker::TrackStatus s) {
  switch (s) {
    case tracker::TrackStatus::tentative: return "tentative";
    case tracker::TrackStatus::confirmed: return "confirmed";
    case tracker::TrackStatus::dead: return "dead";
  }
  return "?";
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::patrol: return "patrol";
    case Mode::approaching: return "approaching";
    case Mode::advising: return "advising";
    case Mode::follow: return "follow";
    case Mode::hold: return "hold";
  }
  return "?";
}

Engine::Engine(Scenario scenario)
    : s_(std::move(scenario)),
      clock_{0, s_.dt},
      world_rng_(Rng(s_.seed).fork("world")),
      sense_rng_(Rng(s_.seed).fork("sensing")),
      patrol_rng_(Rng(s_.seed).fork("patrol")),
      comply_rng_(Rng(s_.seed).fork("compliance")),
      robot_{s_.robot.start, normalize_angle(s_.robot.heading)},
      grid_(rasterize(s_.map)),
      planning_(inflate(grid_, s_.robot.radius)),
      policy_(localnav::make_policy(s_.policy, s_.localnav)),
      tracker_(s_.tracker, s_.rig, s_.noise, s_.frvo),
      advisory_(s_.advisory) {
  for (const auto& spec : s_.pedestrians) {
    Agent a;
    a.spec = spec;
    a.state.id = spec.id;
    a.state.x = spec.start;
    a.state.l = spec.l;
    a.state.w = spec.w;
    if (!spec.waypoints.empty()) a.state.facing = angle_of(spec.waypoints[0] - spec.start);
    agents_.push_back(a);
    identities_.emplace(spec.id, sensing::identity_feature(spec.id, s_.seed,
                                                           s_.noise.feature_dim));
  }

  const auto specs = s_.map.junctions.empty() ? default_junctions(s_.map) : s_.map.junctions;
  std::map<int, Vec2> where;
  for (const auto& j : specs) where[j.id] = j.position;
  for (const auto& j : specs) {
    std::vector<std::pair<int, Vec2>> nb;
    for (int n : j.neighbors) nb.emplace_back(n, where.at(n));
    junctions_.push_back(planner::make_junction(j.id, j.position, nb));
  }

  switch (s_.mission.kind) {
    case MissionKind::surveillance: mission_.mode = Mode::patrol; break;
    case MissionKind::follow: mission_.mode = Mode::follow; break;
    case MissionKind::hold: mission_.mode = Mode::hold; break;
  }
}

json Engine::header() const {
  return {{"format", kReplayFormat},
          {"version", kReplayVersion},
          {"scenario", to_json(s_)}};
}

void Engine::update_agent_goal(Agent& a) {
  const auto tick = clock_.tick;
  auto reached = [&](const Vec2& g) { return (g - a.state.x).norm() < kGoalReached; };

  if (a.complying) {
    if (a.dwell_until) {
      if (tick < *a.dwell_until) {
        a.goal.reset();
        return;
      }
      a.complying = false;
      a.dwell_until.reset();
    } else if (reached(a.dispersal)) {
      a.dwell_until = tick + s_.compliance.dwell_ticks;
      a.goal.reset();
      return;
    } else {
      a.goal = a.dispersal;
      return;
    }
  }

  const auto& spec = a.spec;
  if (spec.wander) {
    // A wanderer wedged in a standoff gives up and picks somewhere else.
    if (!a.goal || reached(*a.goal) || a.stalled >= kWanderPatience) {
      a.stalled = 0;
      const Box region = spec.wander_region ? *spec.wander_region : map_box(s_.map, 0.5);
      a.goal = Vec2(world_rng_.uniform(region.min.x(), region.max.x()),
                    world_rng_.uniform(region.min.y(), region.max.y()));
    }
    return;
  }
  if (spec.waypoints.empty()) {
    a.goal.reset();
    return;
  }
  if (a.waypoint < spec.waypoints.size() && reached(spec.waypoints[a.waypoint])) {
    ++a.waypoint;
    if (a.waypoint == spec.waypoints.size() && spec.loop) a.waypoint = 0;
  }
  if (a.waypoint < spec.waypoints.size()) {
    a.goal = spec.waypoints[a.waypoint];
  } else {
    a.goal.reset();
  }
}

void Engine::step_pedestrians() {
  const auto tick = clock_.tick;
  for (auto& a : agents_) {
    const bool live = tick >= a.spec.spawn_tick &&
                      (!a.spec.despawn_tick || tick < *a.spec.despawn_tick);
    if (live && !a.active) {
      a.state.x = a.spec.start;
      a.state.v = Vec2::Zero();
    }
    a.active = live;
  }

  std::vector<PedestrianState> all;
  for (auto& a : agents_) {
    if (!a.active) continue;
    update_agent_goal(a);
    a.state.v_pref = Vec2::Zero();
    if (a.goal) {
      const Vec2 d = *a.goal - a.state.x;
      const double dist = d.norm();
      const double speed = a.spec.speed;
      a.state.v_pref = dist > speed * s_.dt ? Vec2(d / dist * speed) : Vec2(d / s_.dt);
    }
    all.push_back(a.state);
  }
  // The robot is an agent that does not reciprocate.
  PedestrianState bot;
  bot.id = -1;
  bot.x = robot_.position;
  bot.v = command_.linear * unit_from_angle(robot_.heading);
  bot.v_pref = bot.v;
  bot.l = bot.w = 2.0 * (s_.robot.radius + s_.robot.personal_space) / std::sqrt(2.0);
  bot.facing = robot_.heading;
  bot.reciprocal = false;
  all.push_back(bot);

  std::size_t k = 0;
  std::vector<PedestrianState> next;
  next.reserve(all.size());
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    next.push_back(frvo::step_pedestrian(all[i], all, s_.dt, s_.frvo).state);
  }
  for (auto& a : agents_) {
    if (!a.active) continue;
    a.state = next[k++];
    const bool still = a.state.v.norm() < 0.1 * a.spec.speed;
    a.stalled = a.goal && still ? a.stalled + 1 : 0;
  }
}

std::vector<sensing::Detection> Engine::sense() {
  std::vector<PedestrianState> world;
  for (const auto& a : agents_) {
    if (a.active) world.push_back(a.state);
  }
  std::vector<sensing::Detection> dets;
  for (const auto& vis : sensing::visible_pedestrians(robot_, world, s_.rig,
                                                      s_.noise.occlusion_clearance)) {
    auto d = sensing::synth_detection(vis.pedestrian, vis.camera_id, robot_,
                                      identities_.at(vis.pedestrian.id), s_.rig,
                                      s_.noise, sense_rng_);
    if (!d) continue;
    const auto scan = sensing::simulate_range_scan(vis.pedestrian, robot_, world,
                                                   s_.rig, s_.noise, sense_rng_);
    if (!scan.points.empty()) {
      const auto est = sensing::ransac_range(scan, s_.noise.ransac_band);
      d->lidar_range = est.range;
      d->lidar_inliers = est.inliers;
    }
    dets.push_back(std::move(*d));
  }
  return dets;
}

bool Engine::plan_to(const Vec2& goal) {
  mission_.last_plan = clock_.tick;
  for (const auto* grid : {&planning_, &grid_}) {
    try {
      auto path = planner::plan_path(*grid, robot_.position, goal);
      mission_.path = std::move(path.waypoints);
      mission_.path_index = mission_.path.size() > 1 ? 1 : 0;
      replanned_ = true;
      return true;
    } catch (const planner::UnreachableError&) {
    }
  }
  return false;
}

void Engine::start_patrol() {
  mission_.mode = Mode::patrol;
  mission_.target = -1;
  mission_.route.clear();
  mission_.path.clear();
  mission_.path_index = 0;
  mission_.mode_since = clock_.tick;
  replanned_ = true;
  // Head for the nearest reachable junction.
  std::vector<std::pair<double, int>> order;
  for (std::size_t i = 0; i < junctions_.size(); ++i) {
    order.emplace_back((junctions_[i].position - robot_.position).norm(),
                       static_cast<int>(i));
  }
  std::sort(order.begin(), order.end());
  junction_target_ = -1;
  for (const auto& [d, i] : order) {
    if (plan_to(junctions_[i].position)) {
      junction_target_ = i;
      return;
    }
  }
  mission_.last_plan = clock_.tick;
}

void Engine::advance_patrol() {
  auto& j = junctions_[junction_target_];
  decay_counts(j);
  if (j.exits.empty()) {
    mission_.path.clear();
    return;
  }
  const int exit = planner::choose_exit(j, patrol_rng_);
  planner::record_departure(j, exit, clock_.tick);
  junction_last_ = junction_target_;
  exit_last_ = exit;
  const int next_id = j.neighbors[exit];
  for (std::size_t i = 0; i < junctions_.size(); ++i) {
    if (junctions_[i].id == next_id) junction_target_ = static_cast<int>(i);
  }
  if (!plan_to(junctions_[junction_target_].position)) mission_.path.clear();
}

void Engine::update_mission(const std::vector<planner::AdvisoryEvent>& events,
                            const std::map<int, double>& distances) {
  if (mission_.mode == Mode::follow || mission_.mode == Mode::hold) return;
  const auto tick = clock_.tick;
  auto find = [&](int id) -> const social::CrowdGraph* {
    for (const auto& c : crowds_) {
      if (c.crowd_id == id) return &c;
    }
    return nullptr;
  };
  auto enter = [&](Mode m, int target) {
    mission_.mode = m;
    mission_.target = target;
    mission_.mode_since = tick;
    if (m == Mode::advising) {
      mission_.path.clear();
      mission_.path_index = 0;
      mission_.route.clear();
    }
  };

  if (mission_.mode == Mode::approaching) {
    const auto* c = find(mission_.target);
    if (!c || tick > c->deadline) {
      start_patrol();
    } else if (advised_.count(c->crowd_id)) {
      enter(Mode::advising, c->crowd_id);
    } else if (tick - mission_.last_plan >= static_cast<std::uint64_t>(s_.mission.replan_ticks) &&
               !plan_to(c->centroid)) {
      start_patrol();
    }
  } else if (mission_.mode == Mode::advising) {
    if (!find(mission_.target) || tick - mission_.mode_since >= s_.mission.advise_timeout) {
      start_patrol();
    }
  }
  if (mission_.mode != Mode::patrol) return;

  // Already within advisory range when first seen.
  if (!events.empty()) {
    enter(Mode::advising, events.front().crowd_id);
    return;
  }

  std::vector<const social::CrowdGraph*> candidates;
  for (const auto& c : crowds_) {
    if (!advised_.count(c.crowd_id) && c.deadline >= tick) candidates.push_back(&c);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](auto* a, auto* b) {
    return distances.at(a->crowd_id) < distances.at(b->crowd_id);
  });
  if (candidates.size() > static_cast<std::size_t>(s_.routing.n_max)) {
    candidates.resize(s_.routing.n_max);
  }
  while (!candidates.empty()) {
    std::vector<planner::CrowdNode> nodes;
    for (const auto* c : candidates) {
      nodes.push_back({c->crowd_id, c->centroid, c->weight, c->deadline});
    }
    const auto route = planner::route_crowds(nodes, robot_.position, clock_,
                                             s_.robot.v_max, s_.routing);
    if (route.empty()) return;
    const auto* first = candidates[route.order.front()];
    if (plan_to(first->centroid)) {
      enter(Mode::approaching, first->crowd_id);
      mission_.route.clear();
      for (int i : route.order) mission_.route.push_back(nodes[i].crowd_id);
      return;
    }
    // Unreachable: drop it and route again.
    candidates.erase(candidates.begin() + route.order.front());
  }
}

std::optional<Vec2> Engine::navigation_goal() {
  const double tol = s_.mission.waypoint_tolerance;
  auto follow_path = [&]() -> std::optional<Vec2> {
    while (mission_.path_index < mission_.path.size() &&
           (mission_.path[mission_.path_index] - robot_.position).norm() < tol) {
      ++mission_.path_index;
    }
    if (mission_.path_index < mission_.path.size()) return mission_.path[mission_.path_index];
    return std::nullopt;
  };

  switch (mission_.mode) {
    case Mode::hold:
    case Mode::advising:
      return std::nullopt;
    case Mode::follow: {
      for (const auto& a : agents_) {
        if (a.spec.id != s_.mission.follow_target || !a.active) continue;
        const Vec2 away = robot_.position - a.state.x;
        const Vec2 dir = away.norm() > 1e-9 ? Vec2(away.normalized()) : Vec2(-a.state.facing_dir());
        return a.state.x + s_.mission.follow_distance * dir;
      }
      return std::nullopt;
    }
    case Mode::approaching: {
      for (const auto& c : crowds_) {
        if (c.crowd_id == mission_.target &&
            (c.centroid - robot_.position).norm() <= s_.mission.standoff) {
          return std::nullopt;
        }
      }
      return follow_path();
    }
    case Mode::patrol: {
      if (auto g = follow_path()) return g;
      if (junction_target_ >= 0 &&
          (junctions_[junction_target_].position - robot_.position).norm() < 2 * tol) {
        advance_patrol();
        return follow_path();
      }
      if (clock_.tick - mission_.last_plan >= static_cast<std::uint64_t>(s_.mission.replan_ticks)) {
        start_patrol();
        return follow_path();
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void Engine::drive(const std::optional<Vec2>& goal) {
  if (!goal) {
    command_ = {};
    return;
  }
  std::vector<PedestrianState> world;
  for (const auto& a : agents_) {
    if (a.active) world.push_back(a.state);
  }
  localnav::PolicyInput in;
  in.scan = localnav::world_to_scan(robot_, grid_, world, s_.localnav);
  in.goal = to_local(robot_, *goal);
  in.current_velocity = command_;
  command_ = policy_->step(in);
  robot_ = localnav::integrate(robot_, command_, s_.dt);
}

Engine::Advised Engine::comply(const planner::AdvisoryEvent& e,
                               const social::SocialGraph& graph) {
  Advised out{e, {}, {}};
  const social::CrowdGraph* crowd = nullptr;
  for (const auto& c : crowds_) {
    if (c.crowd_id == e.crowd_id) crowd = &c;
  }
  if (!crowd) return out;
  std::vector<Vec2> members;
  for (const auto& n : graph.nodes) {
    if (std::binary_search(crowd->member_ids.begin(), crowd->member_ids.end(), n.track_id)) {
      members.push_back(n.position);
    }
  }

  std::vector<Agent*> addressed;
  for (auto& a : agents_) {
    if (!a.active || a.complying) continue;
    for (const auto& m : members) {
      if ((a.state.x - m).norm() <= s_.compliance.address_radius) {
        addressed.push_back(&a);
        break;
      }
    }
  }
  std::sort(addressed.begin(), addressed.end(),
            [](const Agent* a, const Agent* b) { return a->spec.id < b->spec.id; });
  std::vector<Agent*> compliant;
  for (Agent* a : addressed) {
    out.addressed.push_back(a->spec.id);
    if (comply_rng_.bernoulli(s_.compliance.p_comply)) {
      out.complied.push_back(a->spec.id);
      compliant.push_back(a);
    }
  }
  if (compliant.empty()) return out;

  // Evenly spaced goals on a circle around the centroid, in the members'
  // current angular order, far enough apart that neighbours end up at least
  // d_yellow from each other.
  const Vec2 center = crowd->centroid;
  const std::size_t m = compliant.size();
  auto bearing = [&](const Agent* a) { return angle_of(a->state.x - center); };
  std::stable_sort(compliant.begin(), compliant.end(),
                   [&](const Agent* a, const Agent* b) { return bearing(a) < bearing(b); });
  double radius = s_.compliance.dispersal_distance;
  if (m >= 2) {
    radius = std::max(radius, 1.001 * s_.social.d_yellow / (2.0 * std::sin(kPi / m)));
  }
  const double base = bearing(compliant.front());
  const Box inside = map_box(s_.map, 0.5);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = base + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
    Agent& a = *compliant[k];
    a.complying = true;
    a.dwell_until.reset();
    a.dispersal = clamp_to(inside, center + radius * unit_from_angle(angle));
  }
  return out;
}

json Engine::step() {
  if (done()) throw std::logic_error("Engine::step past duration");
  replanned_ = false;
  if (clock_.tick == 0 && mission_.mode == Mode::patrol) start_patrol();

  // 1. pedestrians
  step_pedestrians();

  // 2. sense and track
  tracker_.step(sense(), robot_, s_.dt);

  // 3. social graph and crowds
  const auto graph = social::build_social_graph(tracker_.tracks(), robot_, s_.social);
  const auto previous = crowds_;
  crowds_ = social::extract_crowds(graph, clock_, s_.crowd_window, previous, next_crowd_id_);
  if (mission_.mode == Mode::patrol && junction_last_ >= 0) {
    for (const auto& c : crowds_) {
      const bool fresh = std::none_of(previous.begin(), previous.end(),
                                      [&](const auto& p) { return p.crowd_id == c.crowd_id; });
      if (fresh) planner::record_crowd(junctions_[junction_last_], exit_last_);
    }
  }

  // 4. advisories and mission
  std::vector<std::pair<int, double>> distance_list;
  std::map<int, double> distances;
  for (const auto& c : crowds_) {
    const double d = round9((c.centroid - robot_.position).norm());
    distance_list.emplace_back(c.crowd_id, d);
    distances[c.crowd_id] = d;
  }
  // Only a surveillance mission addresses crowds.
  const auto events = s_.mission.kind == MissionKind::surveillance
                          ? advisory_.check(distance_list, clock_.tick)
                          : std::vector<planner::AdvisoryEvent>{};
  for (const auto& e : events) advised_.insert(e.crowd_id);
  update_mission(events, distances);

  // 5. drive
  drive(navigation_goal());

  // 6. compliance
  std::vector<Advised> advised;
  for (const auto& e : events) advised.push_back(comply(e, graph));

  // Record.
  json rec;
  rec["tick"] = clock_.tick;
  json peds = json::array();
  for (const auto& a : agents_) {
    if (!a.active) continue;
    peds.push_back({{"id", a.spec.id},
                    {"x", vec_record(a.state.x)},
                    {"v", vec_record(a.state.v)},
                    {"facing", round9(a.state.facing)},
                    {"l", round9(a.state.l)},
                    {"w", round9(a.state.w)},
                    {"complying", a.complying}});
  }
  rec["pedestrians"] = std::move(peds);
  rec["robot"] = {{"x", vec_record(robot_.position)},
                  {"heading", round9(robot_.heading)},
                  {"cmd", {round9(command_.linear), round9(command_.angular)}},
                  {"blocked", command_.blocked}};
  json tracks = json::array();
  for (const auto& t : tracker_.tracks()) {
    tracks.push_back({{"id", t.track_id},
                      {"status", status_name(t.status)},
                      {"x", vec_record(t.state.x)},
                      {"range", round9(t.fused_range)},
                      {"truth", t.truth_id},
                      {"matched", t.misses == 0}});
  }
  rec["tracks"] = std::move(tracks);
  json crowds = json::array();
  for (const auto& c : crowds_) {
    crowds.push_back({{"id", c.crowd_id},
                      {"members", c.member_ids},
                      {"centroid", vec_record(c.centroid)},
                      {"weight", c.weight},
                      {"first_seen", c.first_seen},
                      {"deadline", c.deadline},
                      {"distance", distances.at(c.crowd_id)}});
  }
  rec["crowds"] = std::move(crowds);
  json mission = {{"mode", to_string(mission_.mode)},
                  {"target", mission_.target},
                  {"route", mission_.route}};
  if (replanned_) {
    json path = json::array();
    for (const auto& p : mission_.path) path.push_back(vec_record(p));
    mission["path"] = std::move(path);
  }
  rec["mission"] = std::move(mission);
  json adv = json::array();
  for (const auto& a : advised) {
    adv.push_back({{"crowd", a.event.crowd_id},
                   {"distance", a.event.distance},
                   {"message", a.event.message_id},
                   {"addressed", a.addressed},
                   {"complied", a.complied}});
  }
  rec["advisories"] = std::move(adv);

  clock_ = advance(clock_);
  return rec;
}

MetricsSummary run(const Scenario& scenario, std::ostream* log) {
  Engine engine(scenario);
  const json header = engine.header();
  if (log) write_line(*log, header);
  MetricsAccumulator metrics(header);
  while (!engine.done()) {
    const json rec = engine.step();
    metrics.add(rec);
    if (log) write_line(*log, rec);
  }
  return metrics.finish();
}

MetricsSummary run_to_file(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto m = run(scenario, &out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
  return m;
}

}  // namespace distbot::engine
