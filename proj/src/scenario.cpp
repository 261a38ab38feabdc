#include "distbot/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace distbot::engine {

using nlohmann::json;

namespace {

// Strict object reader: every key must be consumed, or finish() names the
// first stray one.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ScenarioError(path, msg);
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(at(key), "required field missing");
    return *v;
  }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    return v ? as_number(*v, at(key)) : def;
  }
  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(at(key), "expected a boolean");
    return v->get<bool>();
  }
  std::int64_t integer(const std::string& key, std::int64_t def) {
    const json* v = find(key);
    return v ? as_integer(*v, at(key)) : def;
  }
  std::uint64_t count(const std::string& key, std::uint64_t def) {
    const json* v = find(key);
    return v ? as_count(*v, at(key)) : def;
  }
  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) fail(at(key), "expected a string");
    return v->get<std::string>();
  }
  Vec2 vec2(const std::string& key, const Vec2& def) {
    const json* v = find(key);
    return v ? as_vec2(*v, at(key)) : def;
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }
  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }
  static std::uint64_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      fail(path, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  static Vec2 as_vec2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const json& array_field(Obj& o, const std::string& key, const json& empty) {
  const json* v = o.find(key);
  if (!v) return empty;
  if (!v->is_array()) Obj::fail(o.at(key), "expected an array");
  return *v;
}

std::string item(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

Box read_box(const json& j, const std::string& path) {
  Obj o(j, path);
  Box b;
  b.min = Obj::as_vec2(o.require("min"), o.at("min"));
  b.max = Obj::as_vec2(o.require("max"), o.at("max"));
  o.finish();
  return b;
}

json box_json(const Box& b) {
  return {{"min", {b.min.x(), b.min.y()}}, {"max", {b.max.x(), b.max.y()}}};
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

MissionKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "surveillance") return MissionKind::surveillance;
  if (s == "follow") return MissionKind::follow;
  if (s == "hold") return MissionKind::hold;
  Obj::fail(path, "unknown mission kind '" + s + "'");
}

void read_map(Obj& root, MapSpec& m) {
  const json* j = root.find("map");
  if (!j) return;
  Obj o(*j, "map");
  m.width = o.number("width", m.width);
  m.height = o.number("height", m.height);
  m.resolution = o.number("resolution", m.resolution);
  m.origin = o.vec2("origin", m.origin);
  m.border_walls = o.boolean("border_walls", m.border_walls);
  const json empty = json::array();
  const auto& obstacles = array_field(o, "obstacles", empty);
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    m.obstacles.push_back(read_box(obstacles[i], item("map.obstacles", i)));
  }
  const auto& junctions = array_field(o, "junctions", empty);
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    const std::string path = item("map.junctions", i);
    Obj jo(junctions[i], path);
    JunctionSpec js;
    js.id = static_cast<int>(Obj::as_integer(jo.require("id"), jo.at("id")));
    js.position = Obj::as_vec2(jo.require("position"), jo.at("position"));
    const auto& nb = array_field(jo, "neighbors", empty);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      js.neighbors.push_back(
          static_cast<int>(Obj::as_integer(nb[k], item(jo.at("neighbors"), k))));
    }
    jo.finish();
    m.junctions.push_back(js);
  }
  o.finish();
}

void read_pedestrians(Obj& root, std::vector<PedestrianSpec>& out) {
  const json empty = json::array();
  const auto& arr = array_field(root, "pedestrians", empty);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = item("pedestrians", i);
    Obj o(arr[i], path);
    PedestrianSpec p;
    p.id = static_cast<int>(Obj::as_integer(o.require("id"), o.at("id")));
    p.start = Obj::as_vec2(o.require("start"), o.at("start"));
    const auto& wps = array_field(o, "waypoints", empty);
    for (std::size_t k = 0; k < wps.size(); ++k) {
      p.waypoints.push_back(Obj::as_vec2(wps[k], item(o.at("waypoints"), k)));
    }
    p.loop = o.boolean("loop", p.loop);
    p.wander = o.boolean("wander", p.wander);
    if (const json* r = o.find("wander_region")) {
      p.wander_region = read_box(*r, o.at("wander_region"));
    }
    p.speed = o.number("speed", p.speed);
    p.l = o.number("l", p.l);
    p.w = o.number("w", p.w);
    p.spawn_tick = o.count("spawn_tick", p.spawn_tick);
    if (const json* d = o.find("despawn_tick")) {
      p.despawn_tick = Obj::as_count(*d, o.at("despawn_tick"));
    }
    o.finish();
    out.push_back(p);
  }
}

template <typename F>
void section(Obj& root, const std::string& key, F&& body) {
  const json* j = root.find(key);
  if (!j) return;
  Obj o(*j, key);
  body(o);
  o.finish();
}

int to_int(std::int64_t v) { return static_cast<int>(v); }

}  // namespace

const char* to_string(MissionKind k) {
  switch (k) {
    case MissionKind::surveillance: return "surveillance";
    case MissionKind::follow: return "follow";
    case MissionKind::hold: return "hold";
  }
  return "?";
}

Scenario load_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line/column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError("", "parse error at line " + std::to_string(line) +
                                ", column " + std::to_string(col) + ": " +
                                e.what());
  }

  Scenario s;
  Obj root(doc, "");
  s.name = root.string("name", "unnamed");
  s.seed = Obj::as_count(root.require("seed"), "seed");
  s.duration = root.count("duration", s.duration);
  s.dt = root.number("dt", s.dt);
  read_map(root, s.map);
  read_pedestrians(root, s.pedestrians);

  section(root, "robot", [&](Obj& o) {
    s.robot.start = o.vec2("start", s.robot.start);
    s.robot.heading = o.number("heading", s.robot.heading);
    s.robot.v_max = o.number("v_max", s.robot.v_max);
    s.robot.omega_max = o.number("omega_max", s.robot.omega_max);
    s.robot.radius = o.number("radius", s.robot.radius);
    s.robot.personal_space = o.number("personal_space", s.robot.personal_space);
  });
  section(root, "mission", [&](Obj& o) {
    s.mission.kind = parse_kind(o.string("kind", to_string(s.mission.kind)), o.at("kind"));
    s.mission.follow_target = to_int(o.integer("follow_target", s.mission.follow_target));
    s.mission.follow_distance = o.number("follow_distance", s.mission.follow_distance);
    s.mission.standoff = o.number("standoff", s.mission.standoff);
    s.mission.replan_ticks = to_int(o.integer("replan_ticks", s.mission.replan_ticks));
    s.mission.advise_timeout = o.count("advise_timeout", s.mission.advise_timeout);
    s.mission.waypoint_tolerance =
        o.number("waypoint_tolerance", s.mission.waypoint_tolerance);
  });
  section(root, "compliance", [&](Obj& o) {
    auto& c = s.compliance;
    c.p_comply = o.number("p_comply", c.p_comply);
    c.dispersal_distance = o.number("dispersal_distance", c.dispersal_distance);
    c.dwell_ticks = o.count("dwell_ticks", c.dwell_ticks);
    c.address_radius = o.number("address_radius", c.address_radius);
  });
  section(root, "camera", [&](Obj& o) {
    auto& r = s.rig;
    r.fov_deg = o.number("fov_deg", r.fov_deg);
    if (const json* m = o.find("mount_yaws_deg")) {
      if (!m->is_array() || m->size() != 4) {
        Obj::fail(o.at("mount_yaws_deg"), "expected 4 angles");
      }
      for (std::size_t i = 0; i < 4; ++i) {
        r.mount_yaws_deg[i] = Obj::as_number((*m)[i], item(o.at("mount_yaws_deg"), i));
      }
    }
    r.max_range = o.number("max_range", r.max_range);
    r.camera_height = o.number("camera_height", r.camera_height);
    r.person_height = o.number("person_height", r.person_height);
  });
  section(root, "noise", [&](Obj& o) {
    auto& n = s.noise;
    n.sigma_px = o.number("sigma_px", n.sigma_px);
    n.sigma_size = o.number("sigma_size", n.sigma_size);
    n.sigma_f = o.number("sigma_f", n.sigma_f);
    n.p_miss = o.number("p_miss", n.p_miss);
    n.sigma_r = o.number("sigma_r", n.sigma_r);
    n.outlier_rate = o.number("outlier_rate", n.outlier_rate);
    n.returns = to_int(o.integer("returns", n.returns));
    n.ransac_band = o.number("ransac_band", n.ransac_band);
    n.min_inliers = to_int(o.integer("min_inliers", n.min_inliers));
    n.max_disagreement = o.number("max_disagreement", n.max_disagreement);
    n.occlusion_clearance = o.number("occlusion_clearance", n.occlusion_clearance);
    n.feature_dim = to_int(o.integer("feature_dim", n.feature_dim));
  });
  section(root, "tracker", [&](Obj& o) {
    auto& t = s.tracker;
    t.gate = o.number("gate", t.gate);
    t.min_iou = o.number("min_iou", t.min_iou);
    t.max_misses = to_int(o.integer("max_misses", t.max_misses));
    t.n_confirm = to_int(o.integer("n_confirm", t.n_confirm));
    t.feature_beta = o.number("feature_beta", t.feature_beta);
    t.box_alpha = o.number("box_alpha", t.box_alpha);
    t.velocity_gain = o.number("velocity_gain", t.velocity_gain);
  });
  section(root, "social", [&](Obj& o) {
    s.social.d_red = o.number("d_red", s.social.d_red);
    s.social.d_yellow = o.number("d_yellow", s.social.d_yellow);
    s.social.edge_max = o.number("edge_max", s.social.edge_max);
    s.crowd_window = o.count("window", s.crowd_window);
  });
  section(root, "routing", [&](Obj& o) {
    s.routing.lambda = o.number("lambda", s.routing.lambda);
    s.routing.n_max = to_int(o.integer("n_max", s.routing.n_max));
  });
  section(root, "advisory", [&](Obj& o) {
    s.advisory.trigger = o.number("trigger", s.advisory.trigger);
    s.advisory.hysteresis = o.number("hysteresis", s.advisory.hysteresis);
  });
  section(root, "localnav", [&](Obj& o) {
    auto& l = s.localnav;
    s.policy = o.string("policy", s.policy);
    l.beams = to_int(o.integer("beams", l.beams));
    l.max_range = o.number("max_range", l.max_range);
    l.margin = o.number("margin", l.margin);
    l.horizon = o.number("horizon", l.horizon);
    l.cluster_jump = o.number("cluster_jump", l.cluster_jump);
    l.point_spacing = o.number("point_spacing", l.point_spacing);
    l.heading_gain = o.number("heading_gain", l.heading_gain);
    l.slow_radius = o.number("slow_radius", l.slow_radius);
    l.goal_tolerance = o.number("goal_tolerance", l.goal_tolerance);
  });
  section(root, "frvo", [&](Obj& o) {
    auto& f = s.frvo;
    f.range = o.number("range", f.range);
    f.horizon = o.number("horizon", f.horizon);
    f.v_max = o.number("v_max", f.v_max);
    f.directions = to_int(o.integer("directions", f.directions));
    f.magnitudes = to_int(o.integer("magnitudes", f.magnitudes));
  });
  root.finish();

  // The robot section is the single source for these.
  s.localnav.v_max = s.robot.v_max;
  s.localnav.omega_max = s.robot.omega_max;
  s.localnav.robot_radius = s.robot.radius;
  s.localnav.dt = s.dt;

  validate(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["duration"] = s.duration;
  j["dt"] = s.dt;

  json map;
  map["width"] = s.map.width;
  map["height"] = s.map.height;
  map["resolution"] = s.map.resolution;
  map["origin"] = vec_json(s.map.origin);
  map["border_walls"] = s.map.border_walls;
  map["obstacles"] = json::array();
  for (const auto& b : s.map.obstacles) map["obstacles"].push_back(box_json(b));
  map["junctions"] = json::array();
  for (const auto& jn : s.map.junctions) {
    map["junctions"].push_back(
        {{"id", jn.id}, {"position", vec_json(jn.position)}, {"neighbors", jn.neighbors}});
  }
  j["map"] = map;

  j["pedestrians"] = json::array();
  for (const auto& p : s.pedestrians) {
    json pj;
    pj["id"] = p.id;
    pj["start"] = vec_json(p.start);
    pj["waypoints"] = json::array();
    for (const auto& w : p.waypoints) pj["waypoints"].push_back(vec_json(w));
    pj["loop"] = p.loop;
    pj["wander"] = p.wander;
    if (p.wander_region) pj["wander_region"] = box_json(*p.wander_region);
    pj["speed"] = p.speed;
    pj["l"] = p.l;
    pj["w"] = p.w;
    pj["spawn_tick"] = p.spawn_tick;
    if (p.despawn_tick) pj["despawn_tick"] = *p.despawn_tick;
    j["pedestrians"].push_back(pj);
  }

  j["robot"] = {{"start", vec_json(s.robot.start)},
                {"heading", s.robot.heading},
                {"v_max", s.robot.v_max},
                {"omega_max", s.robot.omega_max},
                {"radius", s.robot.radius},
                {"personal_space", s.robot.personal_space}};
  j["mission"] = {{"kind", to_string(s.mission.kind)},
                  {"follow_target", s.mission.follow_target},
                  {"follow_distance", s.mission.follow_distance},
                  {"standoff", s.mission.standoff},
                  {"replan_ticks", s.mission.replan_ticks},
                  {"advise_timeout", s.mission.advise_timeout},
                  {"waypoint_tolerance", s.mission.waypoint_tolerance}};
  j["compliance"] = {{"p_comply", s.compliance.p_comply},
                     {"dispersal_distance", s.compliance.dispersal_distance},
                     {"dwell_ticks", s.compliance.dwell_ticks},
                     {"address_radius", s.compliance.address_radius}};
  j["camera"] = {{"fov_deg", s.rig.fov_deg},
                 {"mount_yaws_deg", s.rig.mount_yaws_deg},
                 {"max_range", s.rig.max_range},
                 {"camera_height", s.rig.camera_height},
                 {"person_height", s.rig.person_height}};
  const auto& n = s.noise;
  j["noise"] = {{"sigma_px", n.sigma_px},
                {"sigma_size", n.sigma_size},
                {"sigma_f", n.sigma_f},
                {"p_miss", n.p_miss},
                {"sigma_r", n.sigma_r},
                {"outlier_rate", n.outlier_rate},
                {"returns", n.returns},
                {"ransac_band", n.ransac_band},
                {"min_inliers", n.min_inliers},
                {"max_disagreement", n.max_disagreement},
                {"occlusion_clearance", n.occlusion_clearance},
                {"feature_dim", n.feature_dim}};
  const auto& t = s.tracker;
  j["tracker"] = {{"gate", t.gate},
                  {"min_iou", t.min_iou},
                  {"max_misses", t.max_misses},
                  {"n_confirm", t.n_confirm},
                  {"feature_beta", t.feature_beta},
                  {"box_alpha", t.box_alpha},
                  {"velocity_gain", t.velocity_gain}};
  j["social"] = {{"d_red", s.social.d_red},
                 {"d_yellow", s.social.d_yellow},
                 {"edge_max", s.social.edge_max},
                 {"window", s.crowd_window}};
  j["routing"] = {{"lambda", s.routing.lambda}, {"n_max", s.routing.n_max}};
  j["advisory"] = {{"trigger", s.advisory.trigger},
                   {"hysteresis", s.advisory.hysteresis}};
  const auto& l = s.localnav;
  j["localnav"] = {{"policy", s.policy},
                   {"beams", l.beams},
                   {"max_range", l.max_range},
                   {"margin", l.margin},
                   {"horizon", l.horizon},
                   {"cluster_jump", l.cluster_jump},
                   {"point_spacing", l.point_spacing},
                   {"heading_gain", l.heading_gain},
                   {"slow_radius", l.slow_radius},
                   {"goal_tolerance", l.goal_tolerance}};
  j["frvo"] = {{"range", s.frvo.range},
               {"horizon", s.frvo.horizon},
               {"v_max", s.frvo.v_max},
               {"directions", s.frvo.directions},
               {"magnitudes", s.frvo.magnitudes}};
  return j;
}

namespace {

void check(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw ScenarioError(path, msg);
}

void positive(double v, const std::string& path) { check(v > 0.0, path, "must be > 0"); }
void non_negative(double v, const std::string& path) {
  check(v >= 0.0, path, "must be >= 0");
}
void probability(double v, const std::string& path) {
  check(v >= 0.0 && v <= 1.0, path, "must be in [0, 1]");
}

}  // namespace

void validate(const Scenario& s) {
  positive(s.dt, "dt");
  const auto& m = s.map;
  positive(m.width, "map.width");
  positive(m.height, "map.height");
  positive(m.resolution, "map.resolution");
  const Vec2 lo = m.origin, hi = m.origin + Vec2(m.width, m.height);
  auto inside = [&](const Vec2& p) {
    return p.x() >= lo.x() && p.y() >= lo.y() && p.x() <= hi.x() && p.y() <= hi.y();
  };
  auto in_map = [&](const Vec2& p, const std::string& path) {
    check(inside(p), path, "outside the map");
  };
  auto box_ok = [&](const Box& b, const std::string& path) {
    check(b.min.x() <= b.max.x() && b.min.y() <= b.max.y(), path, "min must be <= max");
    in_map(b.min, path + ".min");
    in_map(b.max, path + ".max");
  };

  for (std::size_t i = 0; i < m.obstacles.size(); ++i) {
    box_ok(m.obstacles[i], item("map.obstacles", i));
  }
  std::set<int> junction_ids;
  for (std::size_t i = 0; i < m.junctions.size(); ++i) {
    const std::string path = item("map.junctions", i);
    check(junction_ids.insert(m.junctions[i].id).second, path + ".id", "duplicate id");
    in_map(m.junctions[i].position, path + ".position");
  }
  for (std::size_t i = 0; i < m.junctions.size(); ++i) {
    const auto& jn = m.junctions[i];
    for (std::size_t k = 0; k < jn.neighbors.size(); ++k) {
      const std::string path = item(item("map.junctions", i) + ".neighbors", k);
      check(junction_ids.count(jn.neighbors[k]) > 0, path, "unknown junction id");
      check(jn.neighbors[k] != jn.id, path, "junction cannot neighbour itself");
    }
  }

  std::set<int> ped_ids;
  for (std::size_t i = 0; i < s.pedestrians.size(); ++i) {
    const auto& p = s.pedestrians[i];
    const std::string path = item("pedestrians", i);
    check(p.id >= 0, path + ".id", "must be >= 0");
    check(ped_ids.insert(p.id).second, path + ".id", "duplicate id");
    in_map(p.start, path + ".start");
    for (std::size_t k = 0; k < p.waypoints.size(); ++k) {
      in_map(p.waypoints[k], item(path + ".waypoints", k));
    }
    if (p.wander_region) box_ok(*p.wander_region, path + ".wander_region");
    check(!(p.wander && !p.waypoints.empty()), path + ".wander",
          "wander and waypoints are exclusive");
    positive(p.speed, path + ".speed");
    check(p.speed <= s.frvo.v_max, path + ".speed", "exceeds frvo.v_max");
    positive(p.l, path + ".l");
    positive(p.w, path + ".w");
    if (p.despawn_tick) {
      check(*p.despawn_tick > p.spawn_tick, path + ".despawn_tick",
            "must be after spawn_tick");
    }
  }

  in_map(s.robot.start, "robot.start");
  positive(s.robot.v_max, "robot.v_max");
  positive(s.robot.omega_max, "robot.omega_max");
  positive(s.robot.radius, "robot.radius");
  non_negative(s.robot.personal_space, "robot.personal_space");

  if (s.mission.kind == MissionKind::follow) {
    check(ped_ids.count(s.mission.follow_target) > 0, "mission.follow_target",
          "no pedestrian with this id");
  }
  positive(s.mission.follow_distance, "mission.follow_distance");
  non_negative(s.mission.standoff, "mission.standoff");
  check(s.mission.replan_ticks >= 1, "mission.replan_ticks", "must be >= 1");
  positive(s.mission.waypoint_tolerance, "mission.waypoint_tolerance");

  probability(s.compliance.p_comply, "compliance.p_comply");
  non_negative(s.compliance.dispersal_distance, "compliance.dispersal_distance");
  non_negative(s.compliance.address_radius, "compliance.address_radius");

  check(s.rig.fov_deg > 0.0 && s.rig.fov_deg < 180.0, "camera.fov_deg",
        "must be in (0, 180)");
  positive(s.rig.max_range, "camera.max_range");
  positive(s.rig.person_height, "camera.person_height");
  non_negative(s.rig.camera_height, "camera.camera_height");

  const auto& n = s.noise;
  non_negative(n.sigma_px, "noise.sigma_px");
  non_negative(n.sigma_size, "noise.sigma_size");
  non_negative(n.sigma_f, "noise.sigma_f");
  probability(n.p_miss, "noise.p_miss");
  non_negative(n.sigma_r, "noise.sigma_r");
  probability(n.outlier_rate, "noise.outlier_rate");
  check(n.returns >= 1, "noise.returns", "must be >= 1");
  positive(n.ransac_band, "noise.ransac_band");
  check(n.min_inliers >= 1, "noise.min_inliers", "must be >= 1");
  non_negative(n.max_disagreement, "noise.max_disagreement");
  non_negative(n.occlusion_clearance, "noise.occlusion_clearance");
  check(n.feature_dim >= 1, "noise.feature_dim", "must be >= 1");

  const auto& t = s.tracker;
  check(t.gate >= 0.0 && t.gate <= 2.0, "tracker.gate", "must be in [0, 2]");
  probability(t.min_iou, "tracker.min_iou");
  check(t.max_misses >= 0, "tracker.max_misses", "must be >= 0");
  check(t.n_confirm >= 1, "tracker.n_confirm", "must be >= 1");
  check(t.feature_beta >= 0.0 && t.feature_beta < 1.0, "tracker.feature_beta",
        "must be in [0, 1)");
  probability(t.box_alpha, "tracker.box_alpha");
  non_negative(t.velocity_gain, "tracker.velocity_gain");

  non_negative(s.social.d_red, "social.d_red");
  check(s.social.d_yellow >= s.social.d_red, "social.d_yellow", "must be >= d_red");
  check(s.social.edge_max >= s.social.d_yellow, "social.edge_max",
        "must be >= d_yellow");

  non_negative(s.routing.lambda, "routing.lambda");
  check(s.routing.n_max >= 1, "routing.n_max", "must be >= 1");
  positive(s.advisory.trigger, "advisory.trigger");
  non_negative(s.advisory.hysteresis, "advisory.hysteresis");

  const auto& l = s.localnav;
  check(l.beams >= 8, "localnav.beams", "must be >= 8");
  positive(l.max_range, "localnav.max_range");
  non_negative(l.margin, "localnav.margin");
  positive(l.horizon, "localnav.horizon");
  positive(l.cluster_jump, "localnav.cluster_jump");
  positive(l.point_spacing, "localnav.point_spacing");
  positive(l.heading_gain, "localnav.heading_gain");
  positive(l.slow_radius, "localnav.slow_radius");
  positive(l.goal_tolerance, "localnav.goal_tolerance");
  try {
    localnav::make_policy(s.policy, l);
  } catch (const std::invalid_argument&) {
    throw ScenarioError("localnav.policy", "unknown policy '" + s.policy + "'");
  }

  positive(s.frvo.range, "frvo.range");
  positive(s.frvo.horizon, "frvo.horizon");
  positive(s.frvo.v_max, "frvo.v_max");
  check(s.frvo.directions >= 4, "frvo.directions", "must be >= 4");
  check(s.frvo.magnitudes >= 1, "frvo.magnitudes", "must be >= 1");
}

planner::OccupancyGrid rasterize(const MapSpec& map) {
  const int w = static_cast<int>(std::ceil(map.width / map.resolution - 1e-9));
  const int h = static_cast<int>(std::ceil(map.height / map.resolution - 1e-9));
  planner::OccupancyGrid grid(w, h, map.resolution, map.origin, planner::Cell::free);
  if (map.border_walls) {
    for (int x = 0; x < w; ++x) {
      grid.set({x, 0}, planner::Cell::occupied);
      grid.set({x, h - 1}, planner::Cell::occupied);
    }
    for (int y = 0; y < h; ++y) {
      grid.set({0, y}, planner::Cell::occupied);
      grid.set({w - 1, y}, planner::Cell::occupied);
    }
  }
  // Shrink by a hair so a box edge on a cell boundary does not claim the
  // neighbouring cell.
  const Vec2 eps(1e-9, 1e-9);
  for (const auto& b : map.obstacles) {
    grid.fill_box(b.min + eps, b.max - eps, planner::Cell::occupied);
  }
  return grid;
}

}  // namespace distbot::engine
