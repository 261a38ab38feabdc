// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "distbot/engine.hpp"
#include "distbot/frvo.hpp"
#include "distbot/planner.hpp"
#include "distbot/scenario.hpp"
#include "distbot/socialgraph.hpp"
#include "distbot/tracker.hpp"
#include "oracles.hpp"

using namespace distbot;
using namespace distbot::engine;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Scenario scenario(const std::string& name) {
  return load_scenario_file(std::string(DISTBOT_SCENARIO_DIR) + "/" + name + ".json");
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Six wandering pedestrians and a following robot in a 4 m arena.
Outcome collision_experiment() {
  const auto base = scenario("arena_follow");
  const auto t0 = std::chrono::steady_clock::now();
  int clean = 0, overlaps = 0, collisions = 0;
  double travelled = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = base;
    s.seed = seed;
    const auto m = run(s, nullptr);
    clean += m.overlap_ticks == 0;
    overlaps += m.overlap_ticks;
    collisions += m.collisions;
    travelled += m.distance_traveled;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream d;
  d << clean << "/20 seeds overlap-free, " << collisions << " collisions, "
    << fmt("%.2f", overlaps / 20.0) << " mean overlap ticks, robot travelled "
    << fmt("%.0f", travelled / 20.0) << " m/seed, " << fmt("%.1f", secs) << " s";
  return {clean >= 19 && overlaps == 0, d.str()};
}

// 2. Hungarian totals against permutation enumeration. Weights are multiples
// of 1/1024, so every partial sum is exact and equality is exact.
Outcome hungarian_optimality() {
  Rng rng(2);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int r = rng.uniform_int(1, 7), c = rng.uniform_int(1, 7);
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        m(i, j) = rng.bernoulli(0.3) ? 0.0 : rng.uniform_int(1, 1024) / 1024.0;
    double got = 0;
    std::set<int> rows, cols;
    bool injective = true;
    for (auto [i, j] : tracker::hungarian_assign(m, 0.0)) {
      got += m(i, j);
      injective &= rows.insert(i).second && cols.insert(j).second;
    }
    bad += !injective || got != oracle::brute_force_max(m);
  }
  return {bad == 0, std::to_string(1000 - bad) + "/1000 matrices optimal"};
}

// 3. Routing cost against exhaustive ordered-subset enumeration.
Outcome routing_optimality() {
  Rng rng(3);
  int bad = 0, late = 0;
  const planner::RouteParams params;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(0, 6);
    const SimClock clock{static_cast<std::uint64_t>(rng.uniform_int(0, 500))};
    std::vector<planner::CrowdNode> crowds;
    for (int i = 0; i < n; ++i) {
      crowds.push_back({i, {rng.uniform(-15, 15), rng.uniform(-15, 15)}, rng.uniform_int(2, 6),
                        clock.tick + static_cast<std::uint64_t>(rng.uniform_int(50, 500))});
    }
    const Vec2 start(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double speed = rng.uniform(0.5, 1.5);
    const auto route = planner::route_crowds(crowds, start, clock, speed, params);
    bad += route.cost != oracle::exhaustive_route_cost(crowds, start, clock.tick, speed,
                                                       clock.dt, params.lambda);
    Vec2 at = start;
    double travelled = 0;
    for (int k : route.order) {
      travelled += (crowds[k].location - at).norm();
      at = crowds[k].location;
      late += clock.tick + travelled / (speed * clock.dt) > crowds[k].deadline + 1e-9;
    }
  }
  return {bad == 0 && late == 0, std::to_string(200 - bad) + "/200 routes optimal, " +
                                     std::to_string(late) + " late visits"};
}

// 4. Crowds against union-find over raw pairwise distances.
Outcome crowd_equivalence() {
  Rng rng(4);
  const social::Thresholds t;
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<social::SocialNode> nodes;
    const int n = rng.uniform_int(0, 30);
    const double extent = rng.uniform(3, 20);
    for (int i = 0; i < n; ++i) {
      nodes.push_back({i * 7 + 2, {rng.uniform(0, extent), rng.uniform(0, extent)}});
    }
    int next_id = 0;
    const auto crowds =
        social::extract_crowds(social::graph_from_nodes(nodes, t), SimClock{}, 300, {}, next_id);
    std::set<std::vector<int>> got;
    for (const auto& c : crowds) got.insert(c.member_ids);
    bad += got != oracle::union_find_crowds(nodes, t);
  }
  return {bad == 0, std::to_string(100 - bad) + "/100 layouts match"};
}

// 5. Identity switches on the crossing lanes.
Outcome tracking_integrity() {
  auto clean = scenario("crossing_noiseless");
  clean.duration = 1000;
  const auto quiet = run(clean, nullptr);

  auto noisy = scenario("crossing");
  noisy.duration = 1000;
  int switches = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    noisy.seed = seed;
    switches += run(noisy, nullptr).id_switches;
  }
  const double rate = switches / 10.0;  // per 1000 ticks
  std::ostringstream d;
  d << "noiseless " << quiet.id_switches << " switches, noisy " << fmt("%.1f", rate)
    << " per 1000 ticks";
  return {quiet.id_switches == 0 && rate <= 2.0, d.str()};
}

std::vector<json> replay_records(const Scenario& s) {
  std::ostringstream out;
  run(s, &out);
  std::vector<json> recs;
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) recs.push_back(json::parse(line));
  return recs;
}

// 6. Logged advisories against the threshold rule rerun on logged distances.
Outcome advisory_threshold() {
  int runs = 0, bad = 0, events = 0;
  auto check = [&](Scenario s) {
    const double trigger = s.advisory.trigger, release = trigger + s.advisory.hysteresis;
    std::set<std::pair<std::uint64_t, int>> logged, derived;
    std::set<int> active;
    for (const auto& r : replay_records(s)) {
      const auto tick = r["tick"].get<std::uint64_t>();
      for (const auto& a : r["advisories"]) logged.emplace(tick, a["crowd"].get<int>());
      std::map<int, double> d;
      for (const auto& c : r["crowds"]) d[c["id"]] = c["distance"];
      std::set<int> keep;
      for (int id : active) {
        if (d.count(id) && d[id] <= release) keep.insert(id);
      }
      active = keep;
      for (const auto& [id, dist] : d) {
        if (dist < trigger && active.insert(id).second) derived.emplace(tick, id);
      }
    }
    ++runs;
    bad += logged != derived;
    events += static_cast<int>(logged.size());
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto a = scenario("static_crowd");
    a.seed = seed;
    check(a);
    auto b = scenario("patrol_corridor");
    b.seed = seed;
    check(b);
  }
  return {bad == 0 && events > 0, std::to_string(runs - bad) + "/" + std::to_string(runs) +
                                      " replays agree, " + std::to_string(events) + " advisories"};
}

// 7. Fraction of addressed pedestrians who comply, first advisory per seed.
Outcome compliance_fraction() {
  int advisories = 0, addressed = 0, complied = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto s = scenario("static_crowd");
    s.seed = seed;
    Engine e(s);
    while (!e.done()) {
      const auto r = e.step();
      if (r["advisories"].empty()) continue;
      const auto& a = r["advisories"][0];
      ++advisories;
      addressed += static_cast<int>(a["addressed"].size());
      complied += static_cast<int>(a["complied"].size());
      break;
    }
  }
  const double frac = addressed ? static_cast<double>(complied) / addressed : 0.0;
  std::ostringstream d;
  d << complied << "/" << addressed << " = " << fmt("%.3f", frac) << " over " << advisories
    << " advisories";
  return {advisories == 50 && std::abs(frac - 0.5) <= 0.07, d.str()};
}

// 8. Same seed, same bytes.
Outcome determinism() {
  int same = 0;
  const char* names[] = {"static_crowd", "patrol_corridor", "crossing", "arena_follow",
                         "empty_world"};
  for (const char* name : names) {
    auto s = scenario(name);
    s.duration = std::min<std::uint64_t>(s.duration, 1500);
    std::ostringstream a, b;
    run(s, &a);
    run(s, &b);
    same += a.str() == b.str();
  }
  return {same == 5, std::to_string(same) + "/5 scenarios byte-identical"};
}

// 9. Velocity selection properties on seeded configurations.
Outcome frvo_properties() {
  const frvo::Params params;
  int infeasible = 0, suboptimal = 0, unequivariant = 0, overlaps = 0, valid_pairs = 0;
  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto crowd = oracle::random_crowd(rng, 2 + trial % 5);
    const auto& self = crowd[0];
    const auto region =
        frvo::frvo_union(self, frvo::neighbor_set(self, crowd, params.range), params.horizon);
    const auto sel = frvo::select_best_velocity(self.v_pref, region, params.v_max, params);
    if (!sel.blocked) {
      infeasible += region.contains(sel.velocity) || sel.velocity.norm() > params.v_max + 1e-9;
      const double best = (sel.velocity - self.v_pref).norm();
      for (const auto& c :
           frvo::velocity_candidates(self.v_pref, region, params.v_max, params, {})) {
        if (c.norm() <= params.v_max && !region.contains(c) &&
            (c - self.v_pref).norm() < best - 1e-12) {
          ++suboptimal;
          break;
        }
      }
    }

    // Rotate the scene and the sampling grid together.
    const double phi = rng.uniform(-kPi, kPi);
    auto turned = crowd;
    for (auto& p : turned) {
      p.x = rotate<double>(p.x, phi);
      p.v = rotate<double>(p.v, phi);
      p.v_pref = rotate<double>(p.v_pref, phi);
      p.facing = normalize_angle(p.facing + phi);
    }
    const auto region2 = frvo::frvo_union(
        turned[0], frvo::neighbor_set(turned[0], turned, params.range), params.horizon);
    const auto sel2 =
        frvo::select_best_velocity(turned[0].v_pref, region2, params.v_max, params, {phi, 0.0});
    unequivariant += sel.blocked != sel2.blocked ||
                     (rotate<double>(sel.velocity, phi) - sel2.velocity).norm() > 1e-6;

    // Two agents crossing to random goals.
    std::vector<PedestrianState> pair;
    std::vector<Vec2> goals;
    while (pair.size() < 2) {
      const Vec2 start(rng.uniform(-4, 4), rng.uniform(-4, 4));
      const Vec2 goal(rng.uniform(-4, 4), rng.uniform(-4, 4));
      if (!pair.empty() && (pair[0].x - start).norm() < 0.8) continue;
      if (!goals.empty() && (goals[0] - goal).norm() < 0.8) continue;
      pair.push_back(oracle::pedestrian(static_cast<int>(pair.size()), start, {0, 0},
                                        angle_of(goal - start)));
      goals.push_back(goal);
    }
    const auto out = oracle::simulate_pair(pair, goals, rng.uniform(0.5, 1.5), 0.1, 200, params);
    if (out.valid) {
      ++valid_pairs;
      overlaps += out.overlap;
    }
  }
  std::ostringstream d;
  d << "1000 configurations: " << infeasible << " infeasible, " << suboptimal
    << " suboptimal, " << unequivariant << " not rotation-equivariant; " << overlaps
    << " overlaps in " << valid_pairs << " two-agent runs";
  return {infeasible == 0 && suboptimal == 0 && unequivariant == 0 && overlaps == 0 &&
              valid_pairs >= 900,
          d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"collision experiment", collision_experiment},
      {"hungarian optimality", hungarian_optimality},
      {"routing optimality", routing_optimality},
      {"crowd graph equivalence", crowd_equivalence},
      {"tracking integrity", tracking_integrity},
      {"advisory threshold", advisory_threshold},
      {"compliance fraction", compliance_fraction},
      {"determinism", determinism},
      {"frvo properties", frvo_properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu [%s] %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
