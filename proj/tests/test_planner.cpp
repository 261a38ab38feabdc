#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "distbot/planner.hpp"
#include "oracles.hpp"

using namespace distbot;
using namespace distbot::planner;
using distbot::oracle::exhaustive_route_cost;

namespace {

OccupancyGrid free_grid(int w, int h, double res = 0.1, Vec2 origin = Vec2::Zero()) {
  return OccupancyGrid(w, h, res, origin, Cell::free);
}

// Plain Dijkstra over cell centres with the same move rules as the planner:
// 8-connected, diagonal only when both orthogonal cells are free.
double dijkstra_cells(const OccupancyGrid& g, CellIndex s, CellIndex t) {
  const int w = g.width(), h = g.height();
  std::vector<double> dist(static_cast<std::size_t>(w) * h,
                           std::numeric_limits<double>::infinity());
  using E = std::pair<double, int>;
  std::priority_queue<E, std::vector<E>, std::greater<>> pq;
  dist[s.y() * w + s.x()] = 0;
  pq.emplace(0.0, s.y() * w + s.x());
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    const int ux = u % w, uy = u / w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int vx = ux + dx, vy = uy + dy;
        if (vx < 0 || vy < 0 || vx >= w || vy >= h) continue;
        if (g.at({vx, vy}) != Cell::free) continue;
        if (dx && dy && (g.at({ux + dx, uy}) != Cell::free || g.at({ux, uy + dy}) != Cell::free))
          continue;
        const double nd = d + ((dx && dy) ? std::sqrt(2.0) : 1.0);
        if (nd < dist[vy * w + vx]) {
          dist[vy * w + vx] = nd;
          pq.emplace(nd, vy * w + vx);
        }
      }
  }
  return dist[t.y() * w + t.x()] * g.resolution();
}

social::CrowdGraph crowd_at(int id, Vec2 c) {
  social::CrowdGraph g;
  g.crowd_id = id;
  g.centroid = c;
  g.member_ids = {1, 2};
  g.weight = 2;
  return g;
}

}  // namespace

// ----------------------------------------------------------------- occupancy

TEST(Occupancy, GroundPointsFiltered) {
  ProjectionParams p;
  const auto g = project_occupancy({{2.0, 2.0, 0.1}, {3.0, 3.0, 0.2}}, p);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) EXPECT_NE(g.at({x, y}), Cell::occupied);
}

TEST(Occupancy, Binning) {
  ProjectionParams p;
  p.origin = {0.0, -0.05};
  const auto g = project_occupancy({{2.05, 0.0, 1.0}}, p);
  EXPECT_EQ(g.at({20, 0}), Cell::occupied);
  EXPECT_EQ(g.at({21, 0}), Cell::unknown);
}

TEST(Occupancy, EmptyInputAllUnknownAndBadResolution) {
  ProjectionParams p;
  const auto g = project_occupancy({}, p);
  EXPECT_EQ(g, OccupancyGrid(p.width, p.height, p.resolution, p.origin));
  p.resolution = 0.0;
  EXPECT_THROW(project_occupancy({}, p), std::invalid_argument);
}

TEST(Occupancy, AboveCeilingIgnored) {
  ProjectionParams p;
  const auto g = project_occupancy({{2.0, 2.0, 3.0}}, p);
  EXPECT_EQ(g.at({20, 20}), Cell::unknown);
}

TEST(Occupancy, SensorRaysClearFreeSpace) {
  ProjectionParams p;
  p.sensor_origin = Vec2(0.55, 0.55);
  const auto g = project_occupancy({{3.05, 0.55, 1.0}, {0.55, 3.05, 0.05}}, p);
  EXPECT_EQ(g.at({30, 5}), Cell::occupied);
  EXPECT_EQ(g.at({15, 5}), Cell::free);
  EXPECT_EQ(g.at({5, 30}), Cell::free);  // ground return still clears its ray
  EXPECT_EQ(g.at({50, 50}), Cell::unknown);
}

TEST(Occupancy, SupercoverMatchesDenseSampling) {
  const auto g = free_grid(40, 40, 0.25);
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vec2 a(rng.uniform(0, 10), rng.uniform(0, 10));
    const Vec2 b(rng.uniform(0, 10), rng.uniform(0, 10));
    const auto cells = supercover(g, a, b);
    for (int k = 0; k <= 2000; ++k) {
      const Vec2 p = a + (b - a) * (k / 2000.0);
      const CellIndex c = g.cell_of_unchecked(p);
      EXPECT_TRUE(std::find(cells.begin(), cells.end(), c) != cells.end());
    }
  }
}

// -------------------------------------------------------------------- patrol

TEST(Patrol, ZeroCountsPickLeastRecentlyVisited) {
  auto j = make_junction(0, {0, 0}, {{1, {1, 0}}, {2, {0, 1}}, {3, {-1, 0}}});
  Rng rng(1);
  record_departure(j, 0, 10);
  record_departure(j, 1, 5);
  record_departure(j, 2, 7);
  EXPECT_EQ(choose_exit(j, rng), 1);
  EXPECT_TRUE(patrol_direction(j, rng).isApprox(Vec2(0, 1)));
}

TEST(Patrol, ArgmaxCount) {
  auto j = make_junction(0, {0, 0}, {{1, {1, 0}}, {2, {0, 1}}, {3, {-1, 0}}});
  j.counts = {5, 0, 0};
  Rng rng(1);
  EXPECT_EQ(choose_exit(j, rng), 0);
  const auto p = exit_probabilities(j);
  EXPECT_NEAR(p[0], 6.0 / 8.0, 1e-12);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
}

TEST(Patrol, LearnsCrowdedExit) {
  auto j = make_junction(0, {0, 0}, {{1, {1, 0}}, {2, {0, 1}}, {3, {-1, 0}}});
  Rng rng(2);
  for (int visit = 0; visit < 10; ++visit) {
    const int e = choose_exit(j, rng);
    record_departure(j, e, static_cast<std::uint64_t>(visit));
    decay_counts(j);
    record_crowd(j, 1);  // crowds are only ever seen down exit B
  }
  // Direct computation: B holds sum_{k<10} 0.99^k, the others nothing.
  double b = 0;
  for (int k = 0; k < 10; ++k) b = b * 0.99 + 1.0;
  EXPECT_NEAR(j.counts[1], b, 1e-12);
  EXPECT_NEAR(exit_probabilities(j)[1], (b + 1) / (b + 3), 1e-12);
  EXPECT_EQ(choose_exit(j, rng), 1);
}

TEST(Patrol, NoExitsThrows) {
  Junction j;
  Rng rng(0);
  EXPECT_THROW(choose_exit(j, rng), std::invalid_argument);
}

TEST(Patrol, UnresolvedTieUsesRng) {
  auto j = make_junction(0, {0, 0}, {{1, {1, 0}}, {2, {0, 1}}});
  std::set<int> seen;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    seen.insert(choose_exit(j, rng));
  }
  EXPECT_EQ(seen.size(), 2u);
}

// ------------------------------------------------------------------- routing

TEST(Routing, NoCrowds) {
  const auto r = route_crowds({}, {0, 0}, SimClock{}, 1.0);
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.cost, 0.0);
}

TEST(Routing, SingleCrowdHandEvaluation) {
  const auto r = route_crowds({{7, {4, 0}, 3, 1000}}, {0, 0}, SimClock{}, 1.0);
  ASSERT_EQ(r.order, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(r.cost, 2.0 - 3.0 - 1.0);
  EXPECT_DOUBLE_EQ(r.arrival_tick[0], 40.0);
}

TEST(Routing, MissedDeadlineSkipped) {
  // 4 m at 1 m/s is 40 ticks; deadline 39 cannot be met.
  const auto r = route_crowds({{7, {4, 0}, 3, 39}}, {0, 0}, SimClock{}, 1.0);
  EXPECT_TRUE(r.empty());
}

TEST(Routing, NetPositiveVisitsDeclined) {
  // 20 m away: energy 10 exceeds weight 2 + 1.
  const auto r = route_crowds({{1, {20, 0}, 2, 100000}}, {0, 0}, SimClock{}, 1.0);
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.cost, 0.0);
}

TEST(Routing, RejectsBadInput) {
  EXPECT_THROW(route_crowds({}, {0, 0}, SimClock{}, 0.0), std::invalid_argument);
  std::vector<CrowdNode> many(11);
  EXPECT_THROW(route_crowds(many, {0, 0}, SimClock{}, 1.0), std::invalid_argument);
}

TEST(Routing, MatchesExhaustiveOracle) {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(0, 6);
    SimClock clock{static_cast<std::uint64_t>(rng.uniform_int(0, 500))};
    std::vector<CrowdNode> crowds;
    for (int i = 0; i < n; ++i) {
      crowds.push_back({i, {rng.uniform(-15, 15), rng.uniform(-15, 15)},
                        rng.uniform_int(2, 6),
                        clock.tick + static_cast<std::uint64_t>(rng.uniform_int(50, 500))});
    }
    const Vec2 start(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double speed = rng.uniform(0.5, 1.5);
    const auto r = route_crowds(crowds, start, clock, speed);
    EXPECT_EQ(r.cost, exhaustive_route_cost(crowds, start, clock.tick, speed, clock.dt, 0.5))
        << "trial " << trial;

    // Deadline soundness and cost identity.
    Vec2 at = start;
    double travelled = 0, energy = 0;
    int weight = 0;
    std::set<int> seen;
    for (std::size_t k = 0; k < r.order.size(); ++k) {
      const auto& c = crowds[r.order[k]];
      EXPECT_TRUE(seen.insert(r.order[k]).second);
      travelled += (c.location - at).norm();
      EXPECT_LE(clock.tick + travelled / (speed * clock.dt), c.deadline + 1e-9);
      energy += 0.5 * (c.location - at).norm();
      weight += c.weight;
      at = c.location;
    }
    EXPECT_NEAR(r.cost, energy - weight - static_cast<double>(r.order.size()), 1e-9);
  }
}

TEST(Routing, TenCrowdsFinishQuickly) {
  Rng rng(8);
  std::vector<CrowdNode> crowds;
  for (int i = 0; i < 10; ++i) {
    crowds.push_back({i, {rng.uniform(-10, 10), rng.uniform(-10, 10)}, rng.uniform_int(2, 8), 100000});
  }
  const auto r = route_crowds(crowds, {0, 0}, SimClock{}, 1.0);
  EXPECT_LT(r.cost, 0.0);
}

// ---------------------------------------------------------------------- path

TEST(Path, FreeSpaceIsStraight) {
  const auto g = free_grid(100, 40, 0.1, {-1, -2});
  const auto p = plan_path(g, {0, 0}, {5, 0});
  ASSERT_EQ(p.waypoints.size(), 2u);
  EXPECT_NEAR(p.length(), 5.0, 1e-12);
}

TEST(Path, WallWithGap) {
  auto g = free_grid(60, 60, 0.1);
  g.fill_box({3.0, 0.0}, {3.09, 5.99}, Cell::occupied);
  g.fill_box({3.0, 4.5}, {3.09, 4.79}, Cell::free);  // the gap
  const Vec2 s = g.center_of({10, 10}), t = g.center_of({50, 10});
  const auto p = plan_path(g, s, t);
  bool through_gap = false;
  for (std::size_t i = 1; i < p.waypoints.size(); ++i) {
    for (const auto& c : supercover(g, p.waypoints[i - 1], p.waypoints[i])) {
      if (c.x() == 30) {
        EXPECT_GE(c.y(), 45);
        EXPECT_LE(c.y(), 47);
        through_gap = true;
      }
    }
  }
  EXPECT_TRUE(through_gap);
  EXPECT_NEAR(p.raw_length, dijkstra_cells(g, {10, 10}, {50, 10}), 1e-9);
  EXPECT_LE(p.length(), p.raw_length + 1e-9);
}

TEST(Path, BlockedGoalUnreachable) {
  auto g = free_grid(50, 50);
  g.fill_box({2, 2}, {2.5, 2.5}, Cell::occupied);
  EXPECT_THROW(plan_path(g, {0.5, 0.5}, {2.2, 2.2}), UnreachableError);
  OccupancyGrid unknown(50, 50, 0.1, Vec2::Zero());
  EXPECT_THROW(plan_path(unknown, {0.5, 0.5}, {1.5, 1.5}), UnreachableError);
  // Enclosed goal.
  g.fill_box({3.5, 3.5}, {4.5, 3.59}, Cell::occupied);
  g.fill_box({3.5, 4.5}, {4.5, 4.59}, Cell::occupied);
  g.fill_box({3.5, 3.5}, {3.59, 4.5}, Cell::occupied);
  g.fill_box({4.5, 3.5}, {4.59, 4.5}, Cell::occupied);
  EXPECT_THROW(plan_path(g, {0.5, 0.5}, {4.05, 4.05}), UnreachableError);
}

TEST(Path, RandomGridsValidAndOptimalBeforeSmoothing) {
  Rng rng(12);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto g = free_grid(40, 40, 0.25);
    for (int k = 0; k < 25; ++k) {
      const Vec2 lo(rng.uniform(0, 9), rng.uniform(0, 9));
      g.fill_box(lo, lo + Vec2(rng.uniform(0.2, 2.5), rng.uniform(0.2, 2.5)), Cell::occupied);
    }
    const CellIndex sc(rng.uniform_int(0, 39), rng.uniform_int(0, 39));
    const CellIndex tc(rng.uniform_int(0, 39), rng.uniform_int(0, 39));
    if (!g.is_free(sc) || !g.is_free(tc)) continue;
    const double oracle = dijkstra_cells(g, sc, tc);
    if (!std::isfinite(oracle)) {
      EXPECT_THROW(plan_path(g, g.center_of(sc), g.center_of(tc)), UnreachableError);
      continue;
    }
    ++solved;
    const auto p = plan_path(g, g.center_of(sc), g.center_of(tc));
    EXPECT_NEAR(p.raw_length, oracle, 1e-9);
    EXPECT_LE(p.length(), p.raw_length + 1e-9);
    for (std::size_t i = 1; i < p.waypoints.size(); ++i) {
      const Vec2 a = p.waypoints[i - 1], b = p.waypoints[i];
      for (int k = 0; k <= 400; ++k) EXPECT_TRUE(g.is_free(Vec2(a + (b - a) * (k / 400.0))));
    }
  }
  EXPECT_GT(solved, 30);
}

// ------------------------------------------------------------------ advisory

TEST(Advisory, Threshold) {
  AdvisoryTracker adv;
  EXPECT_TRUE(adv.check({0, 0}, {crowd_at(1, {5.1, 0})}, SimClock{0}).empty());
  const auto ev = adv.check({0, 0}, {crowd_at(1, {4.9, 0})}, SimClock{1});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].crowd_id, 1);
  EXPECT_EQ(ev[0].tick, 1u);
  EXPECT_NEAR(ev[0].distance, 4.9, 1e-12);
}

TEST(Advisory, HysteresisTrace) {
  // Trace by hand: fires at 4.9, stays active at 5.3 (<= 6), no refire at 4.9,
  // stays at exactly 6.0, released at 6.1, fires again at 4.9.
  AdvisoryTracker adv;
  const std::vector<double> trace{4.9, 5.3, 4.9, 6.0, 4.0, 6.1, 4.9};
  const std::vector<int> expected{1, 0, 0, 0, 0, 0, 1};
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto ev = adv.check({0, 0}, {crowd_at(3, {0, trace[t]})}, SimClock{t});
    EXPECT_EQ(static_cast<int>(ev.size()), expected[t]) << "tick " << t;
  }
}

TEST(Advisory, DissolvedCrowdReleased) {
  AdvisoryTracker adv;
  EXPECT_EQ(adv.check({0, 0}, {crowd_at(1, {1, 0})}, SimClock{0}).size(), 1u);
  EXPECT_TRUE(adv.check({0, 0}, {}, SimClock{1}).empty());
  EXPECT_TRUE(adv.active().empty());
  const auto ev = adv.check({0, 0}, {crowd_at(1, {1, 0})}, SimClock{2});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].message_id, 1);
}
