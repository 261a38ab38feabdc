#include <gtest/gtest.h>

#include <string>

#include "distbot/scenario.hpp"

using namespace distbot;
using namespace distbot::engine;
using nlohmann::json;

namespace {

// Runs `f` and returns the ScenarioError it throws; fails the test otherwise.
template <class F>
ScenarioError expect_error(F&& f) {
  try {
    f();
  } catch (const ScenarioError& e) {
    return e;
  }
  ADD_FAILURE() << "no ScenarioError thrown";
  return ScenarioError("", "");
}

std::string with(json patch) {
  json doc = {{"seed", 7}};
  doc.merge_patch(patch);
  return doc.dump();
}

}  // namespace

TEST(LoadScenario, MinimalDocumentFillsDefaults) {
  const Scenario s = load_scenario(R"({"seed": 3})");
  EXPECT_EQ(s.seed, 3u);
  EXPECT_EQ(s.name, "unnamed");
  EXPECT_EQ(s.duration, 600u);
  EXPECT_DOUBLE_EQ(s.dt, 0.1);
  EXPECT_DOUBLE_EQ(s.map.width, 20.0);
  EXPECT_TRUE(s.pedestrians.empty());
  EXPECT_EQ(s.mission.kind, MissionKind::surveillance);
  EXPECT_EQ(s.policy, "reactive_vo");
  // Robot limits flow into the local navigator.
  EXPECT_DOUBLE_EQ(s.localnav.v_max, s.robot.v_max);
  EXPECT_DOUBLE_EQ(s.localnav.omega_max, s.robot.omega_max);
  EXPECT_DOUBLE_EQ(s.localnav.robot_radius, s.robot.radius);
  EXPECT_DOUBLE_EQ(s.localnav.dt, s.dt);
}

TEST(LoadScenario, SeedIsRequired) {
  const auto e = expect_error([] { load_scenario("{}"); });
  EXPECT_EQ(e.path(), "seed");
}

TEST(LoadScenario, UnknownKeysAreRejectedWithPath) {
  EXPECT_EQ(expect_error([] { load_scenario(with({{"sede", 1}})); }).path(), "sede");
  EXPECT_EQ(expect_error([] {
              load_scenario(with({{"robot", {{"speed", 1.0}}}}));
            }).path(),
            "robot.speed");
  const auto doc = with({{"pedestrians",
                          {{{"id", 0}, {"start", {1, 1}}},
                           {{"id", 1}, {"start", {2, 2}}, {"colour", "red"}}}}});
  EXPECT_EQ(expect_error([&] { load_scenario(doc); }).path(), "pedestrians[1].colour");
}

TEST(LoadScenario, TypeErrorsNameTheField) {
  EXPECT_EQ(expect_error([] { load_scenario(with({{"dt", "fast"}})); }).path(), "dt");
  EXPECT_EQ(expect_error([] {
              load_scenario(with({{"robot", {{"start", {1, 2, 3}}}}}));
            }).path(),
            "robot.start");
  EXPECT_EQ(expect_error([] { load_scenario(with({{"duration", -5}})); }).path(),
            "duration");
}

TEST(LoadScenario, ParseErrorReportsLineAndColumn) {
  const std::string text = "{\n  \"seed\": 1,\n  \"dt\": ,\n}";
  const auto e = expect_error([&] { load_scenario(text); });
  const std::string msg = e.what();
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 9"), std::string::npos) << msg;
}

TEST(LoadScenario, RoundTripIsAFixedPoint) {
  const std::string doc = with(
      {{"name", "rt"},
       {"map", {{"width", 15}, {"height", 9},
                {"obstacles", {{{"min", {2, 2}}, {"max", {3, 4}}}}},
                {"junctions", {{{"id", 4}, {"position", {1, 1}}, {"neighbors", {5}}},
                               {{"id", 5}, {"position", {8, 1}}, {"neighbors", {4}}}}}}},
       {"pedestrians",
        {{{"id", 2}, {"start", {5, 5}}, {"waypoints", {{6, 6}, {7, 5}}}, {"loop", false},
          {"despawn_tick", 90}},
         {{"id", 9}, {"start", {10, 5}}, {"wander", true},
          {"wander_region", {{"min", {9, 4}}, {"max", {12, 7}}}}, {"speed", 0.6}}}},
       {"mission", {{"kind", "follow"}, {"follow_target", 9}}},
       {"camera", {{"mount_yaws_deg", {10, 100, 190, 280}}}},
       {"noise", {{"p_miss", 0.0}}},
       {"localnav", {{"margin", 0.2}}}});
  const Scenario a = load_scenario(doc);
  const json once = to_json(a);
  const Scenario b = load_scenario(once.dump());
  EXPECT_EQ(to_json(b), once);
  EXPECT_EQ(b.pedestrians.at(1).wander_region->max, Vec2(12, 7));
  EXPECT_EQ(b.pedestrians.at(0).despawn_tick, 90u);
  EXPECT_EQ(b.map.junctions.at(0).neighbors, std::vector<int>{5});
  EXPECT_DOUBLE_EQ(b.rig.mount_yaws_deg[2], 190.0);
}

TEST(Validate, RejectsOutOfBoundsPedestrian) {
  const auto doc = with({{"map", {{"width", 10}, {"height", 10}}},
                         {"pedestrians", {{{"id", 0}, {"start", {1, 1}}},
                                          {{"id", 1}, {"start", {4, 11}}}}}});
  const auto e = expect_error([&] { load_scenario(doc); });
  EXPECT_EQ(e.path(), "pedestrians[1].start");
}

struct InvalidCase {
  const char* patch;
  const char* path;
};

class ValidateRejects : public ::testing::TestWithParam<InvalidCase> {};

TEST_P(ValidateRejects, NamesTheField) {
  const auto doc = with(json::parse(GetParam().patch));
  EXPECT_EQ(expect_error([&] { load_scenario(doc); }).path(), GetParam().path);
}

INSTANTIATE_TEST_SUITE_P(
    Cases, ValidateRejects,
    ::testing::Values(
        InvalidCase{R"({"dt": 0})", "dt"},
        InvalidCase{R"({"pedestrians": [{"id": 1, "start": [1,1]}, {"id": 1, "start": [2,2]}]})",
                    "pedestrians[1].id"},
        InvalidCase{R"({"pedestrians": [{"id": 1, "start": [1,1], "speed": 5}]})",
                    "pedestrians[0].speed"},
        InvalidCase{R"({"pedestrians": [{"id": 1, "start": [1,1], "wander": true,
                        "waypoints": [[2,2]]}]})",
                    "pedestrians[0].wander"},
        InvalidCase{R"({"pedestrians": [{"id": 1, "start": [1,1], "spawn_tick": 5,
                        "despawn_tick": 5}]})",
                    "pedestrians[0].despawn_tick"},
        InvalidCase{R"({"robot": {"start": [-1, 3]}})", "robot.start"},
        InvalidCase{R"({"mission": {"kind": "follow", "follow_target": 3}})",
                    "mission.follow_target"},
        InvalidCase{R"({"mission": {"kind": "dance"}})", "mission.kind"},
        InvalidCase{R"({"compliance": {"p_comply": 1.5}})", "compliance.p_comply"},
        InvalidCase{R"({"noise": {"outlier_rate": -0.1}})", "noise.outlier_rate"},
        InvalidCase{R"({"social": {"d_red": 3.0, "d_yellow": 2.0}})", "social.d_yellow"},
        InvalidCase{R"({"camera": {"fov_deg": 180}})", "camera.fov_deg"},
        InvalidCase{R"({"camera": {"mount_yaws_deg": [0, 90, 180]}})",
                    "camera.mount_yaws_deg"},
        InvalidCase{R"({"localnav": {"policy": "teleport"}})", "localnav.policy"},
        InvalidCase{R"({"map": {"junctions": [{"id": 0, "position": [1,1], "neighbors": [0]}]}})",
                    "map.junctions[0].neighbors[0]"},
        InvalidCase{R"({"map": {"junctions": [{"id": 0, "position": [1,1], "neighbors": [7]}]}})",
                    "map.junctions[0].neighbors[0]"},
        InvalidCase{R"({"map": {"obstacles": [{"min": [3,3], "max": [2,4]}]}})",
                    "map.obstacles[0]"}));

TEST(Validate, ZeroDurationIsAllowed) {
  EXPECT_EQ(load_scenario(with({{"duration", 0}})).duration, 0u);
}

TEST(Rasterize, BorderRingAndObstacleCells) {
  MapSpec m;
  m.width = 2.0;
  m.height = 1.0;
  m.resolution = 0.1;
  m.obstacles.push_back({Vec2(0.5, 0.5), Vec2(0.7, 0.7)});
  const auto g = rasterize(m);
  ASSERT_EQ(g.width(), 20);
  ASSERT_EQ(g.height(), 10);
  int occupied = 0;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const bool border = x == 0 || y == 0 || x == g.width() - 1 || y == g.height() - 1;
      const bool block = x >= 5 && x <= 6 && y >= 5 && y <= 6;
      const bool occ = g.at({x, y}) == planner::Cell::occupied;
      EXPECT_EQ(occ, border || block) << x << "," << y;
      occupied += occ;
    }
  }
  // Ring of a 20x10 grid plus the 2x2 block.
  EXPECT_EQ(occupied, 2 * 20 + 2 * 8 + 4);

  m.border_walls = false;
  m.obstacles.clear();
  const auto open = rasterize(m);
  for (int y = 0; y < open.height(); ++y) {
    for (int x = 0; x < open.width(); ++x) {
      EXPECT_EQ(open.at({x, y}), planner::Cell::free);
    }
  }
}
