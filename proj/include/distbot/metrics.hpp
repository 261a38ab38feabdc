#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "distbot/core.hpp"
#include "distbot/replay.hpp"

namespace distbot::engine {

struct MetricsSummary {
  std::uint64_t ticks = 0;
  int collisions = 0;        // robot-pedestrian overlap onsets
  int overlap_ticks = 0;     // (tick, pedestrian) pairs in overlap
  int id_switches = 0;       // a track's ground-truth label changes
  int fragmentations = 0;    // a pedestrian's covering track changes
  double crowd_precision = 1.0;
  double crowd_recall = 1.0;
  int advisories = 0;
  int addressed = 0;
  int complied = 0;
  int dissolved = 0;         // advised crowds that later vanished
  double mean_dissolution_time = 0.0;  // seconds
  double distance_traveled = 0.0;      // meters

  bool operator==(const MetricsSummary&) const = default;
};

nlohmann::json to_json(const MetricsSummary& m);

/// Streaming metrics over replay records. Reads nothing but the header and
/// the records, so the summary is a function of the log alone.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(const nlohmann::json& header);

  void add(const nlohmann::json& record);
  MetricsSummary finish() const;

 private:
  double robot_radius_;
  double d_yellow_;
  double max_range_;
  double dt_;
  Vec2 last_robot_;

  MetricsSummary m_;
  std::set<int> overlapping_;
  // (tick index, track id, truth id) for confirmed, matched tracks.
  std::vector<std::tuple<std::uint64_t, int, int>> labels_;
  std::uint64_t detected_ = 0, detected_hit_ = 0;
  std::uint64_t truth_ = 0, truth_hit_ = 0;
  std::map<int, std::uint64_t> advised_at_;  // crowd id -> advisory tick
  std::set<int> present_;
  double dissolution_sum_ = 0.0;
};

MetricsSummary compute_metrics(const ReplayLog& log);

/// Components of size >= 2 over pairs closer than `threshold`, as sorted id
/// lists.
std::vector<std::vector<int>> proximity_clusters(
    const std::vector<std::pair<int, Vec2>>& points, double threshold);

}  // namespace distbot::engine
