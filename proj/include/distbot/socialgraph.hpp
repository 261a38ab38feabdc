#pragma once

#include <cstdint>
#include <vector>

#include "distbot/core.hpp"
#include "distbot/tracker.hpp"

namespace distbot::social {

enum class EdgeClass { safe, warning, dangerous };

const char* to_string(EdgeClass k);

struct Thresholds {
  double d_red = 1.0;
  double d_yellow = 2.0;
  double edge_max = 5.0;
};

struct SocialEdge {
  int a = 0;  // a < b
  int b = 0;
  double distance = 0.0;
  EdgeClass klass = EdgeClass::safe;
};

struct SocialNode {
  int track_id = 0;
  Vec2 position = Vec2::Zero();
};

struct SocialGraph {
  std::vector<SocialNode> nodes;
  std::vector<SocialEdge> edges;
};

struct CrowdGraph {
  int crowd_id = 0;
  std::vector<int> member_ids;  // sorted
  Vec2 centroid = Vec2::Zero();
  int weight = 0;
  std::uint64_t first_seen = 0;
  std::uint64_t deadline = 0;
};

/// Half-open bands: dangerous below d_red, warning below d_yellow.
/// Throws std::invalid_argument for negative or non-finite distances.
EdgeClass classify_edge(double distance, const Thresholds& t);

/// Edges between every pair of nodes at most edge_max apart.
SocialGraph graph_from_nodes(std::vector<SocialNode> nodes, const Thresholds& t);

/// Confirmed tracks only, placed at the robot pose plus (bearing, fused range).
SocialGraph build_social_graph(const std::vector<tracker::Track>& tracks,
                               const Pose2& robot, const Thresholds& t);

/// Connected components of size >= 2 over warning and dangerous edges, as
/// sorted track-id lists ordered by smallest member.
std::vector<std::vector<int>> crowd_components(const SocialGraph& graph);

/// Components become crowds. A component sharing at least half the members
/// of a previous crowd (measured against the larger of the two) inherits its
/// id and first_seen.
std::vector<CrowdGraph> extract_crowds(const SocialGraph& graph,
                                       const SimClock& clock,
                                       std::uint64_t window,
                                       const std::vector<CrowdGraph>& previous,
                                       int& next_crowd_id);

}  // namespace distbot::social
