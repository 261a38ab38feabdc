#include "distbot/socialgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace distbot::social {

const char* to_string(EdgeClass k) {
  switch (k) {
    case EdgeClass::safe: return "safe";
    case EdgeClass::warning: return "warning";
    case EdgeClass::dangerous: return "dangerous";
  }
  return "?";
}

EdgeClass classify_edge(double distance, const Thresholds& t) {
  if (!std::isfinite(distance) || distance < 0.0) {
    throw std::invalid_argument("classify_edge: distance must be >= 0");
  }
  if (distance < t.d_red) return EdgeClass::dangerous;
  if (distance < t.d_yellow) return EdgeClass::warning;
  return EdgeClass::safe;
}

SocialGraph graph_from_nodes(std::vector<SocialNode> nodes, const Thresholds& t) {
  SocialGraph g;
  g.nodes = std::move(nodes);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
      const double d = (g.nodes[i].position - g.nodes[j].position).norm();
      if (d > t.edge_max) continue;
      int a = g.nodes[i].track_id, b = g.nodes[j].track_id;
      if (a > b) std::swap(a, b);
      g.edges.push_back({a, b, d, classify_edge(d, t)});
    }
  }
  return g;
}

SocialGraph build_social_graph(const std::vector<tracker::Track>& tracks,
                               const Pose2& robot, const Thresholds& t) {
  std::vector<SocialNode> nodes;
  for (const auto& tr : tracks) {
    if (tr.status != tracker::TrackStatus::confirmed) continue;
    const Vec2 offset = tr.state.x - robot.position;
    const double range = tr.fused_range > 0.0 ? tr.fused_range : offset.norm();
    nodes.push_back({tr.track_id, robot.position + range * unit_from_angle(angle_of(offset))});
  }
  return graph_from_nodes(std::move(nodes), t);
}

std::vector<std::vector<int>> crowd_components(const SocialGraph& graph) {
  std::map<int, std::vector<int>> adj;
  for (const auto& n : graph.nodes) adj[n.track_id];
  for (const auto& e : graph.edges) {
    if (e.klass == EdgeClass::safe) continue;
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::map<int, bool> seen;
  std::vector<std::vector<int>> out;
  for (const auto& [start, _] : adj) {
    if (seen[start]) continue;
    std::vector<int> comp;
    std::deque<int> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      comp.push_back(u);
      for (int w : adj[u]) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
    if (comp.size() < 2) continue;
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

namespace {

std::size_t shared(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(both));
  return both.size();
}

}  // namespace

std::vector<CrowdGraph> extract_crowds(const SocialGraph& graph,
                                       const SimClock& clock,
                                       std::uint64_t window,
                                       const std::vector<CrowdGraph>& previous,
                                       int& next_crowd_id) {
  std::map<int, Vec2> position;
  for (const auto& n : graph.nodes) position[n.track_id] = n.position;

  std::vector<char> taken(previous.size(), false);
  std::vector<CrowdGraph> out;
  for (auto& members : crowd_components(graph)) {
    CrowdGraph c;
    c.member_ids = members;
    c.weight = static_cast<int>(members.size());
    for (int id : members) c.centroid += position[id];
    c.centroid /= static_cast<double>(members.size());

    int best = -1;
    std::size_t best_shared = 0;
    for (std::size_t k = 0; k < previous.size(); ++k) {
      if (taken[k]) continue;
      const std::size_t s = shared(members, previous[k].member_ids);
      const std::size_t larger = std::max(members.size(), previous[k].member_ids.size());
      if (2 * s >= larger && s > best_shared) {
        best = static_cast<int>(k);
        best_shared = s;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      c.crowd_id = previous[best].crowd_id;
      c.first_seen = previous[best].first_seen;
    } else {
      c.crowd_id = next_crowd_id++;
      c.first_seen = clock.tick;
    }
    c.deadline = c.first_seen + window;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace distbot::social
