#include "distbot/planner.hpp"

namespace distbot::planner {

std::vector<AdvisoryEvent> AdvisoryTracker::check(
    const Vec2& robot, const std::vector<social::CrowdGraph>& crowds,
    const SimClock& clock) {
  std::vector<std::pair<int, double>> distances;
  distances.reserve(crowds.size());
  for (const auto& c : crowds) {
    distances.emplace_back(c.crowd_id, (c.centroid - robot).norm());
  }
  return check(distances, clock.tick);
}

std::vector<AdvisoryEvent> AdvisoryTracker::check(
    const std::vector<std::pair<int, double>>& distances, std::uint64_t tick) {
  const double release = params_.trigger + params_.hysteresis;
  std::erase_if(active_, [&](int id) {
    for (const auto& [cid, d] : distances) {
      if (cid == id) return d > release;
    }
    return true;  // dissolved
  });

  std::vector<AdvisoryEvent> events;
  for (const auto& [cid, d] : distances) {
    if (d < params_.trigger && !active_.count(cid)) {
      events.push_back({tick, cid, d, next_message_++});
      active_.insert(cid);
    }
  }
  return events;
}

}  // namespace distbot::planner
