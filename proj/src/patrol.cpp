#include <algorithm>
#include <numeric>

#include "distbot/planner.hpp"

namespace distbot::planner {

Junction make_junction(int id, const Vec2& position,
                       const std::vector<std::pair<int, Vec2>>& neighbors) {
  Junction j;
  j.id = id;
  j.position = position;
  for (const auto& [nid, npos] : neighbors) {
    const Vec2 d = npos - position;
    if (d.norm() <= 0.0) throw std::invalid_argument("junction neighbour coincides");
    j.neighbors.push_back(nid);
    j.exits.push_back(d.normalized());
  }
  j.counts.assign(j.exits.size(), 0.0);
  j.last_visited.assign(j.exits.size(), -1);
  return j;
}

std::vector<double> exit_probabilities(const Junction& j) {
  const double total = std::accumulate(j.counts.begin(), j.counts.end(), 0.0);
  const double denom = total + static_cast<double>(j.counts.size());
  std::vector<double> p;
  for (double c : j.counts) p.push_back((c + 1.0) / denom);
  return p;
}

int choose_exit(const Junction& j, Rng& rng) {
  if (j.exits.empty()) throw std::invalid_argument("junction has no exits");
  const auto p = exit_probabilities(j);
  const double best = *std::max_element(p.begin(), p.end());
  std::vector<int> tied;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= best - 1e-12) tied.push_back(static_cast<int>(i));
  }
  std::int64_t oldest = j.last_visited[tied.front()];
  for (int i : tied) oldest = std::min(oldest, j.last_visited[i]);
  std::erase_if(tied, [&](int i) { return j.last_visited[i] != oldest; });
  if (tied.size() == 1) return tied.front();
  return tied[rng.uniform_int(0, static_cast<int>(tied.size()) - 1)];
}

Vec2 patrol_direction(const Junction& j, Rng& rng) {
  return j.exits[choose_exit(j, rng)];
}

void record_departure(Junction& j, int exit, std::uint64_t tick) {
  j.last_visited.at(exit) = static_cast<std::int64_t>(tick);
}

void record_crowd(Junction& j, int exit, double amount) {
  j.counts.at(exit) += amount;
}

void decay_counts(Junction& j, double factor) {
  for (double& c : j.counts) c *= factor;
}

}  // namespace distbot::planner
