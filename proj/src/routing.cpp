#include <algorithm>

#include "distbot/planner.hpp"

namespace distbot::planner {

namespace {

struct Search {
  const std::vector<CrowdNode>& crowds;
  Vec2 start;
  double tick0;
  double ticks_per_meter;
  double lambda;

  std::vector<int> order;
  std::vector<char> visited;
  std::vector<double> energies, arrivals;
  Route best;

  void dfs(const Vec2& at, double travelled, double energy, int weight) {
    const int n = static_cast<int>(order.size());
    const double cost = energy - static_cast<double>(weight + n);
    if (cost < best.cost) {
      best.order = order;
      best.edge_energy = energies;
      best.arrival_tick = arrivals;
      best.energy = energy;
      best.weight_total = weight;
      best.cost = cost;
    }
    // Each further visit can at best subtract (w + 1); energy never shrinks.
    double gain = 0.0;
    for (std::size_t k = 0; k < crowds.size(); ++k) {
      if (visited[k]) continue;
      const double leg = (crowds[k].location - at).norm();
      if (arrival(travelled + leg) <= static_cast<double>(crowds[k].deadline)) {
        gain += crowds[k].weight + 1;
      }
    }
    if (cost - gain >= best.cost) return;

    for (std::size_t k = 0; k < crowds.size(); ++k) {
      if (visited[k]) continue;
      const double leg = (crowds[k].location - at).norm();
      const double t = arrival(travelled + leg);
      if (t > static_cast<double>(crowds[k].deadline)) continue;
      visited[k] = true;
      order.push_back(static_cast<int>(k));
      energies.push_back(lambda * leg);
      arrivals.push_back(t);
      dfs(crowds[k].location, travelled + leg, energy + lambda * leg,
          weight + crowds[k].weight);
      arrivals.pop_back();
      energies.pop_back();
      order.pop_back();
      visited[k] = false;
    }
  }

  double arrival(double distance) const { return tick0 + distance * ticks_per_meter; }
};

}  // namespace

Route route_crowds(const std::vector<CrowdNode>& crowds, const Vec2& robot_pos,
                   const SimClock& clock, double speed,
                   const RouteParams& params) {
  if (!(speed > 0.0)) throw std::invalid_argument("route_crowds: speed must be > 0");
  if (static_cast<int>(crowds.size()) > params.n_max) {
    throw std::invalid_argument("route_crowds: too many crowds");
  }
  Search s{crowds, robot_pos, static_cast<double>(clock.tick),
           1.0 / (speed * clock.dt), params.lambda, {}, {}, {}, {}, {}};
  s.visited.assign(crowds.size(), false);
  s.dfs(robot_pos, 0.0, 0.0, 0);
  return s.best;
}

}  // namespace distbot::planner
