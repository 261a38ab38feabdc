#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "distbot/planner.hpp"

namespace distbot::planner {

double Path::length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    s += (waypoints[i] - waypoints[i - 1]).norm();
  }
  return s;
}

namespace {

std::vector<CellIndex> astar(const OccupancyGrid& grid, const CellIndex& s,
                             const CellIndex& g) {
  const int w = grid.width();
  auto id = [w](const CellIndex& c) { return c.y() * w + c.x(); };
  auto octile = [&](const CellIndex& c) {
    const double dx = std::abs(c.x() - g.x()), dy = std::abs(c.y() - g.y());
    return (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
  };
  const std::size_t n = static_cast<std::size_t>(w) * grid.height();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, false);
  // (f, insertion order, cell id): the counter keeps expansion order stable.
  using Entry = std::tuple<double, long, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  long counter = 0;
  cost[id(s)] = 0.0;
  open.emplace(octile(s), counter++, id(s));
  while (!open.empty()) {
    const int cur = std::get<2>(open.top());
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = true;
    const CellIndex c(cur % w, cur / w);
    if (c == g) break;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const CellIndex nb = c + CellIndex(dx, dy);
        if (!grid.is_free(nb)) continue;
        if (dx && dy && (!grid.is_free(CellIndex(c.x() + dx, c.y())) ||
                         !grid.is_free(CellIndex(c.x(), c.y() + dy)))) {
          continue;  // no corner cutting
        }
        const double step = (dx && dy) ? std::sqrt(2.0) : 1.0;
        const int nid = id(nb);
        if (cost[cur] + step < cost[nid]) {
          cost[nid] = cost[cur] + step;
          parent[nid] = cur;
          open.emplace(cost[nid] + octile(nb), counter++, nid);
        }
      }
    }
  }
  if (!closed[id(g)]) return {};
  std::vector<CellIndex> cells;
  for (int cur = id(g); cur != -1; cur = parent[cur]) cells.emplace_back(cur % w, cur / w);
  std::reverse(cells.begin(), cells.end());
  return cells;
}

}  // namespace

Path plan_path(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal) {
  const auto s = grid.cell_of(start);
  const auto g = grid.cell_of(goal);
  if (!s || !grid.is_free(*s)) throw UnreachableError("plan_path: start is blocked");
  if (!g || !grid.is_free(*g)) throw UnreachableError("plan_path: goal is blocked");
  const auto cells = astar(grid, *s, *g);
  if (cells.empty()) throw UnreachableError("plan_path: goal not reachable");

  std::vector<Vec2> raw{start};
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) raw.push_back(grid.center_of(cells[i]));
  raw.push_back(goal);

  Path path;
  for (std::size_t i = 1; i < raw.size(); ++i) path.raw_length += (raw[i] - raw[i - 1]).norm();

  path.waypoints.push_back(raw.front());
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = raw.size() - 1; j > i + 1; --j) {
      if (line_of_sight(grid, raw[i], raw[j])) {
        next = j;
        break;
      }
    }
    path.waypoints.push_back(raw[next]);
    i = next;
  }
  return path;
}

}  // namespace distbot::planner
