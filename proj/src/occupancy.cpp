#include <algorithm>
#include <cmath>
#include <limits>

#include "distbot/planner.hpp"

namespace distbot::planner {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution,
                             Vec2 origin, Cell fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be > 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("grid size must be > 0");
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

CellIndex OccupancyGrid::cell_of_unchecked(const Vec2& p) const {
  const Vec2 g = (p - origin_) / resolution_;
  return {static_cast<int>(std::floor(g.x())), static_cast<int>(std::floor(g.y()))};
}

std::optional<CellIndex> OccupancyGrid::cell_of(const Vec2& p) const {
  const CellIndex c = cell_of_unchecked(p);
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

Vec2 OccupancyGrid::center_of(const CellIndex& c) const {
  return origin_ + resolution_ * Vec2(c.x() + 0.5, c.y() + 0.5);
}

bool OccupancyGrid::is_free(const Vec2& p) const {
  const auto c = cell_of(p);
  return c && at(*c) == Cell::free;
}

void OccupancyGrid::fill_box(const Vec2& lo, const Vec2& hi, Cell v) {
  const CellIndex a = cell_of_unchecked(lo.cwiseMin(hi));
  const CellIndex b = cell_of_unchecked(lo.cwiseMax(hi));
  for (int y = std::max(0, a.y()); y <= std::min(height_ - 1, b.y()); ++y) {
    for (int x = std::max(0, a.x()); x <= std::min(width_ - 1, b.x()); ++x) {
      set({x, y}, v);
    }
  }
}

std::vector<CellIndex> supercover(const OccupancyGrid& grid, const Vec2& a,
                                  const Vec2& b) {
  const Vec2 g0 = (a - grid.origin()) / grid.resolution();
  const Vec2 g1 = (b - grid.origin()) / grid.resolution();
  CellIndex c(static_cast<int>(std::floor(g0.x())), static_cast<int>(std::floor(g0.y())));
  const Vec2 d = g1 - g0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int sx = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
  const int sy = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
  const double delta_x = sx ? 1.0 / std::abs(d.x()) : kInf;
  const double delta_y = sy ? 1.0 / std::abs(d.y()) : kInf;
  double tx = sx > 0 ? (c.x() + 1 - g0.x()) / d.x()
                     : (sx < 0 ? (g0.x() - c.x()) / -d.x() : kInf);
  double ty = sy > 0 ? (c.y() + 1 - g0.y()) / d.y()
                     : (sy < 0 ? (g0.y() - c.y()) / -d.y() : kInf);

  std::vector<CellIndex> out{c};
  constexpr double kCorner = 1e-12;
  const int guard = 4 * (std::abs(static_cast<int>(d.x())) +
                         std::abs(static_cast<int>(d.y())) + 4);
  for (int i = 0; i < guard; ++i) {
    const double t = std::min(tx, ty);
    if (t > 1.0) break;
    if (std::abs(tx - ty) < kCorner) {
      out.emplace_back(c.x() + sx, c.y());
      out.emplace_back(c.x(), c.y() + sy);
      c += CellIndex(sx, sy);
      tx += delta_x;
      ty += delta_y;
    } else if (tx < ty) {
      c.x() += sx;
      tx += delta_x;
    } else {
      c.y() += sy;
      ty += delta_y;
    }
    out.push_back(c);
  }
  return out;
}

bool line_of_sight(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
  for (const auto& c : supercover(grid, a, b)) {
    if (!grid.is_free(c)) return false;
  }
  return true;
}

OccupancyGrid project_occupancy(const std::vector<Eigen::Vector3d>& points,
                                const ProjectionParams& params) {
  OccupancyGrid grid(params.width, params.height, params.resolution, params.origin);
  std::vector<CellIndex> hits;
  for (const auto& p : points) {
    const Vec2 xy = p.head<2>();
    if (params.sensor_origin) {
      for (const auto& c : supercover(grid, *params.sensor_origin, xy)) {
        if (grid.in_bounds(c) && grid.at(c) == Cell::unknown) grid.set(c, Cell::free);
      }
    }
    if (p.z() < params.h_min || p.z() > params.h_max) continue;
    if (const auto c = grid.cell_of(xy)) hits.push_back(*c);
  }
  for (const auto& c : hits) grid.set(c, Cell::occupied);
  return grid;
}

}  // namespace distbot::planner
