#include "distbot/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace distbot {

SimClock advance(SimClock clock) {
  ++clock.tick;
  return clock;
}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("normalize_angle: non-finite angle");
  }
  double r = std::fmod(theta, 2.0 * kPi);
  if (r > kPi) r -= 2.0 * kPi;
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng Rng::fork(std::string_view name) const {
  return Rng(splitmix64(seed_ ^ splitmix64(fnv1a(name))));
}

double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

Vec2 to_local(const Pose2& pose, const Vec2& world) {
  return rotate<double>(world - pose.position, -pose.heading);
}

Vec2 to_world(const Pose2& pose, const Vec2& local) {
  return pose.position + rotate<double>(local, pose.heading);
}

bool disc_overlaps_rect(const Vec2& disc_center, double disc_radius,
                        const Vec2& rect_center, const Vec2& axis,
                        double half_along, double half_across) {
  const Vec2 d = disc_center - rect_center;
  const Vec2 perp(-axis.y(), axis.x());
  const double a = d.dot(axis), c = d.dot(perp);
  const double qa = std::clamp(a, -half_along, half_along);
  const double qc = std::clamp(c, -half_across, half_across);
  const double dx = a - qa, dy = c - qc;
  return dx * dx + dy * dy < disc_radius * disc_radius;
}

bool footprint_overlaps_disc(const PedestrianState& p, const Vec2& center,
                             double radius) {
  return disc_overlaps_rect(center, radius, p.x, p.facing_dir(), 0.5 * p.w,
                            0.5 * p.l);
}

}  // namespace distbot
