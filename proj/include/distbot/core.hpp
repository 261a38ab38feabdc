#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace distbot {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

/// Fixed-step simulation clock. Ticks advance by exactly one per step.
struct SimClock {
  std::uint64_t tick = 0;
  double dt = 0.1;

  double elapsed() const { return static_cast<double>(tick) * dt; }
  bool operator==(const SimClock&) const = default;
};

SimClock advance(SimClock clock);

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on NaN/inf.
double normalize_angle(double theta);

/// Planar pose: position plus heading (radians, world frame).
struct Pose2 {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;

  bool operator==(const Pose2&) const = default;
};

/// Pedestrian agent state: position, velocity, preferred velocity, shoulder
/// length and width, plus facing direction.
struct PedestrianState {
  int id = 0;
  Vec2 x = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  Vec2 v_pref = Vec2::Zero();
  double l = 0.45;  // shoulder length (across the body)
  double w = 0.25;  // shoulder width (front to back)
  double facing = 0.0;
  // False for agents that never take a share of the avoidance (the robot).
  bool reciprocal = true;

  /// Radius of the disc circumscribing the l x w footprint.
  double radius() const { return 0.5 * std::hypot(l, w); }
  Vec2 facing_dir() const { return {std::cos(facing), std::sin(facing)}; }
};

/// Image-plane bounding box, normalized to [0,1] per camera.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
  int camera_id = 0;

  double area() const { return width * height; }
};

/// Seeded 64-bit generator. Named streams are derived from the parent seed so
/// that draws in one stream never shift another.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng fork(std::string_view name) const;

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (stddev <= 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Geometry helpers.

template <typename Derived>
auto cross2(const Eigen::MatrixBase<Derived>& a,
            const Eigen::MatrixBase<Derived>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> rotate(const Eigen::Matrix<Scalar, 2, 1>& v,
                                   Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

inline Vec2 unit_from_angle(double angle) {
  return {std::cos(angle), std::sin(angle)};
}

inline double angle_of(const Vec2& v) { return std::atan2(v.y(), v.x()); }

/// Distance from point p to segment [a, b].
double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p);

/// World point to the frame of `pose` and back.
Vec2 to_local(const Pose2& pose, const Vec2& world);
Vec2 to_world(const Pose2& pose, const Vec2& local);

/// Disc vs oriented rectangle overlap. The rectangle has half-extent
/// `half_along` on the `axis` direction and `half_across` orthogonal to it.
bool disc_overlaps_rect(const Vec2& disc_center, double disc_radius,
                        const Vec2& rect_center, const Vec2& axis,
                        double half_along, double half_across);

/// Pedestrian footprint (l across the body, w along facing) against a disc.
bool footprint_overlaps_disc(const PedestrianState& p, const Vec2& center,
                             double radius);

}  // namespace distbot
