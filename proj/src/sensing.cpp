#include "distbot/sensing.hpp"

#include <algorithm>
#include <string>

namespace distbot::sensing {

namespace {

constexpr double kPersonCentreHeight = 0.85;

double bearing_to(const Pose2& robot, const Vec2& point) {
  return angle_of(to_local(robot, point));
}

}  // namespace

std::optional<int> camera_for_bearing(double bearing, const CameraRig& rig) {
  for (int c = 0; c < rig.num_cameras; ++c) {
    const double off = normalize_angle(bearing - rig.mount_yaw(c));
    if (std::abs(off) <= rig.half_fov() + 1e-12) return c;
  }
  return std::nullopt;
}

bool is_occluded(const Pose2& robot, const PedestrianState& target,
                 std::span<const PedestrianState> world, double clearance) {
  const double range = (target.x - robot.position).norm();
  for (const auto& q : world) {
    if (q.id == target.id) continue;
    if ((q.x - robot.position).norm() >= range) continue;
    if (segment_point_distance(robot.position, target.x, q.x) < clearance) {
      return true;
    }
  }
  return false;
}

std::vector<Visible> visible_pedestrians(const Pose2& robot,
                                         std::span<const PedestrianState> world,
                                         const CameraRig& rig,
                                         double clearance) {
  std::vector<Visible> out;
  for (const auto& p : world) {
    const double range = (p.x - robot.position).norm();
    if (range > rig.max_range || range <= 0.0) continue;
    const auto cam = camera_for_bearing(bearing_to(robot, p.x), rig);
    if (!cam) continue;
    if (is_occluded(robot, p, world, clearance)) continue;
    out.push_back({p, *cam});
  }
  return out;
}

BBox project_bbox(const PedestrianState& p, const Pose2& robot,
                  const CameraRig& rig, int camera_id) {
  const double range = (p.x - robot.position).norm();
  const double off =
      normalize_angle(bearing_to(robot, p.x) - rig.mount_yaw(camera_id));
  const double f = rig.focal();
  BBox box;
  box.camera_id = camera_id;
  box.cx = 0.5 - f * std::tan(off);
  box.cy = 0.5 - f * (kPersonCentreHeight - rig.camera_height) / range;
  box.height = f * rig.person_height / range;
  box.width = f * p.l / range;
  return box;
}

double bbox_bearing(const BBox& box, const CameraRig& rig) {
  return normalize_angle(rig.mount_yaw(box.camera_id) +
                         std::atan((0.5 - box.cx) / rig.focal()));
}

double visual_range(const BBox& box, const CameraRig& rig) {
  return rig.focal() * rig.person_height / std::max(box.height, 1e-9);
}

Feature identity_feature(int pedestrian_id, std::uint64_t seed, int dim) {
  Rng rng = Rng(seed).fork("identity/" + std::to_string(pedestrian_id));
  Feature f(dim);
  for (int i = 0; i < dim; ++i) f[i] = rng.normal();
  return f.normalized();
}

std::optional<Detection> synth_detection(const PedestrianState& p,
                                         int camera_id, const Pose2& robot,
                                         const Feature& identity,
                                         const CameraRig& rig,
                                         const NoiseParams& noise, Rng& rng) {
  // Draw order is fixed so a miss consumes the same stream as a hit.
  const bool missed = rng.bernoulli(noise.p_miss);
  const double ncx = rng.normal(0.0, noise.sigma_px);
  const double ncy = rng.normal(0.0, noise.sigma_px);
  const double nsize = rng.normal(0.0, noise.sigma_size);
  Feature feature = identity;
  const double per_component =
      noise.sigma_f / std::sqrt(static_cast<double>(identity.size()));
  for (Eigen::Index i = 0; i < feature.size(); ++i) {
    feature[i] += rng.normal(0.0, per_component);
  }
  if (missed) return std::nullopt;

  Detection d;
  d.bbox = project_bbox(p, robot, rig, camera_id);
  d.bbox.cx += ncx;
  d.bbox.cy += ncy;
  const double size_scale = std::max(0.2, 1.0 + nsize);
  d.bbox.height *= size_scale;
  d.bbox.width *= size_scale;
  d.feature = feature.normalized();
  d.visual_range = visual_range(d.bbox, rig);
  d.truth_id = p.id;
  return d;
}

RangeScan simulate_range_scan(const PedestrianState& p, const Pose2& robot,
                              std::span<const PedestrianState> world,
                              const CameraRig& rig, const NoiseParams& noise,
                              Rng& rng) {
  RangeScan scan;
  if (is_occluded(robot, p, world, noise.occlusion_clearance)) return scan;
  const double range = (p.x - robot.position).norm();
  const double bearing = bearing_to(robot, p.x);
  const double spread = std::atan2(p.radius(), range);
  scan.points.reserve(noise.returns);
  for (int k = 0; k < noise.returns; ++k) {
    const bool outlier = rng.bernoulli(noise.outlier_rate);
    const double junk = rng.uniform(1e-3, rig.max_range);
    const double jitter = rng.normal(0.0, noise.sigma_r);
    const double b = bearing + rng.uniform(-spread, spread);
    const double depth = outlier ? junk : std::max(1e-3, range + jitter);
    scan.points.push_back({b, depth});
  }
  return scan;
}

RangeEstimate ransac_range(const RangeScan& scan, double band) {
  if (scan.points.empty()) throw NoEstimateError();
  int best_count = -1;
  double best_residual = 0.0;
  double best_range = 0.0;
  for (const auto& hyp : scan.points) {
    int count = 0;
    double residual = 0.0, sum = 0.0;
    for (const auto& r : scan.points) {
      const double e = std::abs(r.depth - hyp.depth);
      if (e <= band) {
        ++count;
        residual += e;
        sum += r.depth;
      }
    }
    if (count > best_count || (count == best_count && residual < best_residual)) {
      best_count = count;
      best_residual = residual;
      best_range = sum / count;
    }
  }
  return {best_range, best_count};
}

double fuse_range(double visual, std::optional<double> lidar, int inliers,
                  const NoiseParams& noise) {
  if (!lidar || inliers < noise.min_inliers) return visual;
  if (std::abs(*lidar - visual) > noise.max_disagreement) return visual;
  return *lidar;
}

}  // namespace distbot::sensing
