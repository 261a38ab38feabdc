#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "distbot/core.hpp"

namespace distbot::sensing {

using Feature = Eigen::VectorXd;

/// Four cameras mounted evenly around the body, 80 degree horizontal FOV
/// each, leaving 10 degree blind wedges between neighbours.
struct CameraRig {
  int num_cameras = 4;
  double fov_deg = 80.0;
  std::array<double, 4> mount_yaws_deg{0.0, 90.0, 180.0, 270.0};
  double max_range = 20.0;
  double camera_height = 0.6;
  double person_height = 1.7;

  double half_fov() const { return 0.5 * fov_deg * kPi / 180.0; }
  double mount_yaw(int camera_id) const {
    return mount_yaws_deg.at(camera_id) * kPi / 180.0;
  }
  /// Normalized focal length: a ray on the FOV edge lands on cx = 0 or 1.
  double focal() const { return 0.5 / std::tan(half_fov()); }
};

struct NoiseParams {
  double sigma_px = 0.01;      // bbox centre, normalized image units
  double sigma_size = 0.05;    // relative bbox size noise
  double sigma_f = 0.05;       // total appearance-noise magnitude
  double p_miss = 0.05;
  double sigma_r = 0.05;       // range-return noise, meters
  double outlier_rate = 0.1;   // q
  int returns = 20;            // K
  double ransac_band = 0.2;    // delta, meters
  int min_inliers = 5;         // n_min
  double max_disagreement = 2.0;  // Delta_max, meters
  double occlusion_clearance = 0.3;  // rho, meters
  int feature_dim = 32;
};

struct Detection {
  BBox bbox;
  Feature feature;
  double visual_range = 0.0;
  std::optional<double> lidar_range;
  int lidar_inliers = 0;
  int truth_id = -1;  // evaluation only; never read by the tracker
};

struct RangeReturn {
  double bearing = 0.0;  // robot frame, radians
  double depth = 0.0;    // meters
};

struct RangeScan {
  std::vector<RangeReturn> points;
};

struct Visible {
  PedestrianState pedestrian;
  int camera_id = 0;
};

struct RangeEstimate {
  double range = 0.0;
  int inliers = 0;
};

class NoEstimateError : public std::runtime_error {
 public:
  NoEstimateError() : std::runtime_error("ransac_range: empty scan") {}
};

/// Camera whose wedge contains `bearing` (robot frame), if any. Wedge
/// boundaries are inclusive.
std::optional<int> camera_for_bearing(double bearing, const CameraRig& rig);

/// True when the sight line robot -> target passes within `clearance` of a
/// nearer pedestrian's centre.
bool is_occluded(const Pose2& robot, const PedestrianState& target,
                 std::span<const PedestrianState> world, double clearance);

std::vector<Visible> visible_pedestrians(const Pose2& robot,
                                         std::span<const PedestrianState> world,
                                         const CameraRig& rig,
                                         double clearance);

/// Noiseless projection of a pedestrian into `camera_id`.
BBox project_bbox(const PedestrianState& p, const Pose2& robot,
                  const CameraRig& rig, int camera_id);

/// Robot-frame bearing of a box centre, inverse of the projection.
double bbox_bearing(const BBox& box, const CameraRig& rig);
/// Range implied by the box height under the pinhole model.
double visual_range(const BBox& box, const CameraRig& rig);

/// Fixed appearance vector of a pedestrian identity.
Feature identity_feature(int pedestrian_id, std::uint64_t seed, int dim);

/// One camera detection, or nothing when the detector misses.
std::optional<Detection> synth_detection(const PedestrianState& p,
                                         int camera_id, const Pose2& robot,
                                         const Feature& identity,
                                         const CameraRig& rig,
                                         const NoiseParams& noise, Rng& rng);

/// Range returns inside the pedestrian's frustum; empty when occluded.
RangeScan simulate_range_scan(const PedestrianState& p, const Pose2& robot,
                              std::span<const PedestrianState> world,
                              const CameraRig& rig, const NoiseParams& noise,
                              Rng& rng);

/// Exhaustive single-point 1D RANSAC over the scan depths.
RangeEstimate ransac_range(const RangeScan& scan, double band);

/// Trust the range sensor unless it is missing, weakly supported, or
/// disagrees with the visual estimate by more than max_disagreement.
double fuse_range(double visual, std::optional<double> lidar, int inliers,
                  const NoiseParams& noise);

}  // namespace distbot::sensing
