#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "distbot/core.hpp"
#include "distbot/frvo.hpp"
#include "distbot/sensing.hpp"

namespace distbot::tracker {

using sensing::Detection;
using sensing::Feature;

enum class TrackStatus { tentative, confirmed, dead };

struct Track {
  int track_id = 0;
  PedestrianState state;  // world-frame estimate
  BBox bbox;              // last matched box, or the predicted one
  Feature feature;        // unit norm
  double fused_range = 0.0;
  int age = 0;
  int misses = 0;
  int hits = 0;  // consecutive matches
  TrackStatus status = TrackStatus::tentative;
  int truth_id = -1;  // label of the last matched detection, evaluation only

  bool live() const { return status != TrackStatus::dead; }
};

struct Params {
  double gate = 0.4;
  double min_iou = 0.1;
  int max_misses = 5;
  int n_confirm = 3;
  double feature_beta = 0.9;
  double box_alpha = 0.7;
  double velocity_gain = 0.1;
};

/// Detections that pass the appearance gate, per track, and each track's
/// most similar detection.
struct CandidateSet {
  std::vector<std::vector<int>> candidates;
  std::vector<std::optional<int>> argmin;

  bool allows(int track, int detection) const;
};

using Assignment = std::vector<std::pair<int, int>>;  // (track, detection)

/// Advances live tracks one step with the pedestrian motion model, using the
/// other tracks as neighbours, and re-projects their boxes.
std::vector<Track> predict_tracks(const std::vector<Track>& tracks, double dt,
                                  const Pose2& robot,
                                  const sensing::CameraRig& rig,
                                  const frvo::Params& motion = {});

/// 1 - f1.f2. Throws std::invalid_argument unless both have unit norm.
double cosine_distance(const Feature& f1, const Feature& f2);

CandidateSet feature_gate(const std::vector<Track>& tracks,
                          const std::vector<Detection>& detections,
                          double gate);

/// Intersection over union. Boxes from different cameras never overlap.
double iou(const BBox& a, const BBox& b);

/// Maximum-weight one-to-one matching of a rectangular weight matrix; pairs
/// whose weight is below `min_weight` are dropped afterwards.
Assignment hungarian_assign(const Eigen::MatrixXd& weights, double min_weight);

/// Feature gate, gated IoU matrix, Hungarian assignment, then the per-track
/// argmin for tracks left unmatched whose best gated IoU is below min_iou.
Assignment associate(const std::vector<Track>& predicted,
                     const std::vector<Detection>& detections,
                     const Params& params);

/// Applies one tick of matches to the predicted tracks. Unmatched detections
/// spawn tentative tracks numbered from `next_id`. Throws
/// std::invalid_argument on a duplicate or out-of-range assignment.
std::vector<Track> update_tracks(const std::vector<Track>& predicted,
                                 const std::vector<Detection>& detections,
                                 const Assignment& assignments,
                                 const Params& params, double dt,
                                 const Pose2& robot,
                                 const sensing::CameraRig& rig,
                                 const sensing::NoiseParams& noise,
                                 int& next_id);

/// World position implied by a detection's bearing and fused range.
Vec2 detection_position(const Detection& d, const Pose2& robot,
                        const sensing::CameraRig& rig,
                        const sensing::NoiseParams& noise);

class Tracker {
 public:
  Tracker(Params params, sensing::CameraRig rig, sensing::NoiseParams noise,
          frvo::Params motion = {})
      : params_(params), rig_(rig), noise_(noise), motion_(motion) {}

  /// One full tick: predict, associate, update, drop dead tracks.
  void step(const std::vector<Detection>& detections, const Pose2& robot,
            double dt);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<Track> confirmed() const;

 private:
  Params params_;
  sensing::CameraRig rig_;
  sensing::NoiseParams noise_;
  frvo::Params motion_;
  std::vector<Track> tracks_;
  int next_id_ = 0;
};

}  // namespace distbot::tracker
