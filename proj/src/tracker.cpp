#include "distbot/tracker.hpp"

#include <algorithm>
#include <stdexcept>

namespace distbot::tracker {

namespace {

constexpr double kUnitTol = 1e-6;

int camera_for(double bearing, const sensing::CameraRig& rig) {
  if (auto cam = sensing::camera_for_bearing(bearing, rig)) return *cam;
  // Blind wedge: keep projecting into the nearest camera.
  int best = 0;
  double best_off = 1e9;
  for (int c = 0; c < rig.num_cameras; ++c) {
    const double off = std::abs(normalize_angle(bearing - rig.mount_yaw(c)));
    if (off < best_off) {
      best_off = off;
      best = c;
    }
  }
  return best;
}

}  // namespace

bool CandidateSet::allows(int track, int detection) const {
  const auto& c = candidates.at(track);
  return std::find(c.begin(), c.end(), detection) != c.end();
}

std::vector<Track> predict_tracks(const std::vector<Track>& tracks, double dt,
                                  const Pose2& robot,
                                  const sensing::CameraRig& rig,
                                  const frvo::Params& motion) {
  if (dt <= 0.0) throw std::invalid_argument("predict_tracks: dt must be > 0");
  std::vector<PedestrianState> states;
  for (const auto& t : tracks) {
    if (t.live()) states.push_back(t.state);
  }
  std::vector<Track> out = tracks;
  for (auto& t : out) {
    if (!t.live()) continue;
    PedestrianState s = t.state;
    s.v_pref = s.v;
    t.state = frvo::step_pedestrian(s, states, dt, motion).state;
    const double range = (t.state.x - robot.position).norm();
    if (range > 1e-6) {
      const double bearing = angle_of(to_local(robot, t.state.x));
      t.bbox = sensing::project_bbox(t.state, robot, rig, camera_for(bearing, rig));
    }
  }
  return out;
}

double cosine_distance(const Feature& f1, const Feature& f2) {
  if (f1.size() != f2.size() || std::abs(f1.norm() - 1.0) > kUnitTol ||
      std::abs(f2.norm() - 1.0) > kUnitTol) {
    throw std::invalid_argument("cosine_distance: inputs must be unit vectors");
  }
  return std::clamp(1.0 - f1.dot(f2), 0.0, 2.0);
}

CandidateSet feature_gate(const std::vector<Track>& tracks,
                          const std::vector<Detection>& detections,
                          double gate) {
  CandidateSet out;
  out.candidates.resize(tracks.size());
  out.argmin.resize(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const double d = cosine_distance(tracks[i].feature, detections[j].feature);
      if (d < best) {
        best = d;
        out.argmin[i] = static_cast<int>(j);
      }
      if (d < gate) out.candidates[i].push_back(static_cast<int>(j));
    }
  }
  return out;
}

double iou(const BBox& a, const BBox& b) {
  if (a.camera_id != b.camera_id) return 0.0;
  // Areas from the same corner arithmetic as the intersection, so that
  // iou(a, a) is exactly 1.
  const double ax0 = a.cx - a.width / 2, ax1 = a.cx + a.width / 2;
  const double ay0 = a.cy - a.height / 2, ay1 = a.cy + a.height / 2;
  const double bx0 = b.cx - b.width / 2, bx1 = b.cx + b.width / 2;
  const double by0 = b.cy - b.height / 2, by1 = b.cy + b.height / 2;
  const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = ix * iy;
  const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Assignment associate(const std::vector<Track>& predicted,
                     const std::vector<Detection>& detections,
                     const Params& params) {
  const auto gate = feature_gate(predicted, detections, params.gate);
  Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(predicted.size()),
      static_cast<Eigen::Index>(detections.size()));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!predicted[i].live()) continue;
    for (int j : gate.candidates[i]) eps(i, j) = iou(predicted[i].bbox, detections[j].bbox);
  }
  Assignment pairs = hungarian_assign(eps, params.min_iou);

  std::vector<char> track_used(predicted.size(), false);
  std::vector<char> det_used(detections.size(), false);
  for (auto [i, j] : pairs) {
    track_used[i] = true;
    det_used[j] = true;
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (track_used[i] || !predicted[i].live() || !gate.argmin[i]) continue;
    if (eps.row(static_cast<Eigen::Index>(i)).maxCoeff() >= params.min_iou) continue;
    const int j = *gate.argmin[i];
    if (det_used[j] || !gate.allows(static_cast<int>(i), j)) continue;
    pairs.emplace_back(static_cast<int>(i), j);
    det_used[j] = true;
  }
  return pairs;
}

Vec2 detection_position(const Detection& d, const Pose2& robot,
                        const sensing::CameraRig& rig,
                        const sensing::NoiseParams& noise) {
  const double range =
      sensing::fuse_range(d.visual_range, d.lidar_range, d.lidar_inliers, noise);
  const double bearing = sensing::bbox_bearing(d.bbox, rig);
  return to_world(robot, range * unit_from_angle(bearing));
}

std::vector<Track> update_tracks(const std::vector<Track>& predicted,
                                 const std::vector<Detection>& detections,
                                 const Assignment& assignments,
                                 const Params& params, double dt,
                                 const Pose2& robot,
                                 const sensing::CameraRig& rig,
                                 const sensing::NoiseParams& noise,
                                 int& next_id) {
  std::vector<int> det_for(predicted.size(), -1);
  std::vector<char> det_used(detections.size(), false);
  for (auto [i, j] : assignments) {
    if (i < 0 || i >= static_cast<int>(predicted.size()) || j < 0 ||
        j >= static_cast<int>(detections.size())) {
      throw std::invalid_argument("update_tracks: assignment out of range");
    }
    if (det_for[i] != -1 || det_used[j]) {
      throw std::invalid_argument("update_tracks: duplicate assignment");
    }
    if (!predicted[i].live()) {
      throw std::invalid_argument("update_tracks: dead track assigned");
    }
    det_for[i] = j;
    det_used[j] = true;
  }

  std::vector<Track> out;
  out.reserve(predicted.size() + detections.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    Track t = predicted[i];
    if (!t.live()) {
      out.push_back(t);
      continue;
    }
    ++t.age;
    const int j = det_for[i];
    if (j < 0) {
      ++t.misses;
      t.hits = 0;
      if (t.misses > params.max_misses) t.status = TrackStatus::dead;
      out.push_back(t);
      continue;
    }
    const Detection& d = detections[j];
    const Vec2 z = detection_position(d, robot, rig, noise);
    const Vec2 innovation = z - t.state.x;
    t.state.x += params.box_alpha * innovation;
    t.state.v += (params.velocity_gain / dt) * innovation;
    if (t.state.v.norm() > 1e-6) t.state.facing = angle_of(t.state.v);
    t.bbox = d.bbox;
    t.feature = (params.feature_beta * t.feature +
                 (1.0 - params.feature_beta) * d.feature)
                    .normalized();
    t.fused_range = (z - robot.position).norm();
    t.misses = 0;
    ++t.hits;
    if (t.status == TrackStatus::tentative && t.hits >= params.n_confirm) {
      t.status = TrackStatus::confirmed;
    }
    t.truth_id = d.truth_id;
    out.push_back(t);
  }

  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (det_used[j]) continue;
    const Detection& d = detections[j];
    Track t;
    t.track_id = next_id++;
    t.state.id = t.track_id;
    t.state.x = detection_position(d, robot, rig, noise);
    t.state.facing = angle_of(to_local(robot, t.state.x)) + robot.heading;
    t.bbox = d.bbox;
    t.feature = d.feature.normalized();
    t.fused_range = (t.state.x - robot.position).norm();
    t.hits = 1;
    t.status = params.n_confirm <= 1 ? TrackStatus::confirmed
                                     : TrackStatus::tentative;
    t.truth_id = d.truth_id;
    out.push_back(t);
  }
  return out;
}

void Tracker::step(const std::vector<Detection>& detections, const Pose2& robot,
                   double dt) {
  auto predicted = predict_tracks(tracks_, dt, robot, rig_, motion_);
  const auto pairs = associate(predicted, detections, params_);
  tracks_ = update_tracks(predicted, detections, pairs, params_, dt, robot, rig_,
                          noise_, next_id_);
  std::erase_if(tracks_, [](const Track& t) { return !t.live(); });
}

std::vector<Track> Tracker::confirmed() const {
  std::vector<Track> out;
  for (const auto& t : tracks_) {
    if (t.status == TrackStatus::confirmed) out.push_back(t);
  }
  return out;
}

}  // namespace distbot::tracker
