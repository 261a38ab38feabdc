#include "distbot/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace distbot::engine {

using nlohmann::json;

namespace {

Vec2 vec_of(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

double set_iou(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const double uni = static_cast<double>(a.size() + b.size() - both.size());
  return uni > 0 ? static_cast<double>(both.size()) / uni : 0.0;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

json to_json(const MetricsSummary& m) {
  return {{"ticks", m.ticks},
          {"collisions", m.collisions},
          {"overlap_ticks", m.overlap_ticks},
          {"id_switches", m.id_switches},
          {"fragmentations", m.fragmentations},
          {"crowd_precision", m.crowd_precision},
          {"crowd_recall", m.crowd_recall},
          {"advisories", m.advisories},
          {"addressed", m.addressed},
          {"complied", m.complied},
          {"dissolved", m.dissolved},
          {"mean_dissolution_time", m.mean_dissolution_time},
          {"distance_traveled", m.distance_traveled}};
}

std::vector<std::vector<int>> proximity_clusters(
    const std::vector<std::pair<int, Vec2>>& points, double threshold) {
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((points[i].second - points[j].second).norm() < threshold) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::map<std::size_t, std::vector<int>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(points[i].first);
  std::vector<std::vector<int>> out;
  for (auto& [root, ids] : groups) {
    if (ids.size() < 2) continue;
    std::sort(ids.begin(), ids.end());
    out.push_back(ids);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MetricsAccumulator::MetricsAccumulator(const json& header) {
  const json& s = header.at("scenario");
  robot_radius_ = s.at("robot").at("radius").get<double>();
  d_yellow_ = s.at("social").at("d_yellow").get<double>();
  max_range_ = s.at("camera").at("max_range").get<double>();
  dt_ = s.at("dt").get<double>();
  last_robot_ = vec_of(s.at("robot").at("start"));
}

void MetricsAccumulator::add(const json& r) {
  const auto tick = r.at("tick").get<std::uint64_t>();
  ++m_.ticks;

  const Vec2 robot = vec_of(r.at("robot").at("x"));
  m_.distance_traveled += (robot - last_robot_).norm();
  last_robot_ = robot;

  // Collisions and ground-truth clusters.
  std::set<int> overlapping;
  std::vector<std::pair<int, Vec2>> in_range;
  for (const auto& p : r.at("pedestrians")) {
    PedestrianState s;
    s.id = p.at("id").get<int>();
    s.x = vec_of(p.at("x"));
    s.facing = p.at("facing").get<double>();
    s.l = p.at("l").get<double>();
    s.w = p.at("w").get<double>();
    if (footprint_overlaps_disc(s, robot, robot_radius_)) overlapping.insert(s.id);
    if ((s.x - robot).norm() <= max_range_) in_range.emplace_back(s.id, s.x);
  }
  m_.overlap_ticks += static_cast<int>(overlapping.size());
  for (int id : overlapping) {
    if (!overlapping_.count(id)) ++m_.collisions;
  }
  overlapping_ = std::move(overlapping);

  std::map<int, int> truth_of;
  for (const auto& t : r.at("tracks")) {
    const int id = t.at("id").get<int>();
    const int truth = t.at("truth").get<int>();
    truth_of[id] = truth;
    if (t.at("status") == "confirmed" && t.at("matched").get<bool>() && truth >= 0) {
      labels_.emplace_back(tick, id, truth);
    }
  }

  // Crowd detection quality.
  const auto clusters = proximity_clusters(in_range, d_yellow_);
  std::vector<std::vector<int>> detected;
  std::set<int> present;
  for (const auto& c : r.at("crowds")) {
    present.insert(c.at("id").get<int>());
    std::set<int> truths;
    for (const auto& m : c.at("members")) {
      auto it = truth_of.find(m.get<int>());
      if (it != truth_of.end() && it->second >= 0) truths.insert(it->second);
    }
    detected.emplace_back(truths.begin(), truths.end());
  }
  detected_ += detected.size();
  truth_ += clusters.size();
  for (const auto& d : detected) {
    if (std::any_of(clusters.begin(), clusters.end(),
                    [&](const auto& c) { return set_iou(d, c) >= 0.5; })) {
      ++detected_hit_;
    }
  }
  for (const auto& c : clusters) {
    if (std::any_of(detected.begin(), detected.end(),
                    [&](const auto& d) { return set_iou(d, c) >= 0.5; })) {
      ++truth_hit_;
    }
  }

  // Dissolution: an advised crowd that is no longer listed.
  for (auto it = advised_at_.begin(); it != advised_at_.end();) {
    if (!present.count(it->first)) {
      ++m_.dissolved;
      dissolution_sum_ += static_cast<double>(tick - it->second) * dt_;
      it = advised_at_.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& a : r.at("advisories")) {
    ++m_.advisories;
    m_.addressed += static_cast<int>(a.at("addressed").size());
    m_.complied += static_cast<int>(a.at("complied").size());
    advised_at_.emplace(a.at("crowd").get<int>(), tick);
  }
  present_ = std::move(present);
}

MetricsSummary MetricsAccumulator::finish() const {
  MetricsSummary out = m_;
  out.crowd_precision = ratio(detected_hit_, detected_);
  out.crowd_recall = ratio(truth_hit_, truth_);
  out.mean_dissolution_time =
      out.dissolved > 0 ? dissolution_sum_ / out.dissolved : 0.0;

  // ID switches: a track that was following one pedestrian is labelled with
  // another. Labels are in tick order.
  std::map<int, int> label;
  for (const auto& [tick, track, truth] : labels_) {
    auto [it, fresh] = label.emplace(track, truth);
    if (!fresh && it->second != truth) {
      ++out.id_switches;
      it->second = truth;
    }
  }

  // Fragmentation: each track belongs to the pedestrian it was labelled with
  // most often. A pedestrian's covering track at a tick is a track labelled
  // with it, preferring tracks that belong to it, then the lowest id.
  std::map<int, std::map<int, int>> votes;
  for (const auto& [tick, track, truth] : labels_) ++votes[track][truth];
  std::map<int, int> majority;
  for (const auto& [track, counts] : votes) {
    int best = -1, best_n = 0;
    for (const auto& [truth, n] : counts) {
      if (n > best_n) best = truth, best_n = n;
    }
    majority[track] = best;
  }
  std::map<std::pair<std::uint64_t, int>, int> cover;
  for (const auto& [tick, track, truth] : labels_) {
    auto key = std::make_pair(tick, truth);
    auto it = cover.find(key);
    if (it == cover.end()) {
      cover.emplace(key, track);
      continue;
    }
    auto rank = [&](int t) { return std::make_pair(majority.at(t) != truth, t); };
    if (rank(track) < rank(it->second)) it->second = track;
  }
  std::map<int, int> last;
  for (const auto& [key, track] : cover) {
    auto [it, fresh] = last.emplace(key.second, track);
    if (!fresh && it->second != track) {
      ++out.fragmentations;
      it->second = track;
    }
  }
  return out;
}

MetricsSummary compute_metrics(const ReplayLog& log) {
  MetricsAccumulator acc(log.header);
  for (const auto& r : log.records) acc.add(r);
  return acc.finish();
}

}  // namespace distbot::engine
