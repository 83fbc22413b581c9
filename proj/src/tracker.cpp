#include "socdist/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "socdist/error.hpp"

namespace socdist {

Point2 centroid_of(const BoundingBox& bbox) noexcept {
  return {(bbox.x1 + bbox.x2) / 2.0, (bbox.y1 + bbox.y2) / 2.0};
}

CentroidTracker::CentroidTracker(TrackerConfig config) : config_(config) {
  if (config_.max_disappeared < 0) {
    throw ParameterError("tracker.max_disappeared must be non-negative");
  }
  if (!(config_.max_match_distance > 0.0)) {
    throw ParameterError("tracker.max_match_distance must be positive");
  }
}

std::vector<Assignment> CentroidTracker::update(const Frame& people) {
  const auto& dets = people.detections;

  struct Candidate {
    double distance;
    std::size_t track;
    std::size_t det;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(tracks_.size() * dets.size());
  std::vector<Point2> centroids;
  centroids.reserve(dets.size());
  for (const auto& d : dets) centroids.push_back(centroid_of(d.bbox));

  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const double dist = std::hypot(centroids[d].x - tracks_[t].centroid.x,
                                     centroids[d].y - tracks_[t].centroid.y);
      if (dist <= config_.max_match_distance) candidates.push_back({dist, t, d});
    }
  }
  // tracks_ is sorted by id, so the track index orders like the id.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::tie(a.distance, a.track, a.det) <
                     std::tie(b.distance, b.track, b.det);
            });

  std::vector<bool> track_used(tracks_.size(), false);
  std::vector<std::optional<TrackId>> det_owner(dets.size());
  for (const auto& c : candidates) {
    if (track_used[c.track] || det_owner[c.det]) continue;
    track_used[c.track] = true;
    det_owner[c.det] = tracks_[c.track].id;
    Track& tr = tracks_[c.track];
    tr.bbox = dets[c.det].bbox;
    tr.centroid = centroids[c.det];
    tr.disappeared_count = 0;
    tr.last_seen_frame = people.frame_index;
  }

  std::vector<Track> kept;
  kept.reserve(tracks_.size() + dets.size());
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track tr = tracks_[t];
    if (!track_used[t] && ++tr.disappeared_count > config_.max_disappeared) {
      continue;
    }
    kept.push_back(tr);
  }
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (det_owner[d]) continue;
    const TrackId id = next_id_++;
    det_owner[d] = id;
    kept.push_back({id, centroids[d], dets[d].bbox, 0, people.frame_index});
  }
  tracks_ = std::move(kept);

  std::vector<Assignment> out;
  out.reserve(dets.size());
  for (std::size_t d = 0; d < dets.size(); ++d) out.push_back({*det_owner[d], dets[d]});
  return out;
}

}  // namespace socdist
