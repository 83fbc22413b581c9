#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "socdist/detections_io.hpp"

namespace socdist {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Midpoint of the box.
Point2 centroid_of(const BoundingBox& bbox) noexcept;

using TrackId = std::int64_t;

struct Track {
  TrackId id = 0;
  Point2 centroid;
  BoundingBox bbox;
  int disappeared_count = 0;
  std::int64_t last_seen_frame = 0;
};

struct TrackerConfig {
  int max_disappeared = 30;
  // Pixels; infinity disables gating.
  double max_match_distance = std::numeric_limits<double>::infinity();
};

struct Assignment {
  TrackId track_id = 0;
  Detection detection;
};

/// Centroid tracker with greedy, globally sorted nearest-centroid matching.
///
/// Candidate (track, detection) pairs are visited in ascending centroid
/// distance, ties broken by lower track id then lower detection index. A
/// pair is accepted when both sides are still free and the distance is within
/// `max_match_distance`. Leftover detections register new tracks in detection
/// order; leftover tracks age and are dropped once their disappeared count
/// exceeds `max_disappeared`. Ids are never reused.
///
/// Updates must be applied in frame order. Instances are independent.
class CentroidTracker {
 public:
  explicit CentroidTracker(TrackerConfig config = {});

  /// Matches the (already person-filtered) frame against registered tracks.
  /// Returns the assignments for tracks matched or registered this frame,
  /// in detection order.
  std::vector<Assignment> update(const Frame& people);

  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  TrackId next_id() const noexcept { return next_id_; }
  const TrackerConfig& config() const noexcept { return config_; }

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;  // sorted by id
  TrackId next_id_ = 0;
};

}  // namespace socdist
