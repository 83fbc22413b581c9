#pragma once

#include <optional>
#include <vector>

#include "socdist/calibration.hpp"
#include "socdist/tracker.hpp"

namespace socdist {

inline constexpr double kDefaultThresholdM = 1.8;
inline constexpr double kDefaultMinBboxWidthPx = 2.0;

struct GeometryConfig {
  double threshold_m = kDefaultThresholdM;
  double min_bbox_width_px = kDefaultMinBboxWidthPx;
};

/// One tracked person's depth estimate.
struct PersonDistance {
  TrackId track_id = 0;
  double depth_m = 0.0;     // distance from the camera
  double width_px = 0.0;    // bbox width
  double centroid_x = 0.0;  // horizontal centroid, pixels
};

/// All intermediate quantities for one unordered pair, id_a < id_b.
struct PairMeasurement {
  TrackId id_a = 0;
  TrackId id_b = 0;
  double depth_delta_m = 0.0;  // |Y_b - Y_a|
  double horiz_px = 0.0;       // |x_b - x_a|
  double avg_width_px = 0.0;   // (P_a + P_b) / 2
  double ppm = 0.0;            // avg_width_px / W
  double horiz_m = 0.0;        // horiz_px / ppm
  double distance_m = 0.0;     // hypot(horiz_m, depth_delta_m)
  bool violation = false;      // distance_m < threshold
};

/// Depth Y = F * W / P for a person's box. Returns nullopt when the box is
/// narrower than `min_bbox_width_px`.
std::optional<PersonDistance> estimate_depth(
    const CameraCalibration& calib, TrackId id, const BoundingBox& bbox,
    double min_bbox_width_px = kDefaultMinBboxWidthPx);

PairMeasurement pair_distance(const CameraCalibration& calib,
                              const PersonDistance& a, const PersonDistance& b,
                              double threshold_m = kDefaultThresholdM);

/// One measurement per unordered pair, sorted by (id_a, id_b). Ids must be
/// distinct. With `jobs` > 1 pairs are evaluated on worker threads; the
/// result is identical.
std::vector<PairMeasurement> all_pairs(const CameraCalibration& calib,
                                       const std::vector<PersonDistance>& persons,
                                       double threshold_m = kDefaultThresholdM,
                                       unsigned jobs = 1);

}  // namespace socdist
