#pragma once

#include <string>

#include "socdist/detections_io.hpp"

namespace socdist {

inline constexpr double kDefaultKnownWidthM = 0.55;

/// Focal length recovered from a marker person of known width at a known
/// distance. The inputs are kept next to the result so a saved calibration
/// can be audited: focal_length_px == marker_distance_m * marker_width_px /
/// known_width_m.
class CameraCalibration {
 public:
  /// Validates and stores all four quantities. Throws ParameterError if any is
  /// non-finite or non-positive, or if they are mutually inconsistent beyond
  /// rounding.
  static CameraCalibration from_fields(double focal_length_px,
                                       double known_width_m,
                                       double marker_distance_m,
                                       double marker_width_px);

  double focal_length_px() const noexcept { return focal_length_px_; }
  double known_width_m() const noexcept { return known_width_m_; }
  double marker_distance_m() const noexcept { return marker_distance_m_; }
  double marker_width_px() const noexcept { return marker_width_px_; }

 private:
  CameraCalibration(double f, double w, double d, double p)
      : focal_length_px_(f), known_width_m_(w), marker_distance_m_(d),
        marker_width_px_(p) {}

  friend CameraCalibration calibrate(double, double, double);

  double focal_length_px_;
  double known_width_m_;
  double marker_distance_m_;
  double marker_width_px_;
};

/// Horizontal extent of the box in pixels.
double bbox_width_px(const BoundingBox& bbox) noexcept;

/// F = D * P / W.
CameraCalibration calibrate(double marker_width_px, double marker_distance_m,
                            double known_width_m);
CameraCalibration calibrate(const BoundingBox& marker_bbox,
                            double marker_distance_m,
                            double known_width_m = kDefaultKnownWidthM);

std::string serialize_calibration(const CameraCalibration& calib);
CameraCalibration parse_calibration(const std::string& text);
CameraCalibration load_calibration(const std::string& path);
void save_calibration(const CameraCalibration& calib, const std::string& path);

}  // namespace socdist
