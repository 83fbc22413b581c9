#include "socdist/calibration.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "socdist/error.hpp"

namespace socdist {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw ParameterError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

double bbox_width_px(const BoundingBox& bbox) noexcept { return bbox.x2 - bbox.x1; }

CameraCalibration calibrate(double marker_width_px, double marker_distance_m,
                            double known_width_m) {
  require_positive(marker_distance_m, "marker distance");
  require_positive(known_width_m, "known width");
  if (!std::isfinite(marker_width_px) || marker_width_px <= 0.0) {
    throw ParameterError("marker bbox is degenerate (non-positive width)");
  }
  const double focal = marker_distance_m * marker_width_px / known_width_m;
  require_positive(focal, "focal length");
  return CameraCalibration(focal, known_width_m, marker_distance_m, marker_width_px);
}

CameraCalibration calibrate(const BoundingBox& marker_bbox,
                            double marker_distance_m, double known_width_m) {
  if (!marker_bbox.valid()) {
    throw ParameterError("marker bbox is degenerate");
  }
  return calibrate(bbox_width_px(marker_bbox), marker_distance_m, known_width_m);
}

CameraCalibration CameraCalibration::from_fields(double focal_length_px,
                                                 double known_width_m,
                                                 double marker_distance_m,
                                                 double marker_width_px) {
  require_positive(focal_length_px, "focal_length_px");
  require_positive(known_width_m, "known_width_m");
  require_positive(marker_distance_m, "marker_distance_m");
  require_positive(marker_width_px, "marker_width_px");
  const double expected = marker_distance_m * marker_width_px / known_width_m;
  if (std::abs(expected - focal_length_px) > 1e-9 * expected) {
    throw ParameterError("focal_length_px is inconsistent with its marker inputs");
  }
  return CameraCalibration(focal_length_px, known_width_m, marker_distance_m,
                           marker_width_px);
}

std::string serialize_calibration(const CameraCalibration& calib) {
  nlohmann::ordered_json doc;
  doc["focal_length_px"] = calib.focal_length_px();
  doc["known_width_m"] = calib.known_width_m();
  doc["marker_distance_m"] = calib.marker_distance_m();
  doc["marker_width_px"] = calib.marker_width_px();
  return doc.dump(2) + "\n";
}

CameraCalibration parse_calibration(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("calibration file is not valid JSON: ") + e.what());
  }
  auto field = [&](const char* key) {
    auto it = doc.find(key);
    if (!doc.is_object() || it == doc.end() || !it->is_number()) {
      throw DataError(std::string("calibration file: missing numeric field \"") +
                      key + "\"");
    }
    return it->get<double>();
  };
  try {
    return CameraCalibration::from_fields(field("focal_length_px"),
                                          field("known_width_m"),
                                          field("marker_distance_m"),
                                          field("marker_width_px"));
  } catch (const ParameterError& e) {
    throw DataError(std::string("calibration file: ") + e.what());
  }
}

CameraCalibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open calibration file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_calibration(buf.str());
}

void save_calibration(const CameraCalibration& calib, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write calibration file " + path);
  out << serialize_calibration(calib);
}

}  // namespace socdist
