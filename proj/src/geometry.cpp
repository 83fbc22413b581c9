#include "socdist/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "socdist/error.hpp"

namespace socdist {

std::optional<PersonDistance> estimate_depth(const CameraCalibration& calib,
                                             TrackId id, const BoundingBox& bbox,
                                             double min_bbox_width_px) {
  const double width = bbox_width_px(bbox);
  if (!(width >= min_bbox_width_px) || width <= 0.0) return std::nullopt;
  const double depth = calib.focal_length_px() * calib.known_width_m() / width;
  if (!std::isfinite(depth) || depth <= 0.0) return std::nullopt;
  return PersonDistance{id, depth, width, centroid_of(bbox).x};
}

PairMeasurement pair_distance(const CameraCalibration& calib,
                              const PersonDistance& a, const PersonDistance& b,
                              double threshold_m) {
  if (!(threshold_m > 0.0)) throw ParameterError("threshold must be positive");
  PairMeasurement m;
  m.id_a = std::min(a.track_id, b.track_id);
  m.id_b = std::max(a.track_id, b.track_id);
  m.depth_delta_m = std::abs(b.depth_m - a.depth_m);
  m.horiz_px = std::abs(b.centroid_x - a.centroid_x);
  m.avg_width_px = (a.width_px + b.width_px) / 2.0;
  m.ppm = m.avg_width_px / calib.known_width_m();
  m.horiz_m = m.horiz_px / m.ppm;
  m.distance_m = std::sqrt(m.horiz_m * m.horiz_m + m.depth_delta_m * m.depth_delta_m);
  m.violation = m.distance_m < threshold_m;
  return m;
}

std::vector<PairMeasurement> all_pairs(const CameraCalibration& calib,
                                       const std::vector<PersonDistance>& persons,
                                       double threshold_m, unsigned jobs) {
  if (!(threshold_m > 0.0)) throw ParameterError("threshold must be positive");
  std::vector<PersonDistance> sorted = persons;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].track_id == sorted[i - 1].track_id) {
      throw ParameterError("all_pairs: duplicate track id " +
                           std::to_string(sorted[i].track_id));
    }
  }
  const std::size_t n = sorted.size();
  if (n < 2) return {};

  std::vector<std::pair<std::size_t, std::size_t>> index;
  index.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) index.emplace_back(i, j);
  }
  std::vector<PairMeasurement> out(index.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      out[k] = pair_distance(calib, sorted[index[k].first], sorted[index[k].second],
                             threshold_m);
    }
  };

  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1u), index.size());
  if (workers <= 1) {
    work(0, index.size());
    return out;
  }
  std::vector<std::jthread> threads;
  const std::size_t chunk = (index.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < index.size(); begin += chunk) {
    threads.emplace_back(work, begin, std::min(index.size(), begin + chunk));
  }
  threads.clear();
  return out;
}

}  // namespace socdist
