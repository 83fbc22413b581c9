#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socdist/detections_io.hpp"

namespace socdist {

/// Ground-plane position: lateral offset X and depth Z, metres, camera frame.
struct WorldPosition {
  double x_m = 0.0;
  double z_m = 0.0;
};

struct NoiseModel {
  bool pixel_quantization = false;  // round every coordinate to an integer
  double jitter_px = 0.0;           // Gaussian sigma per box corner
  double dropout_rate = 0.0;        // per person, per frame
};

/// Deterministic removal of one person's detections for `length` frames.
struct ScriptedDropout {
  int person_id = 0;
  std::int64_t start_frame = 0;
  std::int64_t length = 0;
};

struct ScenePerson {
  int id = 0;
  double width_m = 0.5;
  double height_m = 1.7;
  WorldPosition start;
  WorldPosition velocity;             // metres per frame
  std::vector<WorldPosition> samples;  // if non-empty, one entry per frame

  WorldPosition position_at(std::int64_t frame) const;
};

/// Pinhole camera with zero tilt looking along +Z, mounted
/// `camera_height_m` above a flat ground plane.
struct GroundTruthScene {
  double focal_length_px = 1000.0;
  int image_width = 1920;
  int image_height = 1080;
  double principal_x = 960.0;
  double principal_y = 540.0;
  double camera_height_m = 1.5;
  std::int64_t frame_count = 1;
  std::optional<double> fps;
  double threshold_m = 1.8;
  NoiseModel noise;
  std::vector<ScenePerson> persons;
  std::vector<ScriptedDropout> dropouts;
};

/// Throws ParameterError describing the first violated constraint.
void validate_scene(const GroundTruthScene& scene);

GroundTruthScene parse_scene(const std::string& text);
GroundTruthScene load_scene(const std::string& path);

/// Noise-free projection of one person. `in_view` is false when any part of
/// the box falls outside the image.
struct ExactProjection {
  BoundingBox bbox;
  bool in_view = false;
};
ExactProjection project_person(const GroundTruthScene& scene,
                               const ScenePerson& person, std::int64_t frame);

/// Detection frame for `frame_index`: exact projection of every in-view
/// person followed by jitter, quantization, clamping and dropout. Randomness
/// is derived from (seed, frame_index) only, so frames can be generated
/// independently.
Frame project(const GroundTruthScene& scene, std::int64_t frame_index,
              std::uint64_t seed = 0);

struct TruthPerson {
  int pid = 0;
  double x_m = 0.0;
  double z_m = 0.0;
  double cx_px = 0.0;  // exact projected bbox centroid
  double cy_px = 0.0;
};

struct TruthPair {
  int a = 0;
  int b = 0;
  double d_m = 0.0;
  bool violation = false;
};

/// In-view persons only; pairs sorted by (a, b), a < b.
struct GroundTruthRecord {
  std::int64_t frame_index = 0;
  std::vector<TruthPerson> persons;
  std::vector<TruthPair> pairs;
};

GroundTruthRecord ground_truth(const GroundTruthScene& scene, std::int64_t frame_index);

struct SimulationOutput {
  std::vector<Frame> detections;
  std::vector<GroundTruthRecord> truth;
};

SimulationOutput generate(const GroundTruthScene& scene, std::uint64_t seed = 0);

std::string serialize_truth(const GroundTruthRecord& record);
GroundTruthRecord parse_truth_line(const std::string& text, std::size_t line);

}  // namespace socdist
