#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socdist/calibration.hpp"
#include "socdist/detections_io.hpp"
#include "socdist/geometry.hpp"
#include "socdist/tracker.hpp"

namespace socdist {

struct PipelineConfig {
  int person_class = kDefaultPersonClass;
  double min_score = kDefaultMinScore;
  TrackerConfig tracker;
  GeometryConfig geometry;
  unsigned jobs = 1;
};

struct PersonReport {
  TrackId track_id = 0;
  BoundingBox bbox;
  std::optional<double> depth_m;  // nullopt when depth estimation rejected the box
};

struct FrameReport {
  std::int64_t frame_index = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<PersonReport> persons;  // sorted by track id
  std::vector<PairMeasurement> pairs;
  std::vector<std::pair<TrackId, TrackId>> violations;
};

/// Per-stream stage chain: person filter, tracker, depth, pairwise distance.
/// Frames must be fed in order; the tracker state lives inside.
class Pipeline {
 public:
  Pipeline(CameraCalibration calib, PipelineConfig config = {});

  FrameReport process(const Frame& frame);

  const CentroidTracker& tracker() const noexcept { return tracker_; }

 private:
  CameraCalibration calib_;
  PipelineConfig config_;
  CentroidTracker tracker_;
};

std::vector<FrameReport> process_stream(const std::vector<Frame>& frames,
                                        const CameraCalibration& calib,
                                        const PipelineConfig& config = {});

/// Report stream line. `verbose_pairs` adds the intermediate pair quantities.
std::string serialize_report(const FrameReport& report, bool verbose_pairs = false);
/// Throws ParseError. Image dimensions are not part of the wire format and
/// come back as zero.
FrameReport parse_report_line(const std::string& text, std::size_t line);

enum class OverlayKind { kBox, kLine, kLabel };

struct OverlayInstruction {
  OverlayKind kind = OverlayKind::kBox;
  // box: x1,y1,x2,y2; line: x1,y1,x2,y2; label: anchor x,y.
  std::vector<double> geometry;
  std::optional<std::string> text;
};

/// Drawing instructions for one report: a box and id label per person, and
/// for every violation a line between the two centroids with a distance
/// label (metres, two decimals). Coordinates are clamped to the frame when
/// its size is known.
std::vector<OverlayInstruction> render_overlay(const FrameReport& report);
std::string serialize_overlay(std::int64_t frame_index,
                              const std::vector<OverlayInstruction>& ops);

}  // namespace socdist
