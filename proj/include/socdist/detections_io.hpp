#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace socdist {

/// Axis-aligned box in image pixels; (x1, y1) is the top-left corner.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }

  /// True when all coordinates are finite, non-negative and the box has
  /// positive extent in both directions.
  bool valid() const noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline constexpr int kDefaultPersonClass = 1;
inline constexpr double kDefaultMinScore = 0.7;

struct Detection {
  BoundingBox bbox;
  int class_id = kDefaultPersonClass;
  double score = 1.0;
  // Run-length encoded mask, carried through untouched.
  std::optional<std::string> mask;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Frame {
  std::int64_t frame_index = 0;
  std::optional<double> timestamp_s;
  int image_width = 0;
  int image_height = 0;
  std::vector<Detection> detections;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// A detection record dropped during ingest (degenerate box, bad score).
struct Rejection {
  std::size_t line = 0;
  std::int64_t frame_index = 0;
  std::size_t det_index = 0;  // position within the frame's "dets" array
  std::string reason;
};

/// Clamps `box` to [0, width] x [0, height]. Returns nullopt if the clamped
/// box has zero width or height.
std::optional<BoundingBox> clamp_to_frame(const BoundingBox& box, int width,
                                          int height);

/// Incremental reader over a line-delimited detection stream. Holds one line
/// in memory at a time.
class DetectionStreamReader {
 public:
  explicit DetectionStreamReader(std::istream& in) : in_(in) {}

  /// Next frame in file order, or nullopt at end of input. Throws ParseError
  /// on a malformed line or a frame index that does not strictly increase.
  std::optional<Frame> next();

  const std::vector<Rejection>& rejections() const noexcept {
    return rejections_;
  }
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_index_;
  std::vector<Rejection> rejections_;
};

struct ParsedStream {
  std::vector<Frame> frames;
  std::vector<Rejection> rejections;
};

ParsedStream parse_stream(std::istream& in);
ParsedStream parse_stream_string(const std::string& text);

/// Parses one record. `line` is used for error reporting only; rejected
/// detections are appended to `rejections`.
Frame parse_frame_line(const std::string& text, std::size_t line,
                       std::vector<Rejection>* rejections);

/// One line of the wire format, without trailing newline.
std::string serialize_frame(const Frame& frame);

/// Keeps detections with class_id == person_class and score >= min_score, in
/// their original order.
Frame filter_people(const Frame& frame, int person_class = kDefaultPersonClass,
                    double min_score = kDefaultMinScore);

}  // namespace socdist
