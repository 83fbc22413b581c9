#include "socdist/detections_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "socdist/error.hpp"

namespace socdist {

using nlohmann::json;

bool BoundingBox::valid() const noexcept {
  for (double v : {x1, y1, x2, y2}) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return x2 > x1 && y2 > y1;
}

std::optional<BoundingBox> clamp_to_frame(const BoundingBox& box, int width,
                                          int height) {
  const double w = width;
  const double h = height;
  BoundingBox out{std::clamp(box.x1, 0.0, w), std::clamp(box.y1, 0.0, h),
                  std::clamp(box.x2, 0.0, w), std::clamp(box.y2, 0.0, h)};
  if (!(out.x2 > out.x1) || !(out.y2 > out.y1)) return std::nullopt;
  return out;
}

namespace {

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(line, std::string("missing field \"") + key + "\"");
  }
  return *it;
}

std::int64_t require_int(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_number_integer()) {
    throw ParseError(line, std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<std::int64_t>();
}

double require_number(const json& v, const char* what, std::size_t line) {
  if (!v.is_number()) {
    throw ParseError(line, std::string(what) + " must be a number");
  }
  return v.get<double>();
}

}  // namespace

Frame parse_frame_line(const std::string& text, std::size_t line,
                       std::vector<Rejection>* rejections) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed record (") + e.what() + ")");
  }
  if (!doc.is_object()) throw ParseError(line, "record must be an object");

  Frame frame;
  frame.frame_index = require_int(doc, "frame", line);
  if (frame.frame_index < 0) throw ParseError(line, "negative frame index");

  if (auto it = doc.find("t"); it != doc.end() && !it->is_null()) {
    frame.timestamp_s = require_number(*it, "field \"t\"", line);
  }
  const auto w = require_int(doc, "w", line);
  const auto h = require_int(doc, "h", line);
  if (w <= 0 || h <= 0 || w > INT32_MAX || h > INT32_MAX) {
    throw ParseError(line, "image dimensions must be positive");
  }
  frame.image_width = static_cast<int>(w);
  frame.image_height = static_cast<int>(h);

  const json& dets = require(doc, "dets", line);
  if (!dets.is_array()) throw ParseError(line, "field \"dets\" must be an array");

  auto reject = [&](std::size_t i, std::string reason) {
    if (rejections) {
      rejections->push_back({line, frame.frame_index, i, std::move(reason)});
    }
  };

  for (std::size_t i = 0; i < dets.size(); ++i) {
    const json& d = dets[i];
    if (!d.is_object()) throw ParseError(line, "detection must be an object");
    const json& bb = require(d, "bbox", line);
    if (!bb.is_array() || bb.size() != 4) {
      throw ParseError(line, "field \"bbox\" must be [x1,y1,x2,y2]");
    }
    BoundingBox raw{require_number(bb[0], "bbox coordinate", line),
                    require_number(bb[1], "bbox coordinate", line),
                    require_number(bb[2], "bbox coordinate", line),
                    require_number(bb[3], "bbox coordinate", line)};

    Detection det;
    const auto cls = require_int(d, "class", line);
    if (cls < INT32_MIN || cls > INT32_MAX) throw ParseError(line, "class id out of range");
    det.class_id = static_cast<int>(cls);
    det.score = require_number(require(d, "score", line), "field \"score\"", line);
    if (auto it = d.find("mask"); it != d.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line, "field \"mask\" must be a string or null");
      det.mask = it->get<std::string>();
    }

    if (!(raw.x2 > raw.x1) || !(raw.y2 > raw.y1)) {
      reject(i, "degenerate bbox");
      continue;
    }
    if (!(det.score >= 0.0 && det.score <= 1.0)) {
      reject(i, "score outside [0,1]");
      continue;
    }
    auto clamped = clamp_to_frame(raw, frame.image_width, frame.image_height);
    if (!clamped) {
      reject(i, "bbox collapses when clamped to frame");
      continue;
    }
    det.bbox = *clamped;
    frame.detections.push_back(std::move(det));
  }
  return frame;
}

std::optional<Frame> DetectionStreamReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Frame frame = parse_frame_line(text, line_, &rejections_);
    if (last_index_ && frame.frame_index <= *last_index_) {
      throw ParseError(line_, "non-monotonic frame index");
    }
    last_index_ = frame.frame_index;
    return frame;
  }
  return std::nullopt;
}

ParsedStream parse_stream(std::istream& in) {
  DetectionStreamReader reader(in);
  ParsedStream out;
  while (auto frame = reader.next()) out.frames.push_back(std::move(*frame));
  out.rejections = reader.rejections();
  return out;
}

ParsedStream parse_stream_string(const std::string& text) {
  std::istringstream in(text);
  return parse_stream(in);
}

std::string serialize_frame(const Frame& frame) {
  using ojson = nlohmann::ordered_json;
  ojson dets = ojson::array();
  for (const auto& d : frame.detections) {
    ojson det;
    det["bbox"] = {d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2};
    det["class"] = d.class_id;
    det["score"] = d.score;
    det["mask"] = d.mask ? ojson(*d.mask) : ojson(nullptr);
    dets.push_back(std::move(det));
  }
  ojson doc;
  doc["frame"] = frame.frame_index;
  doc["t"] = frame.timestamp_s ? ojson(*frame.timestamp_s) : ojson(nullptr);
  doc["w"] = frame.image_width;
  doc["h"] = frame.image_height;
  doc["dets"] = std::move(dets);
  return doc.dump();
}

Frame filter_people(const Frame& frame, int person_class, double min_score) {
  Frame out = frame;
  out.detections.clear();
  std::copy_if(frame.detections.begin(), frame.detections.end(),
               std::back_inserter(out.detections), [&](const Detection& d) {
                 return d.class_id == person_class && d.score >= min_score;
               });
  return out;
}

}  // namespace socdist
