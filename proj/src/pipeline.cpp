#include "socdist/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "socdist/error.hpp"

namespace socdist {

using ojson = nlohmann::ordered_json;

Pipeline::Pipeline(CameraCalibration calib, PipelineConfig config)
    : calib_(calib), config_(config), tracker_(config.tracker) {
  if (!(config_.geometry.threshold_m > 0.0)) {
    throw ParameterError("threshold must be positive");
  }
  if (!(config_.geometry.min_bbox_width_px >= 0.0)) {
    throw ParameterError("geometry.min_bbox_width_px must be non-negative");
  }
  if (!(config_.min_score >= 0.0 && config_.min_score <= 1.0)) {
    throw ParameterError("min_score must lie in [0,1]");
  }
}

FrameReport Pipeline::process(const Frame& frame) {
  const Frame people = filter_people(frame, config_.person_class, config_.min_score);
  std::vector<Assignment> matched = tracker_.update(people);
  std::sort(matched.begin(), matched.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });

  FrameReport report;
  report.frame_index = frame.frame_index;
  report.image_width = frame.image_width;
  report.image_height = frame.image_height;

  std::vector<PersonDistance> measured;
  for (const auto& a : matched) {
    auto depth = estimate_depth(calib_, a.track_id, a.detection.bbox,
                                config_.geometry.min_bbox_width_px);
    report.persons.push_back(
        {a.track_id, a.detection.bbox,
         depth ? std::optional<double>(depth->depth_m) : std::nullopt});
    if (depth) measured.push_back(*depth);
  }
  report.pairs = all_pairs(calib_, measured, config_.geometry.threshold_m, config_.jobs);
  for (const auto& p : report.pairs) {
    if (p.violation) report.violations.emplace_back(p.id_a, p.id_b);
  }
  return report;
}

std::vector<FrameReport> process_stream(const std::vector<Frame>& frames,
                                        const CameraCalibration& calib,
                                        const PipelineConfig& config) {
  Pipeline pipeline(calib, config);
  std::vector<FrameReport> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(pipeline.process(f));
  return out;
}

std::string serialize_report(const FrameReport& report, bool verbose_pairs) {
  ojson persons = ojson::array();
  for (const auto& p : report.persons) {
    ojson o;
    o["id"] = p.track_id;
    o["bbox"] = {p.bbox.x1, p.bbox.y1, p.bbox.x2, p.bbox.y2};
    o["depth_m"] = p.depth_m ? ojson(*p.depth_m) : ojson(nullptr);
    persons.push_back(std::move(o));
  }
  ojson pairs = ojson::array();
  for (const auto& m : report.pairs) {
    ojson o;
    o["a"] = m.id_a;
    o["b"] = m.id_b;
    o["d_m"] = m.distance_m;
    o["violation"] = m.violation;
    if (verbose_pairs) {
      o["y_ab_m"] = m.depth_delta_m;
      o["x_ab_px"] = m.horiz_px;
      o["p_ab_px"] = m.avg_width_px;
      o["ppm"] = m.ppm;
      o["x_ab_m"] = m.horiz_m;
    }
    pairs.push_back(std::move(o));
  }
  ojson doc;
  doc["frame"] = report.frame_index;
  doc["persons"] = std::move(persons);
  doc["pairs"] = std::move(pairs);
  return doc.dump();
}

namespace {

double number_at(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(line, std::string("report: missing numeric field \"") + key + "\"");
  }
  return it->get<double>();
}

TrackId id_at(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw ParseError(line, std::string("report: missing integer field \"") + key + "\"");
  }
  return it->get<TrackId>();
}

const nlohmann::json& array_at(const nlohmann::json& obj, const char* key,
                               std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw ParseError(line, std::string("report: missing array field \"") + key + "\"");
  }
  return *it;
}

}  // namespace

FrameReport parse_report_line(const std::string& text, std::size_t line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("malformed report (") + e.what() + ")");
  }
  if (!doc.is_object()) throw ParseError(line, "report must be an object");

  FrameReport r;
  r.frame_index = id_at(doc, "frame", line);
  for (const auto& p : array_at(doc, "persons", line)) {
    PersonReport pr;
    pr.track_id = id_at(p, "id", line);
    const auto& bb = array_at(p, "bbox", line);
    if (bb.size() != 4) throw ParseError(line, "report: bbox must have 4 numbers");
    for (const auto& v : bb) {
      if (!v.is_number()) throw ParseError(line, "report: bbox must have 4 numbers");
    }
    pr.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
               bb[3].get<double>()};
    if (auto it = p.find("depth_m"); it != p.end() && !it->is_null()) {
      pr.depth_m = number_at(p, "depth_m", line);
    }
    r.persons.push_back(pr);
  }
  for (const auto& p : array_at(doc, "pairs", line)) {
    PairMeasurement m;
    m.id_a = id_at(p, "a", line);
    m.id_b = id_at(p, "b", line);
    m.distance_m = number_at(p, "d_m", line);
    auto v = p.find("violation");
    if (v == p.end() || !v->is_boolean()) {
      throw ParseError(line, "report: missing boolean field \"violation\"");
    }
    m.violation = v->get<bool>();
    if (p.contains("y_ab_m")) {
      m.depth_delta_m = number_at(p, "y_ab_m", line);
      m.horiz_px = number_at(p, "x_ab_px", line);
      m.avg_width_px = number_at(p, "p_ab_px", line);
      m.ppm = number_at(p, "ppm", line);
      m.horiz_m = number_at(p, "x_ab_m", line);
    }
    if (m.violation) r.violations.emplace_back(m.id_a, m.id_b);
    r.pairs.push_back(m);
  }
  return r;
}

std::vector<OverlayInstruction> render_overlay(const FrameReport& report) {
  const bool bounded = report.image_width > 0 && report.image_height > 0;
  auto cx = [&](double x) {
    return bounded ? std::clamp(x, 0.0, double(report.image_width)) : x;
  };
  auto cy = [&](double y) {
    return bounded ? std::clamp(y, 0.0, double(report.image_height)) : y;
  };

  std::vector<OverlayInstruction> ops;
  for (const auto& p : report.persons) {
    const auto& b = p.bbox;
    ops.push_back({OverlayKind::kBox, {cx(b.x1), cy(b.y1), cx(b.x2), cy(b.y2)}, {}});
    ops.push_back({OverlayKind::kLabel, {cx(b.x1), cy(b.y1)}, std::to_string(p.track_id)});
  }
  auto find = [&](TrackId id) -> const PersonReport* {
    for (const auto& p : report.persons) {
      if (p.track_id == id) return &p;
    }
    return nullptr;
  };
  for (const auto& m : report.pairs) {
    if (!m.violation) continue;
    const PersonReport* a = find(m.id_a);
    const PersonReport* b = find(m.id_b);
    if (!a || !b) continue;
    const Point2 ca = centroid_of(a->bbox);
    const Point2 cb = centroid_of(b->bbox);
    ops.push_back({OverlayKind::kLine, {cx(ca.x), cy(ca.y), cx(cb.x), cy(cb.y)}, {}});
    char text[32];
    std::snprintf(text, sizeof text, "%.2f", m.distance_m);
    ops.push_back({OverlayKind::kLabel,
                   {cx((ca.x + cb.x) / 2.0), cy((ca.y + cb.y) / 2.0)},
                   std::string(text)});
  }
  return ops;
}

std::string serialize_overlay(std::int64_t frame_index,
                              const std::vector<OverlayInstruction>& ops) {
  ojson list = ojson::array();
  for (const auto& op : ops) {
    ojson o;
    switch (op.kind) {
      case OverlayKind::kBox: o["kind"] = "box"; break;
      case OverlayKind::kLine: o["kind"] = "line"; break;
      case OverlayKind::kLabel: o["kind"] = "label"; break;
    }
    o["geometry"] = op.geometry;
    o["text"] = op.text ? ojson(*op.text) : ojson(nullptr);
    list.push_back(std::move(o));
  }
  ojson doc;
  doc["frame"] = frame_index;
  doc["overlay"] = std::move(list);
  return doc.dump();
}

}  // namespace socdist
