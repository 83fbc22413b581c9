#include "socdist/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "socdist/error.hpp"

namespace socdist {

using nlohmann::json;

WorldPosition ScenePerson::position_at(std::int64_t frame) const {
  if (!samples.empty()) {
    return samples.at(static_cast<std::size_t>(frame));
  }
  const double t = static_cast<double>(frame);
  return {start.x_m + velocity.x_m * t, start.z_m + velocity.z_m * t};
}

void validate_scene(const GroundTruthScene& s) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(s.focal_length_px)) throw ParameterError("scene: focal_length_px must be positive");
  if (s.image_width <= 0 || s.image_height <= 0) {
    throw ParameterError("scene: image size must be positive");
  }
  if (!std::isfinite(s.principal_x) || !std::isfinite(s.principal_y)) {
    throw ParameterError("scene: principal point must be finite");
  }
  if (!std::isfinite(s.camera_height_m)) throw ParameterError("scene: camera_height_m must be finite");
  if (s.frame_count < 0) throw ParameterError("scene: frame_count must be non-negative");
  if (s.fps && !positive(*s.fps)) throw ParameterError("scene: fps must be positive");
  if (!positive(s.threshold_m)) throw ParameterError("scene: threshold_m must be positive");
  if (!(s.noise.jitter_px >= 0.0) || !std::isfinite(s.noise.jitter_px)) {
    throw ParameterError("scene: noise.jitter_px must be >= 0");
  }
  if (!(s.noise.dropout_rate >= 0.0 && s.noise.dropout_rate < 1.0)) {
    throw ParameterError("scene: noise.dropout_rate must lie in [0,1)");
  }
  std::set<int> ids;
  for (const auto& p : s.persons) {
    const std::string who = "scene: person " + std::to_string(p.id);
    if (!ids.insert(p.id).second) throw ParameterError(who + " is duplicated");
    if (!positive(p.width_m) || !positive(p.height_m)) {
      throw ParameterError(who + " must have positive width and height");
    }
    if (!p.samples.empty() &&
        static_cast<std::int64_t>(p.samples.size()) < s.frame_count) {
      throw ParameterError(who + " trajectory is shorter than frame_count");
    }
    for (std::int64_t f = 0; f < s.frame_count; ++f) {
      const WorldPosition w = p.position_at(f);
      if (!std::isfinite(w.x_m) || !std::isfinite(w.z_m)) {
        throw ParameterError(who + " has a non-finite position at frame " + std::to_string(f));
      }
      if (w.z_m <= 0.0) {
        throw ParameterError(who + " has non-positive depth at frame " + std::to_string(f));
      }
    }
  }
  for (const auto& d : s.dropouts) {
    if (!ids.count(d.person_id)) {
      throw ParameterError("scene: dropout refers to unknown person " +
                           std::to_string(d.person_id));
    }
    if (d.start_frame < 0 || d.length < 0) {
      throw ParameterError("scene: dropout start and length must be non-negative");
    }
  }
}

namespace {

WorldPosition read_position(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw DataError(std::string("scene: ") + what + " must be [x_m, z_m]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      throw DataError("scene: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("scene: field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

GroundTruthScene parse_scene(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("scene: not valid JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw DataError("scene: top level must be an object");
  check_keys(doc,
             {"focal_length_px", "image_width", "image_height", "principal_point",
              "camera_height_m", "frame_count", "fps", "threshold_m", "noise",
              "persons", "dropouts"},
             "scene");

  GroundTruthScene s;
  s.focal_length_px = get_or(doc, "focal_length_px", s.focal_length_px);
  s.image_width = get_or(doc, "image_width", s.image_width);
  s.image_height = get_or(doc, "image_height", s.image_height);
  s.principal_x = s.image_width / 2.0;
  s.principal_y = s.image_height / 2.0;
  if (auto it = doc.find("principal_point"); it != doc.end()) {
    const WorldPosition pp = read_position(*it, "principal_point");
    s.principal_x = pp.x_m;
    s.principal_y = pp.z_m;
  }
  s.camera_height_m = get_or(doc, "camera_height_m", s.camera_height_m);
  s.frame_count = get_or<std::int64_t>(doc, "frame_count", s.frame_count);
  if (auto it = doc.find("fps"); it != doc.end() && !it->is_null()) {
    s.fps = get_or(doc, "fps", 0.0);
  }
  s.threshold_m = get_or(doc, "threshold_m", s.threshold_m);

  if (auto it = doc.find("noise"); it != doc.end()) {
    if (!it->is_object()) throw DataError("scene: noise must be an object");
    check_keys(*it, {"pixel_quantization", "jitter_px", "dropout_rate"}, "noise");
    s.noise.pixel_quantization = get_or(*it, "pixel_quantization", false);
    s.noise.jitter_px = get_or(*it, "jitter_px", 0.0);
    s.noise.dropout_rate = get_or(*it, "dropout_rate", 0.0);
  }

  if (auto it = doc.find("persons"); it != doc.end()) {
    if (!it->is_array()) throw DataError("scene: persons must be an array");
    int next_id = 0;
    for (const auto& pj : *it) {
      if (!pj.is_object()) throw DataError("scene: person must be an object");
      check_keys(pj, {"id", "width_m", "height_m", "position", "velocity", "trajectory"},
                 "person");
      ScenePerson p;
      p.id = get_or(pj, "id", next_id);
      next_id = p.id + 1;
      p.width_m = get_or(pj, "width_m", p.width_m);
      p.height_m = get_or(pj, "height_m", p.height_m);
      if (auto t = pj.find("trajectory"); t != pj.end()) {
        if (!t->is_array()) throw DataError("scene: trajectory must be an array");
        for (const auto& w : *t) p.samples.push_back(read_position(w, "trajectory entry"));
      } else if (auto pos = pj.find("position"); pos != pj.end()) {
        p.start = read_position(*pos, "position");
      } else {
        throw DataError("scene: person needs \"position\" or \"trajectory\"");
      }
      if (auto v = pj.find("velocity"); v != pj.end()) {
        p.velocity = read_position(*v, "velocity");
      }
      s.persons.push_back(std::move(p));
    }
  }

  if (auto it = doc.find("dropouts"); it != doc.end()) {
    if (!it->is_array()) throw DataError("scene: dropouts must be an array");
    for (const auto& dj : *it) {
      if (!dj.is_object()) throw DataError("scene: dropout must be an object");
      check_keys(dj, {"person", "start", "length"}, "dropout");
      s.dropouts.push_back({get_or(dj, "person", 0), get_or<std::int64_t>(dj, "start", 0),
                            get_or<std::int64_t>(dj, "length", 0)});
    }
  }

  try {
    validate_scene(s);
  } catch (const ParameterError& e) {
    throw DataError(e.what());
  }
  return s;
}

GroundTruthScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

ExactProjection project_person(const GroundTruthScene& s, const ScenePerson& p,
                               std::int64_t frame) {
  const WorldPosition w = p.position_at(frame);
  const double f = s.focal_length_px;
  const double u = s.principal_x + f * w.x_m / w.z_m;
  const double half_width = f * p.width_m / (2.0 * w.z_m);
  // Image y grows downward; the camera sits camera_height_m above the ground.
  const double head = s.principal_y + f * (s.camera_height_m - p.height_m) / w.z_m;
  const double feet = s.principal_y + f * s.camera_height_m / w.z_m;

  ExactProjection out;
  out.bbox = {u - half_width, head, u + half_width, feet};
  out.in_view = out.bbox.x1 >= 0.0 && out.bbox.y1 >= 0.0 &&
                out.bbox.x2 <= s.image_width && out.bbox.y2 <= s.image_height;
  return out;
}

namespace {

bool scripted_out(const GroundTruthScene& s, int pid, std::int64_t frame) {
  return std::any_of(s.dropouts.begin(), s.dropouts.end(), [&](const ScriptedDropout& d) {
    return d.person_id == pid && frame >= d.start_frame && frame < d.start_frame + d.length;
  });
}

}  // namespace

Frame project(const GroundTruthScene& s, std::int64_t frame_index, std::uint64_t seed) {
  if (frame_index < 0 || frame_index >= s.frame_count) {
    throw ParameterError("project: frame index out of range");
  }
  Frame frame;
  frame.frame_index = frame_index;
  if (s.fps) frame.timestamp_s = static_cast<double>(frame_index) / *s.fps;
  frame.image_width = s.image_width;
  frame.image_height = s.image_height;

  const auto fi = static_cast<std::uint64_t>(frame_index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fi), static_cast<std::uint32_t>(fi >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, s.noise.jitter_px > 0.0 ? s.noise.jitter_px : 1.0);

  for (const auto& p : s.persons) {
    const ExactProjection exact = project_person(s, p, frame_index);
    // Draws happen for every person so that one person's visibility does not
    // shift the random stream of the others.
    const bool dropped = unit(rng) < s.noise.dropout_rate;
    BoundingBox box = exact.bbox;
    if (s.noise.jitter_px > 0.0) {
      box.x1 += jitter(rng);
      box.y1 += jitter(rng);
      box.x2 += jitter(rng);
      box.y2 += jitter(rng);
    }
    if (!exact.in_view || dropped || scripted_out(s, p.id, frame_index)) continue;
    if (s.noise.pixel_quantization) {
      box = {std::round(box.x1), std::round(box.y1), std::round(box.x2), std::round(box.y2)};
    }
    auto clamped = clamp_to_frame(box, s.image_width, s.image_height);
    if (!clamped) continue;
    Detection det;
    det.bbox = *clamped;
    det.class_id = kDefaultPersonClass;
    det.score = 1.0;
    frame.detections.push_back(det);
  }
  return frame;
}

GroundTruthRecord ground_truth(const GroundTruthScene& s, std::int64_t frame_index) {
  GroundTruthRecord rec;
  rec.frame_index = frame_index;
  for (const auto& p : s.persons) {
    const ExactProjection exact = project_person(s, p, frame_index);
    if (!exact.in_view) continue;
    const WorldPosition w = p.position_at(frame_index);
    rec.persons.push_back({p.id, w.x_m, w.z_m, (exact.bbox.x1 + exact.bbox.x2) / 2.0,
                           (exact.bbox.y1 + exact.bbox.y2) / 2.0});
  }
  std::sort(rec.persons.begin(), rec.persons.end(),
            [](const auto& a, const auto& b) { return a.pid < b.pid; });
  for (std::size_t i = 0; i < rec.persons.size(); ++i) {
    for (std::size_t j = i + 1; j < rec.persons.size(); ++j) {
      const auto& a = rec.persons[i];
      const auto& b = rec.persons[j];
      const double d = std::hypot(b.x_m - a.x_m, b.z_m - a.z_m);
      rec.pairs.push_back({a.pid, b.pid, d, d < s.threshold_m});
    }
  }
  return rec;
}

SimulationOutput generate(const GroundTruthScene& scene, std::uint64_t seed) {
  validate_scene(scene);
  SimulationOutput out;
  out.detections.reserve(static_cast<std::size_t>(scene.frame_count));
  out.truth.reserve(static_cast<std::size_t>(scene.frame_count));
  for (std::int64_t f = 0; f < scene.frame_count; ++f) {
    out.detections.push_back(project(scene, f, seed));
    out.truth.push_back(ground_truth(scene, f));
  }
  return out;
}

std::string serialize_truth(const GroundTruthRecord& r) {
  using ojson = nlohmann::ordered_json;
  ojson persons = ojson::array();
  for (const auto& p : r.persons) {
    ojson o;
    o["pid"] = p.pid;
    o["x_m"] = p.x_m;
    o["z_m"] = p.z_m;
    o["cx_px"] = p.cx_px;
    o["cy_px"] = p.cy_px;
    persons.push_back(std::move(o));
  }
  ojson pairs = ojson::array();
  for (const auto& p : r.pairs) {
    ojson o;
    o["a"] = p.a;
    o["b"] = p.b;
    o["d_m"] = p.d_m;
    o["violation"] = p.violation;
    pairs.push_back(std::move(o));
  }
  ojson doc;
  doc["frame"] = r.frame_index;
  doc["persons"] = std::move(persons);
  doc["pairs"] = std::move(pairs);
  return doc.dump();
}

GroundTruthRecord parse_truth_line(const std::string& text, std::size_t line) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed truth record (") + e.what() + ")");
  }
  auto num = [&](const json& o, const char* k) {
    auto it = o.find(k);
    if (it == o.end() || !it->is_number()) {
      throw ParseError(line, std::string("truth: missing numeric field \"") + k + "\"");
    }
    return it->get<double>();
  };
  auto integer = [&](const json& o, const char* k) {
    auto it = o.find(k);
    if (it == o.end() || !it->is_number_integer()) {
      throw ParseError(line, std::string("truth: missing integer field \"") + k + "\"");
    }
    return it->get<std::int64_t>();
  };
  auto array = [&](const json& o, const char* k) -> const json& {
    auto it = o.find(k);
    if (it == o.end() || !it->is_array()) {
      throw ParseError(line, std::string("truth: missing array field \"") + k + "\"");
    }
    return *it;
  };
  if (!doc.is_object()) throw ParseError(line, "truth record must be an object");

  GroundTruthRecord r;
  r.frame_index = integer(doc, "frame");
  for (const auto& p : array(doc, "persons")) {
    TruthPerson tp;
    tp.pid = static_cast<int>(integer(p, "pid"));
    tp.x_m = num(p, "x_m");
    tp.z_m = num(p, "z_m");
    if (!p.contains("cx_px") || !p.contains("cy_px")) {
      throw ParseError(line, "truth: person lacks projected centroid (cx_px, cy_px)");
    }
    tp.cx_px = num(p, "cx_px");
    tp.cy_px = num(p, "cy_px");
    r.persons.push_back(tp);
  }
  for (const auto& p : array(doc, "pairs")) {
    TruthPair tp;
    tp.a = static_cast<int>(integer(p, "a"));
    tp.b = static_cast<int>(integer(p, "b"));
    tp.d_m = num(p, "d_m");
    if (auto v = p.find("violation"); v != p.end() && v->is_boolean()) {
      tp.violation = v->get<bool>();
    }
    r.pairs.push_back(tp);
  }
  return r;
}

}  // namespace socdist
