#include "socdist/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "socdist/error.hpp"

namespace socdist {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "unlimited") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(out)) {
    throw ParameterError(key + ": expected a number, got \"" + v + "\"");
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError(key + ": expected an integer, got \"" + v + "\"");
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"detections.person_class",
       [](RunConfig& c, const auto& k, const auto& v) { c.pipeline.person_class = to_int<int>(k, v); }},
      {"detections.min_score",
       [](RunConfig& c, const auto& k, const auto& v) { c.pipeline.min_score = to_double(k, v); }},
      {"tracker.max_disappeared",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.pipeline.tracker.max_disappeared = to_int<int>(k, v);
       }},
      {"tracker.max_match_distance",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.pipeline.tracker.max_match_distance = to_double(k, v);
       }},
      {"geometry.threshold_m",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.pipeline.geometry.threshold_m = to_double(k, v);
       }},
      {"geometry.min_bbox_width_px",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.pipeline.geometry.min_bbox_width_px = to_double(k, v);
       }},
      {"calibration.known_width_m",
       [](RunConfig& c, const auto& k, const auto& v) { c.known_width_m = to_double(k, v); }},
      {"evaluator.match_gate_px",
       [](RunConfig& c, const auto& k, const auto& v) { c.match_gate_px = to_double(k, v); }},
      {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = to_int<std::uint64_t>(k, v); }},
      {"jobs", [](RunConfig& c, const auto& k, const auto& v) { c.pipeline.jobs = to_int<unsigned>(k, v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ParameterError("unknown config key \"" + key + "\"");
  it->second(config, key, trim(value));
}

void apply_config_text(RunConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    } catch (const ParameterError& e) {
      throw ParameterError("config line " + std::to_string(line) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str());
}

void validate(const RunConfig& c) {
  const auto& p = c.pipeline;
  if (!(p.geometry.threshold_m > 0.0) || !std::isfinite(p.geometry.threshold_m)) {
    throw ParameterError("threshold must be positive");
  }
  if (!(p.geometry.min_bbox_width_px >= 0.0)) {
    throw ParameterError("geometry.min_bbox_width_px must be non-negative");
  }
  if (!(p.min_score >= 0.0 && p.min_score <= 1.0)) {
    throw ParameterError("detections.min_score must lie in [0,1]");
  }
  if (p.tracker.max_disappeared < 0) {
    throw ParameterError("tracker.max_disappeared must be non-negative");
  }
  if (!(p.tracker.max_match_distance > 0.0)) {
    throw ParameterError("tracker.max_match_distance must be positive");
  }
  if (!(c.known_width_m > 0.0) || !std::isfinite(c.known_width_m)) {
    throw ParameterError("known width must be positive");
  }
  if (!(c.match_gate_px > 0.0)) throw ParameterError("evaluator.match_gate_px must be positive");
  if (p.jobs == 0) throw ParameterError("jobs must be at least 1");
}

}  // namespace socdist
