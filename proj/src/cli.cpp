#include "socdist/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "socdist/calibration.hpp"
#include "socdist/config.hpp"
#include "socdist/detections_io.hpp"
#include "socdist/error.hpp"
#include "socdist/evaluator.hpp"
#include "socdist/pipeline.hpp"
#include "socdist/simulator.hpp"

namespace socdist {

namespace {

/// Config resolution shared by the subcommands: defaults < --config file <
/// per-key flags < shorthand flags.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> keyed;
  std::optional<double> threshold;
  std::optional<double> known_width;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Key-value config file");
    for (const auto& key : config_keys()) {
      // --seed and --jobs are already declared as shorthand flags.
      if (cmd->get_option_no_throw("--" + key) != nullptr) continue;
      cmd->add_option("--" + key, keyed[key], "Override config key " + key);
    }
  }

  RunConfig resolve(const CLI::App* cmd) const {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [key, value] : keyed) {
      const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
      if (opt != nullptr && opt->count() > 0) apply_setting(cfg, key, value);
    }
    if (threshold) cfg.pipeline.geometry.threshold_m = *threshold;
    if (known_width) cfg.known_width_m = *known_width;
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.pipeline.jobs = *jobs;
    validate(cfg);
    return cfg;
  }
};

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot open ") + what + " " + path);
  return in;
}

std::ofstream open_output(const std::string& path, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(std::string("cannot write ") + what + " " + path);
  return out;
}

void report_rejections(const std::vector<Rejection>& rejections, std::ostream& err) {
  for (const auto& r : rejections) {
    err << "rejected detection: frame " << r.frame_index << " index " << r.det_index
        << " (line " << r.line << "): " << r.reason << "\n";
  }
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(const std::string& path, const char* what, Parse parse) {
  auto in = open_input(path, what);
  std::vector<Record> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse(text, line));
  }
  return out;
}

struct CalibrateArgs {
  std::string detections, out;
  std::int64_t frame = 0;
  std::optional<std::size_t> det_index;
  std::optional<std::int64_t> track_id;
  std::vector<double> bbox;
  double marker_distance = 0.0;
};

int do_calibrate(const CalibrateArgs& a, const RunConfig& cfg, std::ostream& err) {
  std::optional<BoundingBox> marker;
  if (!a.bbox.empty()) {
    if (a.bbox.size() != 4) throw ParameterError("--bbox needs x1,y1,x2,y2");
    marker = BoundingBox{a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]};
  } else {
    auto in = open_input(a.detections, "detections file");
    DetectionStreamReader reader(in);
    CentroidTracker tracker(cfg.pipeline.tracker);
    while (auto frame = reader.next()) {
      if (frame->frame_index > a.frame) break;
      std::vector<Assignment> assigned;
      if (a.track_id) {
        assigned = tracker.update(
            filter_people(*frame, cfg.pipeline.person_class, cfg.pipeline.min_score));
      }
      if (frame->frame_index != a.frame) continue;
      if (a.det_index) {
        if (*a.det_index >= frame->detections.size()) {
          throw DataError("frame " + std::to_string(a.frame) + " has no detection index " +
                          std::to_string(*a.det_index));
        }
        marker = frame->detections[*a.det_index].bbox;
      } else {
        for (const auto& as : assigned) {
          if (as.track_id == *a.track_id) marker = as.detection.bbox;
        }
        if (!marker) {
          throw DataError("track " + std::to_string(*a.track_id) + " is not matched in frame " +
                          std::to_string(a.frame));
        }
      }
      break;
    }
    report_rejections(reader.rejections(), err);
    if (!marker) {
      throw DataError("frame " + std::to_string(a.frame) + " not found in " + a.detections);
    }
  }
  const CameraCalibration calib = calibrate(*marker, a.marker_distance, cfg.known_width_m);
  save_calibration(calib, a.out);
  err << "calibrate: focal length " << calib.focal_length_px() << " px (marker width "
      << calib.marker_width_px() << " px at " << calib.marker_distance_m() << " m)\n";
  return exit_code::kOk;
}

struct RunArgs {
  std::string detections, calibration, overlay, out;
  bool verbose_pairs = false;
};

int do_run(const RunArgs& a, const RunConfig& cfg, std::ostream& err) {
  const CameraCalibration calib = load_calibration(a.calibration);
  auto in = open_input(a.detections, "detections file");
  auto out = open_output(a.out, "report file");
  std::optional<std::ofstream> overlay;
  if (!a.overlay.empty()) overlay = open_output(a.overlay, "overlay file");

  DetectionStreamReader reader(in);
  Pipeline pipeline(calib, cfg.pipeline);
  std::size_t frames = 0, violations = 0;
  while (auto frame = reader.next()) {
    const FrameReport report = pipeline.process(*frame);
    out << serialize_report(report, a.verbose_pairs) << '\n';
    if (overlay) *overlay << serialize_overlay(report.frame_index, render_overlay(report)) << '\n';
    ++frames;
    violations += report.violations.size();
  }
  report_rejections(reader.rejections(), err);
  err << "run: " << frames << " frames, " << violations << " violation edges, "
      << reader.rejections().size() << " rejected detections\n";
  return exit_code::kOk;
}

struct SimulateArgs {
  std::string scene, out, truth;
};

int do_simulate(const SimulateArgs& a, const RunConfig& cfg, std::ostream& err) {
  const GroundTruthScene scene = load_scene(a.scene);
  auto dets = open_output(a.out, "detections file");
  auto truth = open_output(a.truth, "truth file");
  for (std::int64_t f = 0; f < scene.frame_count; ++f) {
    dets << serialize_frame(project(scene, f, cfg.seed)) << '\n';
    truth << serialize_truth(ground_truth(scene, f)) << '\n';
  }
  err << "simulate: " << scene.frame_count << " frames, " << scene.persons.size()
      << " persons, seed " << cfg.seed << "\n";
  return exit_code::kOk;
}

struct EvaluateArgs {
  std::string pred, truth, edges, out;
};

int do_evaluate(const EvaluateArgs& a, const RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
  if (a.truth.empty() && a.edges.empty()) {
    throw ParameterError("evaluate needs --truth or --edges");
  }
  const auto reports = read_lines<FrameReport>(a.pred, "report file", parse_report_line);
  EvaluationResult result;
  if (!a.edges.empty()) {
    const auto labels = read_lines<LabelledEdges>(a.edges, "edge file", parse_label_line);
    result = evaluate_against_labels(reports, labels);
  } else {
    const auto truth = read_lines<GroundTruthRecord>(a.truth, "truth file", parse_truth_line);
    result = evaluate_against_truth(
        reports, truth, {cfg.pipeline.geometry.threshold_m, cfg.match_gate_px});
  }
  auto file = open_output(a.out, "metrics file");
  file << serialize_evaluation(result);
  out << format_metrics_table(result.metrics);
  err << "evaluate: " << result.frames << " frames, " << result.counts.total()
      << " pair decisions, " << result.unmatched_predicted << " unmatched predicted, "
      << result.unmatched_truth << " unmatched truth\n";
  return exit_code::kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular social-distancing measurement from person detections"};
  app.name("socdist");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CalibrateArgs cal;
  ConfigOptions cal_cfg;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Solve focal length from a marker person");
  calibrate_cmd->add_option("--detections", cal.detections, "Detection stream (JSON lines)");
  auto* frame_opt =
      calibrate_cmd->add_option("--frame", cal.frame, "Frame index holding the marker");
  auto* det_index_opt = calibrate_cmd->add_option("--det-index", cal.det_index,
                                                  "Marker position within the frame's detections");
  auto* track_opt = calibrate_cmd->add_option("--track-id", cal.track_id,
                                              "Marker track id (tracker replayed up to --frame)");
  auto* bbox_opt = calibrate_cmd->add_option("--bbox", cal.bbox, "Raw marker box x1,y1,x2,y2")
                       ->delimiter(',')
                       ->expected(4);
  det_index_opt->excludes(track_opt)->excludes(bbox_opt);
  track_opt->excludes(bbox_opt);
  calibrate_cmd->add_option("--marker-distance", cal.marker_distance,
                            "Known marker distance from the camera, metres")
      ->required();
  calibrate_cmd->add_option("--known-width", cal_cfg.known_width, "Known person width, metres");
  calibrate_cmd->add_option("--out", cal.out, "Calibration file to write")->required();
  cal_cfg.attach(calibrate_cmd);

  RunArgs run;
  ConfigOptions run_cfg;
  auto* run_cmd = app.add_subcommand("run", "Track people and report pairwise distances");
  run_cmd->add_option("--detections", run.detections, "Detection stream (JSON lines)")->required();
  run_cmd->add_option("--calibration", run.calibration, "Calibration file")->required();
  run_cmd->add_option("--threshold", run_cfg.threshold, "Violation threshold, metres");
  run_cmd->add_option("--overlay", run.overlay, "Overlay instruction stream to write");
  run_cmd->add_option("--out", run.out, "Report stream to write")->required();
  run_cmd->add_flag("--verbose-pairs", run.verbose_pairs, "Include intermediate pair quantities");
  run_cmd->add_option("--jobs", run_cfg.jobs, "Worker threads for pairwise geometry");
  run_cfg.attach(run_cmd);

  SimulateArgs sim;
  ConfigOptions sim_cfg;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate detections and truth from a scene");
  sim_cmd->add_option("--scene", sim.scene, "Scene file (JSON)")->required();
  sim_cmd->add_option("--seed", sim_cfg.seed, "Noise seed");
  sim_cmd->add_option("--out", sim.out, "Detection stream to write")->required();
  sim_cmd->add_option("--truth", sim.truth, "Truth stream to write")->required();
  sim_cfg.attach(sim_cmd);

  EvaluateArgs ev;
  ConfigOptions ev_cfg;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score reports against truth or labelled edges");
  ev_cmd->add_option("--pred", ev.pred, "Report stream")->required();
  ev_cmd->add_option("--truth", ev.truth, "Simulator truth stream");
  ev_cmd->add_option("--edges", ev.edges, "Hand-labelled violation edges");
  ev_cmd->add_option("--threshold", ev_cfg.threshold, "Violation threshold, metres");
  ev_cmd->add_option("--out", ev.out, "Metrics file to write")->required();
  ev_cfg.attach(ev_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (*calibrate_cmd) {
      if (!cal.det_index && !cal.track_id && cal.bbox.empty()) {
        throw ParameterError("calibrate needs one of --det-index, --track-id or --bbox");
      }
      if (cal.bbox.empty() && (cal.detections.empty() || frame_opt->count() == 0)) {
        throw ParameterError("calibrate needs --detections and --frame unless --bbox is given");
      }
      if (!(cal.marker_distance > 0.0)) throw ParameterError("marker distance must be positive");
      return do_calibrate(cal, cal_cfg.resolve(calibrate_cmd), err);
    }
    if (*run_cmd) return do_run(run, run_cfg.resolve(run_cmd), err);
    if (*sim_cmd) return do_simulate(sim, sim_cfg.resolve(sim_cmd), err);
    if (*ev_cmd) return do_evaluate(ev, ev_cfg.resolve(ev_cmd), out, err);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kData;
  }
  return exit_code::kUsage;
}

}  // namespace socdist
