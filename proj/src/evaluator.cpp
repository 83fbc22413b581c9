#include "socdist/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "socdist/error.hpp"

namespace socdist {

Edge make_edge(std::int64_t a, std::int64_t b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts confusion_from_edges(const std::vector<FrameEdges>& predicted,
                                     const std::vector<FrameEdges>& truth,
                                     const std::vector<FrameEdges>& universe) {
  if (predicted.size() != truth.size() || predicted.size() != universe.size()) {
    throw DataError("misaligned frames: stream lengths differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const auto& u = universe[i].edges;
    const auto& p = predicted[i].edges;
    const auto& t = truth[i].edges;
    if (predicted[i].frame_index != universe[i].frame_index ||
        truth[i].frame_index != universe[i].frame_index) {
      throw DataError("misaligned frames at frame " +
                      std::to_string(universe[i].frame_index));
    }
    for (const auto* set : {&p, &t}) {
      for (const Edge& e : *set) {
        if (!u.count(e)) {
          throw DataError("edge (" + std::to_string(e.first) + "," +
                          std::to_string(e.second) + ") outside the universe of frame " +
                          std::to_string(universe[i].frame_index));
        }
      }
    }
    for (const Edge& e : u) {
      const bool in_p = p.count(e) > 0;
      const bool in_t = t.count(e) > 0;
      if (in_p && in_t) ++c.tp;
      else if (in_p) ++c.fp;
      else if (in_t) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

Metrics metrics(const ConfusionCounts& c) {
  auto ratio = [](std::int64_t num, std::int64_t den) -> std::optional<double> {
    if (den <= 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn), ratio(c.fp, c.tn + c.fp),
          ratio(c.tp + c.tn, c.total())};
}

std::string format_percent(const std::optional<double>& value, int decimals) {
  if (!value) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f%%", decimals, *value);
  return buf;
}

std::string format_metrics_table(const Metrics& m) {
  std::string out;
  for (auto [name, v] : {std::pair{"Precision", m.precision}, std::pair{"Recall", m.recall},
                         std::pair{"False Alarm Rate", m.false_alarm_rate},
                         std::pair{"Accuracy", m.accuracy}}) {
    out += std::string(name) + " " + format_percent(v) + "\n";
  }
  return out;
}

double percent_error(double true_m, double estimated_m) {
  if (!(true_m > 0.0)) throw ParameterError("percent error needs a positive true distance");
  return std::abs(true_m - estimated_m) / true_m * 100.0;
}

std::optional<double> sample_stdev(const std::vector<double>& values) {
  if (values.size() < 2) return std::nullopt;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

DistanceStats distance_stats(const std::vector<DistanceSample>& samples) {
  DistanceStats s;
  std::vector<double> estimates;
  double error_sum = 0.0;
  for (const auto& x : samples) {
    if (!(x.true_m > 0.0)) {
      ++s.rejected;
      continue;
    }
    estimates.push_back(x.estimated_m);
    error_sum += percent_error(x.true_m, x.estimated_m);
  }
  s.n = estimates.size();
  s.stdev_m = sample_stdev(estimates);
  if (s.n > 0) s.mean_percent_error = error_sum / static_cast<double>(s.n);
  return s;
}

std::map<std::string, DistanceStats> distance_stats_by_group(
    const std::vector<DistanceSample>& samples) {
  std::map<std::string, std::vector<DistanceSample>> groups;
  for (const auto& s : samples) groups[s.group].push_back(s);
  std::map<std::string, DistanceStats> out;
  for (const auto& [key, group] : groups) out[key] = distance_stats(group);
  return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> rank_correlation(const std::vector<double>& x,
                                       const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("rank_correlation: size mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::pair<std::int64_t, std::int64_t>> align_identities(
    const std::vector<IdentifiedPoint>& predicted,
    const std::vector<IdentifiedPoint>& truth, double gate_px) {
  struct Candidate {
    double distance;
    std::int64_t pred;
    std::int64_t truth;
  };
  std::vector<Candidate> candidates;
  for (const auto& p : predicted) {
    for (const auto& t : truth) {
      const double d = std::hypot(p.position.x - t.position.x, p.position.y - t.position.y);
      if (d <= gate_px) candidates.push_back({d, p.id, t.id});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return std::tie(a.distance, a.pred, a.truth) < std::tie(b.distance, b.pred, b.truth);
  });
  std::set<std::int64_t> used_pred, used_truth;
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& c : candidates) {
    if (used_pred.count(c.pred) || used_truth.count(c.truth)) continue;
    used_pred.insert(c.pred);
    used_truth.insert(c.truth);
    out.emplace_back(c.pred, c.truth);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string distance_group_key(double true_m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", true_m);
  return buf;
}

void finish(EvaluationResult& r, const std::vector<DistanceSample>& samples) {
  r.metrics = metrics(r.counts);
  r.distance = distance_stats(samples);
  r.distance_by_true_distance = distance_stats_by_group(samples);
}

}  // namespace

EvaluationResult evaluate_against_truth(const std::vector<FrameReport>& reports,
                                        const std::vector<GroundTruthRecord>& truth,
                                        const EvaluationOptions& options) {
  if (!(options.threshold_m > 0.0)) throw ParameterError("threshold must be positive");
  if (!(options.match_gate_px > 0.0)) throw ParameterError("match gate must be positive");
  if (reports.size() != truth.size()) {
    throw DataError("misaligned frames: " + std::to_string(reports.size()) +
                    " reports vs " + std::to_string(truth.size()) + " truth records");
  }

  EvaluationResult result;
  std::vector<FrameEdges> pred_edges, truth_edges, universe;
  std::vector<DistanceSample> samples;

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const FrameReport& rep = reports[i];
    const GroundTruthRecord& rec = truth[i];
    if (rep.frame_index != rec.frame_index) {
      throw DataError("misaligned frames: report frame " + std::to_string(rep.frame_index) +
                      " vs truth frame " + std::to_string(rec.frame_index));
    }
    std::vector<IdentifiedPoint> pp, tp;
    for (const auto& p : rep.persons) pp.push_back({p.track_id, centroid_of(p.bbox)});
    for (const auto& p : rec.persons) tp.push_back({p.pid, {p.cx_px, p.cy_px}});
    const auto matches = align_identities(pp, tp, options.match_gate_px);
    std::map<std::int64_t, std::int64_t> to_truth(matches.begin(), matches.end());
    result.unmatched_predicted += static_cast<std::int64_t>(pp.size() - matches.size());
    result.unmatched_truth += static_cast<std::int64_t>(tp.size() - matches.size());

    std::set<std::int64_t> matched_truth;
    for (const auto& [p, t] : matches) matched_truth.insert(t);

    FrameEdges u{rep.frame_index, {}}, pe{rep.frame_index, {}}, te{rep.frame_index, {}};
    std::map<Edge, double> true_distance;
    for (const auto& pair : rec.pairs) {
      if (!matched_truth.count(pair.a) || !matched_truth.count(pair.b)) continue;
      const Edge e = make_edge(pair.a, pair.b);
      u.edges.insert(e);
      true_distance[e] = pair.d_m;
      if (pair.d_m < options.threshold_m) te.edges.insert(e);
    }
    for (const auto& m : rep.pairs) {
      auto a = to_truth.find(m.id_a);
      auto b = to_truth.find(m.id_b);
      if (a == to_truth.end() || b == to_truth.end()) continue;
      const Edge e = make_edge(a->second, b->second);
      auto td = true_distance.find(e);
      if (td == true_distance.end()) {
        throw DataError("truth record for frame " + std::to_string(rec.frame_index) +
                        " lacks a pair for persons " + std::to_string(e.first) + "," +
                        std::to_string(e.second));
      }
      if (m.violation) pe.edges.insert(e);
      samples.push_back({td->second, m.distance_m, distance_group_key(td->second)});
    }
    universe.push_back(std::move(u));
    pred_edges.push_back(std::move(pe));
    truth_edges.push_back(std::move(te));
  }

  result.frames = static_cast<std::int64_t>(reports.size());
  result.counts = confusion_from_edges(pred_edges, truth_edges, universe);
  finish(result, samples);
  return result;
}

LabelledEdges parse_label_line(const std::string& text, std::size_t line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("malformed label record (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("frame") || !doc["frame"].is_number_integer()) {
    throw ParseError(line, "label record needs an integer \"frame\"");
  }
  if (!doc.contains("violations") || !doc["violations"].is_array()) {
    throw ParseError(line, "label record needs a \"violations\" array");
  }
  LabelledEdges out;
  out.frame_index = doc["frame"].get<std::int64_t>();
  for (const auto& e : doc["violations"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw ParseError(line, "violation must be [a, b]");
    }
    const auto a = e[0].get<std::int64_t>();
    const auto b = e[1].get<std::int64_t>();
    if (a == b) throw ParseError(line, "violation pairs a person with itself");
    out.violations.insert(make_edge(a, b));
  }
  return out;
}

EvaluationResult evaluate_against_labels(const std::vector<FrameReport>& reports,
                                         const std::vector<LabelledEdges>& labels) {
  std::map<std::int64_t, const LabelledEdges*> by_frame;
  for (const auto& l : labels) {
    if (!by_frame.emplace(l.frame_index, &l).second) {
      throw DataError("duplicate label record for frame " + std::to_string(l.frame_index));
    }
  }
  std::set<std::int64_t> report_frames;
  for (const auto& r : reports) report_frames.insert(r.frame_index);
  for (const auto& l : labels) {
    if (!report_frames.count(l.frame_index)) {
      throw DataError("misaligned frames: label frame " + std::to_string(l.frame_index) +
                      " has no report");
    }
  }

  EvaluationResult result;
  std::vector<FrameEdges> pred_edges, truth_edges, universe;
  for (const auto& rep : reports) {
    FrameEdges u{rep.frame_index, {}}, pe{rep.frame_index, {}}, te{rep.frame_index, {}};
    for (std::size_t i = 0; i < rep.persons.size(); ++i) {
      for (std::size_t j = i + 1; j < rep.persons.size(); ++j) {
        u.edges.insert(make_edge(rep.persons[i].track_id, rep.persons[j].track_id));
      }
    }
    for (const auto& m : rep.pairs) {
      if (m.violation) pe.edges.insert(make_edge(m.id_a, m.id_b));
    }
    if (auto it = by_frame.find(rep.frame_index); it != by_frame.end()) {
      te.edges = it->second->violations;
    }
    universe.push_back(std::move(u));
    pred_edges.push_back(std::move(pe));
    truth_edges.push_back(std::move(te));
  }
  result.frames = static_cast<std::int64_t>(reports.size());
  result.counts = confusion_from_edges(pred_edges, truth_edges, universe);
  finish(result, {});
  return result;
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json("n/a");
}

nlohmann::ordered_json stats_json(const DistanceStats& s) {
  nlohmann::ordered_json o;
  o["n"] = s.n;
  o["rejected"] = s.rejected;
  o["stdev_m"] = optional_number(s.stdev_m);
  o["mean_percent_error"] = optional_number(s.mean_percent_error);
  return o;
}

}  // namespace

std::string serialize_evaluation(const EvaluationResult& r) {
  nlohmann::ordered_json doc;
  doc["frames"] = r.frames;
  doc["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn},
                   {"fn", r.counts.fn}};
  doc["precision"] = optional_number(r.metrics.precision);
  doc["recall"] = optional_number(r.metrics.recall);
  doc["false_alarm_rate"] = optional_number(r.metrics.false_alarm_rate);
  doc["accuracy"] = optional_number(r.metrics.accuracy);
  doc["unmatched_predicted"] = r.unmatched_predicted;
  doc["unmatched_truth"] = r.unmatched_truth;
  doc["distance"] = stats_json(r.distance);
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [key, s] : r.distance_by_true_distance) groups[key] = stats_json(s);
  doc["distance_by_true_m"] = std::move(groups);
  return doc.dump(2) + "\n";
}

}  // namespace socdist
