#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "socdist/pipeline.hpp"
#include "socdist/simulator.hpp"

namespace socdist {

/// Unordered pair of identities, stored with first < second.
using Edge = std::pair<std::int64_t, std::int64_t>;
Edge make_edge(std::int64_t a, std::int64_t b);

struct FrameEdges {
  std::int64_t frame_index = 0;
  std::set<Edge> edges;
};

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Per frame: TP = |pred & truth|, FP = |pred - truth|, FN = |truth - pred|,
/// TN = |universe - (pred | truth)|, summed over frames. The three sequences
/// must list the same frame indices in the same order, and every edge must
/// belong to its frame's universe; DataError otherwise.
ConfusionCounts confusion_from_edges(const std::vector<FrameEdges>& predicted,
                                     const std::vector<FrameEdges>& truth,
                                     const std::vector<FrameEdges>& universe);

/// Percentages. A metric whose denominator is zero is nullopt ("n/a").
struct Metrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> false_alarm_rate;
  std::optional<double> accuracy;
};

Metrics metrics(const ConfusionCounts& c);

/// "75.00%" or "n/a".
std::string format_percent(const std::optional<double>& value, int decimals = 2);
/// Two-column table, one "<Name> <value>" row per metric.
std::string format_metrics_table(const Metrics& m);

/// |true - estimated| / true * 100.
double percent_error(double true_m, double estimated_m);
/// Sample standard deviation (n - 1 denominator); nullopt for n < 2.
std::optional<double> sample_stdev(const std::vector<double>& values);

struct DistanceSample {
  double true_m = 0.0;
  double estimated_m = 0.0;
  std::string group;  // empty when ungrouped
};

struct DistanceStats {
  std::size_t n = 0;         // accepted samples
  std::size_t rejected = 0;  // samples with true_m <= 0
  std::optional<double> stdev_m;             // over estimates
  std::optional<double> mean_percent_error;  // over accepted samples
};

DistanceStats distance_stats(const std::vector<DistanceSample>& samples);
std::map<std::string, DistanceStats> distance_stats_by_group(
    const std::vector<DistanceSample>& samples);

/// Spearman rank correlation with average ranks for ties; nullopt when
/// either side is constant or fewer than two points are given.
std::optional<double> rank_correlation(const std::vector<double>& x,
                                       const std::vector<double>& y);

struct IdentifiedPoint {
  std::int64_t id = 0;
  Point2 position;
};

/// Greedy one-to-one matching in ascending centroid distance (ties: lower
/// predicted id, then lower truth id), rejecting pairs farther than `gate_px`.
/// Returns (predicted id, truth id) pairs sorted by predicted id.
std::vector<std::pair<std::int64_t, std::int64_t>> align_identities(
    const std::vector<IdentifiedPoint>& predicted,
    const std::vector<IdentifiedPoint>& truth, double gate_px);

inline constexpr double kDefaultMatchGatePx = 50.0;

struct EvaluationOptions {
  double threshold_m = 1.8;
  double match_gate_px = kDefaultMatchGatePx;
};

struct EvaluationResult {
  ConfusionCounts counts;
  Metrics metrics;
  std::int64_t frames = 0;
  std::int64_t unmatched_predicted = 0;  // predicted persons with no truth match
  std::int64_t unmatched_truth = 0;      // truth persons with no predicted match
  DistanceStats distance;                // over all matched pairs
  std::map<std::string, DistanceStats> distance_by_true_distance;
};

/// Scores reports against simulator truth. Identities are aligned per frame
/// by centroid; the pair universe of a frame is every pair of aligned
/// identities.
EvaluationResult evaluate_against_truth(const std::vector<FrameReport>& reports,
                                        const std::vector<GroundTruthRecord>& truth,
                                        const EvaluationOptions& options = {});

/// Hand-labelled violation edges, in predicted track-id space.
struct LabelledEdges {
  std::int64_t frame_index = 0;
  std::set<Edge> violations;
};
LabelledEdges parse_label_line(const std::string& text, std::size_t line);

/// Scores reports against hand labels. A report frame without a label line
/// counts as having no violations; the universe is every pair of reported
/// persons.
EvaluationResult evaluate_against_labels(const std::vector<FrameReport>& reports,
                                         const std::vector<LabelledEdges>& labels);

std::string serialize_evaluation(const EvaluationResult& result);

}  // namespace socdist
