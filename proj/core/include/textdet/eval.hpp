#pragma once

#include <span>
#include <string>
#include <vector>

#include "textdet/geometry.hpp"
#include "textdet/head.hpp"
#include "textdet/synthdata.hpp"

namespace textdet::eval {

struct EvalConfig {
    double iou_threshold = 0.5;
    int raster_resolution = 512;
    bool respect_ignore = true;
    int polygon_samples = 25;  // per side, when sampling BezierText outlines
};

struct SceneDetections {
    int scene_index = 0;
    std::vector<head::Detection> detections;
};

struct MatchedPair {
    int scene_index = 0;
    int detection_index = 0;
    int gt_index = 0;
    double iou = 0.0;
};

struct SceneStats {
    int scene_index = 0;
    int num_detections = 0;
    int num_ignored_detections = 0;  // absorbed by ignore-flagged gts
    int num_gts = 0;
    int num_ignored_gts = 0;
    int true_positives = 0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    int true_positives = 0;
    int counted_detections = 0;  // after removing ignore-matched ones
    int counted_gts = 0;         // non-ignored
    std::vector<MatchedPair> matched_pairs;
    std::vector<SceneStats> per_scene;
};

/// Greedy score-ordered one-to-one matching at the configured polygon IoU
/// threshold. Score ties break to the lower detection index, IoU ties to the
/// lower gt index. Detections whose best remaining overlap is an
/// ignore-flagged gt disappear from both precision and recall counts.
EvalReport evaluate(std::span<const SceneDetections> detections,
                    std::span<const synthdata::Scene> scenes, const EvalConfig& config);

/// Rebuilds aggregate P/R/F from a subset of the per-scene stats.
EvalReport aggregate_subset(const EvalReport& report, std::span<const int> scene_indices);

std::string format_table(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace textdet::eval
