#include "textdet/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace textdet::eval {

using geometry::PolygonText;

namespace {

struct Totals {
    int tp = 0;
    int counted_det = 0;
    int counted_gt = 0;
};

void finalize(EvalReport& report, const Totals& t) {
    report.true_positives = t.tp;
    report.counted_detections = t.counted_det;
    report.counted_gts = t.counted_gt;
    report.precision = t.counted_det > 0 ? static_cast<double>(t.tp) / t.counted_det : 0.0;
    report.recall = t.counted_gt > 0 ? static_cast<double>(t.tp) / t.counted_gt : 0.0;
    const double pr = report.precision + report.recall;
    report.f_measure = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
}

}  // namespace

EvalReport evaluate(std::span<const SceneDetections> detections,
                    std::span<const synthdata::Scene> scenes, const EvalConfig& config) {
    if (!(config.iou_threshold > 0.0 && config.iou_threshold < 1.0)) {
        throw std::invalid_argument("evaluate: iou_threshold must lie in (0,1)");
    }

    EvalReport report;
    Totals totals;
    for (const SceneDetections& sd : detections) {
        if (sd.scene_index < 0 || static_cast<std::size_t>(sd.scene_index) >= scenes.size()) {
            throw std::out_of_range("evaluate: detection references unknown scene " +
                                    std::to_string(sd.scene_index));
        }
        const synthdata::Scene& scene = scenes[static_cast<std::size_t>(sd.scene_index)];

        std::vector<PolygonText> gt_polys;
        gt_polys.reserve(scene.instances.size());
        for (const auto& inst : scene.instances) {
            gt_polys.push_back(geometry::bezier_to_polygon(inst, config.polygon_samples));
        }

        // Score-descending order, index ascending on ties.
        std::vector<int> order(sd.detections.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double sa = sd.detections[static_cast<std::size_t>(a)].score;
            const double sb = sd.detections[static_cast<std::size_t>(b)].score;
            if (sa != sb) return sa > sb;
            return a < b;
        });

        SceneStats stats;
        stats.scene_index = sd.scene_index;
        stats.num_detections = static_cast<int>(sd.detections.size());
        stats.num_gts = static_cast<int>(scene.instances.size());
        for (bool ig : scene.ignore_flags) stats.num_ignored_gts += (config.respect_ignore && ig);

        std::vector<bool> gt_claimed(scene.instances.size(), false);
        for (int det_idx : order) {
            const PolygonText det_poly = geometry::bezier_to_polygon(
                sd.detections[static_cast<std::size_t>(det_idx)].shape, config.polygon_samples);

            int best_gt = -1;
            double best_iou = 0.0;
            int best_ignored_gt = -1;
            double best_ignored_iou = 0.0;
            for (std::size_t j = 0; j < gt_polys.size(); ++j) {
                const bool ignored = config.respect_ignore && scene.ignore_flags[j];
                if (!ignored && gt_claimed[j]) continue;
                const double iou = geometry::polygon_iou(det_poly, gt_polys[j],
                                                         config.raster_resolution);
                if (ignored) {
                    if (iou > best_ignored_iou) {
                        best_ignored_iou = iou;
                        best_ignored_gt = static_cast<int>(j);
                    }
                } else if (iou > best_iou) {
                    best_iou = iou;
                    best_gt = static_cast<int>(j);
                }
            }

            if (best_gt >= 0 && best_iou >= config.iou_threshold) {
                gt_claimed[static_cast<std::size_t>(best_gt)] = true;
                stats.true_positives += 1;
                report.matched_pairs.push_back({sd.scene_index, det_idx, best_gt, best_iou});
            } else if (best_ignored_gt >= 0 && best_ignored_iou >= config.iou_threshold) {
                stats.num_ignored_detections += 1;  // out of both counts
            }
        }

        totals.tp += stats.true_positives;
        totals.counted_det += stats.num_detections - stats.num_ignored_detections;
        totals.counted_gt += stats.num_gts - stats.num_ignored_gts;
        report.per_scene.push_back(stats);
    }
    finalize(report, totals);
    return report;
}

EvalReport aggregate_subset(const EvalReport& report, std::span<const int> scene_indices) {
    EvalReport out;
    Totals totals;
    for (const SceneStats& s : report.per_scene) {
        if (std::find(scene_indices.begin(), scene_indices.end(), s.scene_index) ==
            scene_indices.end()) {
            continue;
        }
        out.per_scene.push_back(s);
        totals.tp += s.true_positives;
        totals.counted_det += s.num_detections - s.num_ignored_detections;
        totals.counted_gt += s.num_gts - s.num_ignored_gts;
    }
    for (const MatchedPair& p : report.matched_pairs) {
        if (std::find(scene_indices.begin(), scene_indices.end(), p.scene_index) !=
            scene_indices.end()) {
            out.matched_pairs.push_back(p);
        }
    }
    finalize(out, totals);
    return out;
}

std::string format_table(const EvalReport& report) {
    char buf[256];
    std::string out;
    out += "    P       R       F       TP    Det   GT\n";
    std::snprintf(buf, sizeof(buf), "  %.4f  %.4f  %.4f  %-5d %-5d %-5d\n", report.precision,
                  report.recall, report.f_measure, report.true_positives,
                  report.counted_detections, report.counted_gts);
    out += buf;
    return out;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f_measure"] = report.f_measure;
    j["true_positives"] = report.true_positives;
    j["counted_detections"] = report.counted_detections;
    j["counted_gts"] = report.counted_gts;
    j["matched_pairs"] = nlohmann::ordered_json::array();
    for (const MatchedPair& p : report.matched_pairs) {
        j["matched_pairs"].push_back({{"scene", p.scene_index},
                                      {"detection", p.detection_index},
                                      {"gt", p.gt_index},
                                      {"iou", p.iou}});
    }
    j["per_scene"] = nlohmann::ordered_json::array();
    for (const SceneStats& s : report.per_scene) {
        j["per_scene"].push_back({{"scene", s.scene_index},
                                  {"detections", s.num_detections},
                                  {"ignored_detections", s.num_ignored_detections},
                                  {"gts", s.num_gts},
                                  {"ignored_gts", s.num_ignored_gts},
                                  {"true_positives", s.true_positives}});
    }
    return j.dump(2) + "\n";
}

}  // namespace textdet::eval
